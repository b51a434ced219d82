//! One live run: lifecycle, per-agent controllers and the ordered frame
//! stream. Everything here is synchronous; the HTTP layer serializes
//! callers through a per-session lock.

use std::collections::{BTreeMap, VecDeque};
use std::sync::Arc;

use kitchen_core::sim::{LegalActions, SimError, Status};
use kitchen_core::{
    Action, AgentId, Event, Outcome, Plan, RunRecord, Simulation, TaskBundle, WorldState,
};
use kitchen_harness::{Controller, ResultRow};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tokio::sync::broadcast;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Lobby,
    Running,
    Finished,
}

/// Who drives an agent. Scripted agents replay a fixed action list and
/// declare Finish once it runs out.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Participant {
    Human,
    Scripted(Vec<Action>),
}

/// Messages on the event stream. `seq` numbers every frame of a session
/// from 1; a snapshot carries the number of the last frame it includes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Frame {
    Snapshot {
        seq: u64,
        phase: Phase,
        sim_status: Status,
        state: WorldState,
    },
    Event {
        seq: u64,
        event: Event,
    },
    State {
        seq: u64,
        sim_status: Status,
        state: WorldState,
    },
    Finished {
        seq: u64,
        record: RunRecord,
    },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SessionError {
    #[error("{0} is not part of this session")]
    UnknownAgent(AgentId),
    #[error("{0} is not controlled by a human")]
    NotHuman(AgentId),
    #[error("session is finished")]
    Finished,
    #[error("the run is over; finalize the session")]
    RunOver,
    #[error("session has not started")]
    Lobby,
    #[error("the run is still in progress; finalize with abandon to stop it")]
    InProgress,
    #[error("participants: {0}")]
    Participants(String),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SubmitReply {
    pub event: Event,
    pub sim_status: Status,
    pub state: WorldState,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateView {
    pub id: String,
    pub phase: Phase,
    pub seq: u64,
    pub sim_status: Status,
    pub state: WorldState,
    pub legal: Vec<LegalActions>,
    pub participants: BTreeMap<AgentId, Participant>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record: Option<RunRecord>,
}

pub struct Session {
    pub id: String,
    bundle: Arc<TaskBundle>,
    sim: Simulation,
    participants: BTreeMap<AgentId, Participant>,
    scripts: BTreeMap<AgentId, VecDeque<Action>>,
    operator: String,
    phase: Phase,
    record: Option<RunRecord>,
    seq: u64,
    /// Events already forwarded to subscribers.
    sent_events: usize,
    tx: broadcast::Sender<Arc<str>>,
}

impl Session {
    /// `participants` defaults to every agent being human. At least one
    /// agent must be human, since only human commands start the run.
    pub fn new(
        id: String,
        bundle: Arc<TaskBundle>,
        participants: Option<BTreeMap<AgentId, Participant>>,
        operator: String,
    ) -> Result<Session, SessionError> {
        let n = bundle.n_agents;
        let mut all: BTreeMap<AgentId, Participant> =
            (0..n).map(|i| (AgentId(i), Participant::Human)).collect();
        for (agent, p) in participants.unwrap_or_default() {
            if agent.index() >= n {
                return Err(SessionError::Participants(format!(
                    "{agent} is not part of a {n}-agent bundle"
                )));
            }
            all.insert(agent, p);
        }
        if !all.values().any(|p| *p == Participant::Human) {
            return Err(SessionError::Participants(
                "at least one agent must be human".into(),
            ));
        }
        let scripts = all
            .iter()
            .filter_map(|(a, p)| match p {
                Participant::Scripted(list) => Some((*a, list.iter().cloned().collect())),
                Participant::Human => None,
            })
            .collect();
        let (tx, _) = broadcast::channel(4096);
        Ok(Session {
            id,
            sim: Simulation::new(Arc::clone(&bundle)),
            bundle,
            participants: all,
            scripts,
            operator,
            phase: Phase::Lobby,
            record: None,
            seq: 0,
            sent_events: 0,
            tx,
        })
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn bundle(&self) -> &Arc<TaskBundle> {
        &self.bundle
    }

    /// Subscribes and returns the snapshot to send first. Taken under the
    /// session lock, so no frame is missed or duplicated.
    pub fn subscribe(&self) -> (Frame, broadcast::Receiver<Arc<str>>) {
        let rx = self.tx.subscribe();
        let snapshot = Frame::Snapshot {
            seq: self.seq,
            phase: self.phase,
            sim_status: self.sim.status().clone(),
            state: self.sim.state().clone(),
        };
        (snapshot, rx)
    }

    pub fn view(&self) -> StateView {
        let legal = self
            .participants
            .iter()
            .filter(|(_, p)| **p == Participant::Human)
            .filter_map(|(a, _)| self.sim.legal_actions(*a).ok())
            .collect();
        StateView {
            id: self.id.clone(),
            phase: self.phase,
            seq: self.seq,
            sim_status: self.sim.status().clone(),
            state: self.sim.state().clone(),
            legal,
            participants: self.participants.clone(),
            record: self.record.clone(),
        }
    }

    fn emit(&mut self, make: impl FnOnce(u64) -> Frame) {
        self.seq += 1;
        let frame = make(self.seq);
        let text: Arc<str> = serde_json::to_string(&frame)
            .expect("frames serialize")
            .into();
        // No subscribers is fine.
        let _ = self.tx.send(text);
    }

    fn flush_events(&mut self) {
        let fresh: Vec<Event> = self.sim.events()[self.sent_events..].to_vec();
        self.sent_events += fresh.len();
        for event in fresh {
            self.emit(|seq| Frame::Event { seq, event });
        }
    }

    fn emit_state(&mut self) {
        let sim_status = self.sim.status().clone();
        let state = self.sim.state().clone();
        self.emit(|seq| Frame::State {
            seq,
            sim_status,
            state,
        });
    }

    /// Lets scripted agents act until each is busy, finished or the run
    /// ends.
    fn drive_scripted(&mut self) {
        loop {
            let Some(agent) = self
                .sim
                .idle_agents()
                .into_iter()
                .find(|a| self.scripts.contains_key(a))
            else {
                return;
            };
            if !self.sim.is_running() {
                return;
            }
            let action = self
                .scripts
                .get_mut(&agent)
                .and_then(VecDeque::pop_front)
                .unwrap_or(Action::Finish);
            let event = self.sim.submit(agent, action).expect("agent checked idle");
            if matches!(event.outcome, Outcome::Rejected { .. }) {
                // A broken script would retry forever; stop that agent.
                self.scripts.get_mut(&agent).map(VecDeque::clear);
                let _ = self.sim.submit(agent, Action::Finish);
            }
        }
    }

    pub fn submit(&mut self, agent: AgentId, action: Action) -> Result<SubmitReply, SessionError> {
        match self.participants.get(&agent) {
            None => return Err(SessionError::UnknownAgent(agent)),
            Some(Participant::Scripted(_)) => return Err(SessionError::NotHuman(agent)),
            Some(Participant::Human) => {}
        }
        match self.phase {
            Phase::Finished => return Err(SessionError::Finished),
            Phase::Lobby => {
                self.phase = Phase::Running;
                self.drive_scripted();
            }
            Phase::Running => {}
        }
        let event = match self.sim.submit(agent, action) {
            Ok(e) => e,
            Err(SimError::Over) => {
                self.flush_events();
                return Err(SessionError::RunOver);
            }
            Err(SimError::UnknownAgent(a)) => return Err(SessionError::UnknownAgent(a)),
        };
        if !matches!(event.outcome, Outcome::Rejected { .. }) {
            self.drive_scripted();
        }
        self.flush_events();
        self.emit_state();
        Ok(SubmitReply {
            event,
            sim_status: self.sim.status().clone(),
            state: self.sim.state().clone(),
        })
    }

    /// Closes the session. A run still in progress needs `abandon`.
    /// Finalizing twice returns the stored record and no new row.
    pub fn finalize(
        &mut self,
        abandon: bool,
    ) -> Result<(RunRecord, Option<ResultRow>), SessionError> {
        match self.phase {
            Phase::Lobby => return Err(SessionError::Lobby),
            Phase::Finished => {
                return Ok((
                    self.record
                        .clone()
                        .expect("finished sessions keep their record"),
                    None,
                ))
            }
            Phase::Running => {}
        }
        if self.sim.is_running() {
            if !abandon {
                return Err(SessionError::InProgress);
            }
            self.sim.abandon();
        }
        let record = self.sim.record();
        self.phase = Phase::Finished;
        self.record = Some(record.clone());
        self.flush_events();
        let final_record = record.clone();
        self.emit(|seq| Frame::Finished {
            seq,
            record: final_record,
        });

        let mut row = ResultRow::for_bundle(&self.bundle, Controller::Human, &self.operator);
        row.plan = Some(self.accepted_plan());
        row.record = record.clone();
        Ok((record, Some(row)))
    }

    /// The actions the engine accepted, per agent, in order. Replaying it
    /// in batch reproduces a clean live run.
    pub fn accepted_plan(&self) -> Plan {
        let mut plan = Plan::default();
        for e in self.sim.events() {
            if e.outcome == Outcome::Started {
                plan.push(e.agent, e.action.clone());
            }
        }
        plan
    }
}
