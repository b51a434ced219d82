use std::collections::VecDeque;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::action::{Action, Plan};
use super::legal::LegalActions;
use super::record::{AgentStats, Event, Outcome, Rejection, RunRecord, Served};
use super::rules::{Operation, Rules};
use crate::taskgen::TaskBundle;
use crate::world::{AgentId, Coord, Item, Time, WorldState};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Status {
    Running,
    Succeeded { oct: Time },
    Failed { clock: Time, reason: String },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimError {
    #[error("unknown agent {0}")]
    UnknownAgent(AgentId),
    #[error("the run is already over")]
    Over,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Effect {
    Move { to: Coord, tiles: u64 },
    Interact,
    Process { station: usize, op: Operation },
    Wait,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct InFlight {
    action: Action,
    start: Time,
    end: Time,
    effect: Effect,
}

/// One execution of a task bundle. Batch plans and interactive commands
/// go through the same start/complete logic; only the driver differs.
#[derive(Clone, Debug)]
pub struct Simulation {
    bundle: Arc<TaskBundle>,
    world: WorldState,
    queues: Vec<VecDeque<Action>>,
    in_flight: Vec<Option<InFlight>>,
    finished: Vec<bool>,
    events: Vec<Event>,
    served: Vec<Served>,
    status: Status,
}

impl Simulation {
    pub fn new(bundle: Arc<TaskBundle>) -> Simulation {
        let n = bundle.n_agents;
        let world = WorldState::initial(&bundle.map, n, bundle.orders.clone());
        Simulation {
            bundle,
            world,
            queues: vec![VecDeque::new(); n],
            in_flight: vec![None; n],
            finished: vec![false; n],
            events: Vec::new(),
            served: Vec::new(),
            status: Status::Running,
        }
    }

    pub fn bundle(&self) -> &TaskBundle {
        &self.bundle
    }

    pub fn state(&self) -> &WorldState {
        &self.world
    }

    pub fn clock(&self) -> Time {
        self.world.clock
    }

    pub fn status(&self) -> &Status {
        &self.status
    }

    pub fn is_running(&self) -> bool {
        self.status == Status::Running
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn n_agents(&self) -> usize {
        self.world.agents.len()
    }

    pub fn is_finished(&self, agent: AgentId) -> bool {
        self.finished.get(agent.index()).copied().unwrap_or(false)
    }

    pub fn is_busy(&self, agent: AgentId) -> bool {
        self.in_flight
            .get(agent.index())
            .is_some_and(Option::is_some)
    }

    /// Agents that are waiting for a command: not busy and not finished.
    pub fn idle_agents(&self) -> Vec<AgentId> {
        (0..self.n_agents())
            .filter(|&i| self.in_flight[i].is_none() && !self.finished[i])
            .map(AgentId)
            .collect()
    }

    /// Runs a whole plan in batch mode. Any rejection ends the run.
    pub fn run_plan(mut self, plan: &Plan) -> RunRecord {
        if let Err(e) = plan.check_agents(self.n_agents()) {
            return RunRecord::failed_before_start(self.n_agents(), format!("invalid-plan: {e}"));
        }
        for (agent, actions) in &plan.per_agent {
            self.queues[agent.index()].extend(actions.iter().cloned());
        }
        self.run_batch();
        self.record()
    }

    fn run_batch(&mut self) {
        loop {
            for i in 0..self.n_agents() {
                while self.is_running() && self.in_flight[i].is_none() && !self.finished[i] {
                    let Some(action) = self.queues[i].pop_front() else {
                        break;
                    };
                    if let Err(rejection) = self.start(i, action) {
                        self.fail(rejection.to_string());
                    }
                }
            }
            if !self.is_running() {
                return;
            }
            let Some(next) = self.next_event_time() else {
                let remaining = self.world.orders.len() - self.world.orders.next_index;
                self.fail(format!(
                    "exhausted: every agent ran out of actions with {remaining} dish(es) unserved"
                ));
                return;
            };
            if !self.advance_to(next) {
                return;
            }
        }
    }

    /// Submits one command for an idle agent, then advances the clock while
    /// every live agent is busy. An illegal command yields a `Rejected`
    /// event and leaves state and clock untouched.
    pub fn submit(&mut self, agent: AgentId, action: Action) -> Result<Event, SimError> {
        let i = agent.index();
        if i >= self.n_agents() {
            return Err(SimError::UnknownAgent(agent));
        }
        if !self.is_running() {
            return Err(SimError::Over);
        }
        let refused = if self.finished[i] {
            Some(Rejection::AgentFinished(agent))
        } else if self.in_flight[i].is_some() {
            Some(Rejection::AgentBusy(agent))
        } else {
            None
        };
        let result = match refused {
            Some(r) => Err(r),
            None => self.start(i, action.clone()),
        };
        let event = match result {
            Ok(event) => event,
            Err(rejection) => {
                let event = Event {
                    clock: self.world.clock,
                    agent,
                    action,
                    outcome: Outcome::Rejected {
                        reason: rejection.to_string(),
                    },
                };
                self.events.push(event.clone());
                return Ok(event);
            }
        };
        self.settle_interactive();
        Ok(event)
    }

    /// Interactive step returning the resulting snapshot.
    pub fn step_interactive(
        &mut self,
        agent: AgentId,
        action: Action,
    ) -> Result<(&WorldState, Event), SimError> {
        let event = self.submit(agent, action)?;
        Ok((&self.world, event))
    }

    fn settle_interactive(&mut self) {
        while self.is_running() {
            if !self.idle_agents().is_empty() {
                return;
            }
            let Some(next) = self.next_event_time() else {
                self.fail("exhausted: every agent finished with dishes unserved".into());
                return;
            };
            if !self.advance_to(next) {
                return;
            }
        }
    }

    /// Ends a live run as a failure.
    pub fn abandon(&mut self) {
        if self.is_running() {
            self.fail("abandoned: run stopped before all orders were served".into());
        }
    }

    pub fn legal_actions(&self, agent: AgentId) -> Result<LegalActions, SimError> {
        if agent.index() >= self.n_agents() {
            return Err(SimError::UnknownAgent(agent));
        }
        Ok(LegalActions::compute(self, agent))
    }

    pub(crate) fn rules(&self) -> Rules<'_> {
        self.bundle.rules()
    }

    /// Earliest pending completion: an in-flight action or a plate return.
    pub fn next_event_time(&self) -> Option<Time> {
        let actions = self.in_flight.iter().flatten().map(|f| f.end);
        let returns = self.world.pending_returns.iter().map(|r| r.due);
        // Plate returns alone never unblock anyone.
        let action_min = actions.min()?;
        Some(returns.fold(action_min, Time::min))
    }

    pub fn record(&self) -> RunRecord {
        let (success, oct, failure_reason) = match &self.status {
            Status::Succeeded { oct } => (true, *oct, None),
            Status::Failed { clock, reason } => (false, *clock, Some(reason.clone())),
            Status::Running => (
                false,
                self.world.clock,
                Some("incomplete: run still live".into()),
            ),
        };
        RunRecord {
            success,
            oct,
            per_agent: self
                .world
                .agents
                .iter()
                .map(|a| AgentStats {
                    agent: a.id,
                    distance: a.distance_traveled,
                    work_time: a.work_time,
                })
                .collect(),
            served: self.served.clone(),
            failure_reason,
            events: self.events.clone(),
        }
    }

    fn fail(&mut self, reason: String) {
        self.status = Status::Failed {
            clock: self.world.clock,
            reason,
        };
    }

    /// Moves the clock to `t`, applying cooking, plate returns and action
    /// completions. Returns false if the run ended on the way.
    fn advance_to(&mut self, t: Time) -> bool {
        let t_max = self.bundle.t_max;
        if t > t_max {
            let bundle = Arc::clone(&self.bundle);
            let dt = t_max - self.world.clock;
            bundle.rules().advance_cooking(&mut self.world, dt);
            self.world.clock = t_max;
            self.fail(format!("timeout: orders not served by t_max = {t_max}"));
            return false;
        }
        let bundle = Arc::clone(&self.bundle);
        let rules = bundle.rules();
        let dt = t - self.world.clock;
        rules.advance_cooking(&mut self.world, dt);
        self.world.clock = t;

        let mut due = Vec::new();
        self.world.pending_returns.retain(|r| {
            if r.due <= t {
                due.push(*r);
                false
            } else {
                true
            }
        });
        for r in due {
            self.world.stations[r.station]
                .contents
                .push(Item::dirty_plate());
        }

        for i in 0..self.n_agents() {
            if self.in_flight[i].as_ref().is_some_and(|f| f.end == t) {
                self.complete(i, &rules);
            }
        }
        true
    }

    fn complete(&mut self, i: usize, rules: &Rules<'_>) {
        let flight = self.in_flight[i].take().expect("completing an idle agent");
        let duration = flight.end - flight.start;
        match flight.effect {
            Effect::Move { to, tiles } => {
                let agent = &mut self.world.agents[i];
                agent.position = to;
                agent.distance_traveled += tiles;
                agent.work_time += duration;
            }
            Effect::Interact => self.world.agents[i].work_time += duration,
            Effect::Process { station, op } => {
                rules.complete_process(&mut self.world, i, station, op);
                self.world.stations[station].busy_by = None;
                self.world.agents[i].work_time += duration;
            }
            Effect::Wait => {}
        }
        self.world.agents[i].busy_until = self.world.clock;
        self.events.push(Event {
            clock: self.world.clock,
            agent: AgentId(i),
            action: flight.action,
            outcome: Outcome::Completed,
        });
    }

    /// Validates and starts an action for idle agent `i` at the current
    /// clock. Returns the first event emitted.
    fn start(&mut self, i: usize, action: Action) -> Result<Event, Rejection> {
        let bundle = Arc::clone(&self.bundle);
        let rules = bundle.rules();
        let map = &bundle.map;
        let constants = &bundle.constants;
        let now = self.world.clock;
        let agent_id = AgentId(i);

        if let Action::Finish = action {
            self.finished[i] = true;
            self.queues[i].clear();
            let event = Event {
                clock: now,
                agent: agent_id,
                action,
                outcome: Outcome::Completed,
            };
            self.events.push(event.clone());
            return Ok(event);
        }

        let station_for = |name: &str| -> Result<usize, Rejection> {
            let idx = map
                .station_index(name)
                .ok_or_else(|| Rejection::UnknownStation(name.to_string()))?;
            if map
                .station(idx)
                .pos
                .manhattan(self.world.agents[i].position)
                != 1
            {
                return Err(Rejection::NotAdjacent(name.to_string()));
            }
            Ok(idx)
        };

        let mut served_dish = None;
        let (duration, effect) = match &action {
            Action::MoveTo { target } => {
                if !map.is_floor(*target) {
                    return Err(Rejection::NotFloor(*target));
                }
                let tiles = map
                    .distance(self.world.agents[i].position, *target)
                    .ok_or(Rejection::Unreachable(*target))? as u64;
                (
                    tiles * constants.move_per_tile,
                    Effect::Move { to: *target, tiles },
                )
            }
            Action::Interact { target } => {
                let s = station_for(target)?;
                let transfer = rules.decide_interact(&self.world, i, s)?;
                served_dish = rules.apply_interact(&mut self.world, i, s, transfer);
                (constants.interact, Effect::Interact)
            }
            Action::Process { target } => {
                let s = station_for(target)?;
                let (op, duration) = rules.decide_process(&self.world, i, s)?;
                self.world.stations[s].busy_by = Some(agent_id);
                (duration, Effect::Process { station: s, op })
            }
            Action::Wait { duration } => (*duration, Effect::Wait),
            Action::Finish => unreachable!(),
        };

        let event = Event {
            clock: now,
            agent: agent_id,
            action: action.clone(),
            outcome: Outcome::Started,
        };
        self.events.push(event.clone());
        self.world.agents[i].busy_until = now + duration;
        self.in_flight[i] = Some(InFlight {
            action,
            start: now,
            end: now + duration,
            effect,
        });

        if let Some(dish) = served_dish {
            self.served.push(Served { dish, clock: now });
            if self.world.orders.is_complete() {
                self.status = Status::Succeeded { oct: now };
                return Ok(event);
            }
        }
        if duration == 0 {
            self.complete(i, &rules);
        }
        Ok(event)
    }
}

/// Executes a plan against a bundle from the initial state.
pub fn execute(bundle: &Arc<TaskBundle>, plan: &Plan) -> RunRecord {
    Simulation::new(Arc::clone(bundle)).run_plan(plan)
}
