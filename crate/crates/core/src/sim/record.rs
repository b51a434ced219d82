use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::action::Action;
use crate::world::{AgentId, Coord, Time};

/// Why an action was refused. The `Display` form starts with a stable,
/// kebab-case code followed by a human-readable detail.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Rejection {
    #[error("unknown-station: no station named `{0}`")]
    UnknownStation(String),
    #[error("not-adjacent: `{0}` is not next to the agent")]
    NotAdjacent(String),
    #[error("illegal-move: {0} is not a floor cell")]
    NotFloor(Coord),
    #[error("unreachable: no floor path to {0}")]
    Unreachable(Coord),
    #[error("station-busy: `{0}` is in use")]
    StationBusy(String),
    #[error("hands-full: agent already holds {0}")]
    HandsFull(String),
    #[error("illegal-interact: {0}")]
    IllegalInteract(String),
    #[error("illegal-process: {0}")]
    IllegalProcess(String),
    #[error("serve-out-of-order: `{dish}` is not the next order (expected `{expected}`)")]
    OutOfOrder { dish: String, expected: String },
    #[error("wrong-dish: plate does not match `{expected}`")]
    WrongDish { expected: String },
    #[error("agent-busy: {0} is still executing an action")]
    AgentBusy(AgentId),
    #[error("agent-finished: {0} already declared Finish")]
    AgentFinished(AgentId),
}

impl Rejection {
    pub fn code(&self) -> &'static str {
        match self {
            Rejection::UnknownStation(_) => "unknown-station",
            Rejection::NotAdjacent(_) => "not-adjacent",
            Rejection::NotFloor(_) => "illegal-move",
            Rejection::Unreachable(_) => "unreachable",
            Rejection::StationBusy(_) => "station-busy",
            Rejection::HandsFull(_) => "hands-full",
            Rejection::IllegalInteract(_) => "illegal-interact",
            Rejection::IllegalProcess(_) => "illegal-process",
            Rejection::OutOfOrder { .. } => "serve-out-of-order",
            Rejection::WrongDish { .. } => "wrong-dish",
            Rejection::AgentBusy(_) => "agent-busy",
            Rejection::AgentFinished(_) => "agent-finished",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    Started,
    Completed,
    Rejected { reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub clock: Time,
    pub agent: AgentId,
    pub action: Action,
    pub outcome: Outcome,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentStats {
    pub agent: AgentId,
    pub distance: u64,
    pub work_time: Time,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Served {
    pub dish: String,
    pub clock: Time,
}

/// Outcome of one execution. `oct` is the completion time on success and
/// the clock at which the run stopped otherwise.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunRecord {
    pub success: bool,
    pub oct: Time,
    pub per_agent: Vec<AgentStats>,
    pub served: Vec<Served>,
    pub failure_reason: Option<String>,
    pub events: Vec<Event>,
}

impl RunRecord {
    /// A run that never started, e.g. because the plan did not parse.
    pub fn failed_before_start(n_agents: usize, reason: impl Into<String>) -> RunRecord {
        RunRecord {
            success: false,
            oct: 0,
            per_agent: (0..n_agents)
                .map(|i| AgentStats {
                    agent: AgentId(i),
                    distance: 0,
                    work_time: 0,
                })
                .collect(),
            served: Vec::new(),
            failure_reason: Some(reason.into()),
            events: Vec::new(),
        }
    }

    /// Stable code of the failure reason (`timeout`, `illegal-process`, ...).
    pub fn failure_code(&self) -> Option<&str> {
        self.failure_reason
            .as_deref()
            .map(|r| r.split(':').next().unwrap_or(r))
    }

    pub fn mean_distance(&self) -> f64 {
        if self.per_agent.is_empty() {
            return 0.0;
        }
        self.per_agent
            .iter()
            .map(|a| a.distance as f64)
            .sum::<f64>()
            / self.per_agent.len() as f64
    }
}
