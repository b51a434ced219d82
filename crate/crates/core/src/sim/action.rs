use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::world::{AgentId, Coord, Time};

/// The five agent actions. Anything else fails to parse.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "action")]
pub enum Action {
    MoveTo { target: Coord },
    Interact { target: String },
    Process { target: String },
    Wait { duration: Time },
    Finish,
}

impl Action {
    pub fn move_to(x: i32, y: i32) -> Action {
        Action::MoveTo {
            target: Coord::new(x, y),
        }
    }

    pub fn interact(target: impl Into<String>) -> Action {
        Action::Interact {
            target: target.into(),
        }
    }

    pub fn process(target: impl Into<String>) -> Action {
        Action::Process {
            target: target.into(),
        }
    }

    pub fn wait(duration: Time) -> Action {
        Action::Wait { duration }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Action::MoveTo { .. } => "MoveTo",
            Action::Interact { .. } => "Interact",
            Action::Process { .. } => "Process",
            Action::Wait { .. } => "Wait",
            Action::Finish => "Finish",
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::MoveTo { target } => write!(f, "MoveTo({target})"),
            Action::Interact { target } => write!(f, "Interact({target})"),
            Action::Process { target } => write!(f, "Process({target})"),
            Action::Wait { duration } => write!(f, "Wait({duration})"),
            Action::Finish => f.write_str("Finish()"),
        }
    }
}

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("plan is not valid JSON for the action schema: {0}")]
    Schema(#[from] serde_json::Error),
    #[error("plan names {agent} but the task has {n_agents} agent(s)")]
    UnknownAgent { agent: AgentId, n_agents: usize },
}

/// Per-agent ordered action lists.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Plan {
    pub per_agent: BTreeMap<AgentId, Vec<Action>>,
}

#[derive(Serialize, Deserialize)]
struct PlanDoc {
    plan: BTreeMap<AgentId, Vec<Action>>,
    #[serde(rename = "CoT", default, skip_serializing_if = "Option::is_none")]
    cot: Option<serde_json::Value>,
}

impl Serialize for Plan {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PlanDoc {
            plan: self.per_agent.clone(),
            cot: None,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Plan {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let doc = PlanDoc::deserialize(d)?;
        Ok(Plan {
            per_agent: doc.plan,
        })
    }
}

impl Plan {
    /// Parses `{"plan": {...}}`. A `"CoT"` key is accepted and ignored.
    pub fn from_json(text: &str) -> Result<Plan, PlanError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_value(value: serde_json::Value) -> Result<Plan, PlanError> {
        Ok(serde_json::from_value(value)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plan serialization cannot fail")
    }

    pub fn actions(&self, agent: AgentId) -> &[Action] {
        self.per_agent.get(&agent).map_or(&[], Vec::as_slice)
    }

    /// Rejects agents beyond the task's agent count. Missing agents simply
    /// have nothing to do.
    pub fn check_agents(&self, n_agents: usize) -> Result<(), PlanError> {
        match self.per_agent.keys().find(|a| a.index() >= n_agents) {
            Some(&agent) => Err(PlanError::UnknownAgent { agent, n_agents }),
            None => Ok(()),
        }
    }

    pub fn push(&mut self, agent: AgentId, action: Action) {
        self.per_agent.entry(agent).or_default().push(action);
    }
}
