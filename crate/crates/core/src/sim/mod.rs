//! Discrete-event executor for kitchen plans.

mod action;
mod engine;
mod legal;
mod record;
pub(crate) mod rules;

pub use action::{Action, Plan, PlanError};
pub use engine::{execute, SimError, Simulation, Status};
pub use legal::LegalActions;
pub use record::{AgentStats, Event, Outcome, Rejection, RunRecord, Served};
