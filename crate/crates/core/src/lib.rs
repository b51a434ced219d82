//! Kitchen-grid planning benchmark: world model, deterministic executor,
//! task generator, scripted reference solver and scoring.

pub mod metrics;
pub mod sim;
pub mod taskgen;
pub mod world;

pub use sim::{execute, Action, Event, Outcome, Plan, RunRecord, Simulation};
pub use taskgen::{assemble_bundle, recipe_catalog, Recipe, TaskBundle};
pub use world::{AgentId, Coord, GridMap, Time, TimeConstants, WorldState};
