//! DAG scheduling with per-edge delays: instances, schedule checking and
//! scoring, an exact makespan solver and a seeded instance generator.

mod generate;
mod instance;
mod schedule;
mod solver;

pub use generate::{generate_instance, Profile, ProfileError};
pub use instance::{AbstractInstance, Edge, Graph, InstanceError, Task, TaskKey};
pub use schedule::{
    penalty, score_plan, validate, validate_graph, PlanScore, Schedule, ScheduleError, Verdict,
    Violation,
};
pub use solver::{
    list_schedule, optimal_makespan, optimal_makespan_within, solve_graph, Solution, SolveError,
};
