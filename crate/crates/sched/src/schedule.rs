use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{AbstractInstance, Graph, InstanceError};

/// Penalty factor charged to invalid plans, as a ratio `NUM / DEN`.
const PENALTY_NUM: u64 = 6;
const PENALTY_DEN: u64 = 5;

/// Assignment and start time per task, aligned with the instance's task
/// list. Agents are numbered from 0.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub assignment: Vec<usize>,
    pub start: Vec<u64>,
    pub makespan: u64,
    #[serde(default)]
    pub optimal: bool,
}

impl Schedule {
    /// Builds a schedule and fills in its makespan.
    pub fn new(graph: &Graph, assignment: Vec<usize>, start: Vec<u64>) -> Schedule {
        let makespan = start
            .iter()
            .zip(&graph.durations)
            .map(|(s, t)| s + t)
            .max()
            .unwrap_or(0);
        Schedule {
            assignment,
            start,
            makespan,
            optimal: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Schedule, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schedule serialization cannot fail")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    /// `v` starts before `u` has finished and its delay has passed.
    Precedence {
        u: usize,
        v: usize,
    },
    /// Two tasks on one agent overlap (or lack the setup gap).
    AgentOverlap {
        a: usize,
        b: usize,
        agent: usize,
    },
    UnknownAgent {
        task: usize,
        agent: usize,
    },
    Makespan {
        stated: u64,
        actual: u64,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Valid,
    Invalid(Violation),
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScheduleError {
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error("schedule covers {found} tasks but the instance has {expected}")]
    UnknownTask { expected: usize, found: usize },
}

/// Checks every schedule constraint, reporting the first violation.
pub fn validate(inst: &AbstractInstance, sched: &Schedule) -> Result<Verdict, ScheduleError> {
    let graph = inst.graph()?;
    validate_graph(&graph, sched)
}

pub fn validate_graph(graph: &Graph, sched: &Schedule) -> Result<Verdict, ScheduleError> {
    let n = graph.n_tasks();
    for found in [sched.assignment.len(), sched.start.len()] {
        if found != n {
            return Err(ScheduleError::UnknownTask { expected: n, found });
        }
    }
    for (task, &agent) in sched.assignment.iter().enumerate() {
        if agent >= graph.agents {
            return Ok(Verdict::Invalid(Violation::UnknownAgent { task, agent }));
        }
    }
    let end = |i: usize| sched.start[i] + graph.durations[i];
    for v in 0..n {
        for &(u, d) in &graph.preds[v] {
            if sched.start[v] < end(u) + d {
                return Ok(Verdict::Invalid(Violation::Precedence { u, v }));
            }
        }
    }
    for agent in 0..graph.agents {
        let mut mine: Vec<usize> = (0..n).filter(|&i| sched.assignment[i] == agent).collect();
        mine.sort_by_key(|&i| (sched.start[i], i));
        for w in mine.windows(2) {
            if sched.start[w[1]] < end(w[0]) + graph.setup {
                return Ok(Verdict::Invalid(Violation::AgentOverlap {
                    a: w[0],
                    b: w[1],
                    agent,
                }));
            }
        }
    }
    let actual = (0..n).map(end).max().unwrap_or(0);
    if actual != sched.makespan {
        return Ok(Verdict::Invalid(Violation::Makespan {
            stated: sched.makespan,
            actual,
        }));
    }
    Ok(Verdict::Valid)
}

/// How a submitted schedule scores against the optimum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanScore {
    pub valid: bool,
    /// `makespan / optimum` for valid plans.
    pub noct: Option<f64>,
    /// Makespan if valid, otherwise the penalty of 1.2 × optimum.
    pub poct: f64,
}

pub fn penalty(optimum: u64) -> f64 {
    (optimum * PENALTY_NUM) as f64 / PENALTY_DEN as f64
}

pub fn score_plan(
    inst: &AbstractInstance,
    sched: &Schedule,
    optimum: u64,
) -> Result<PlanScore, ScheduleError> {
    let verdict = validate(inst, sched)?;
    Ok(if verdict.is_valid() {
        PlanScore {
            valid: true,
            noct: Some(sched.makespan as f64 / optimum as f64),
            poct: sched.makespan as f64,
        }
    } else {
        PlanScore {
            valid: false,
            noct: None,
            poct: penalty(optimum),
        }
    })
}
