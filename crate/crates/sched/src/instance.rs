use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Task identifier as written in instance files: a string or an integer.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TaskKey {
    Int(u64),
    Str(String),
}

impl fmt::Display for TaskKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TaskKey::Int(n) => write!(f, "{n}"),
            TaskKey::Str(s) => f.write_str(s),
        }
    }
}

impl From<u64> for TaskKey {
    fn from(n: u64) -> Self {
        TaskKey::Int(n)
    }
}

impl From<&str> for TaskKey {
    fn from(s: &str) -> Self {
        TaskKey::Str(s.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Task {
    pub id: TaskKey,
    pub t: u64,
}

/// Dependency `u → v`: `v` may start `d` time units after `u` ends.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub u: TaskKey,
    pub v: TaskKey,
    #[serde(default)]
    pub d: u64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InstanceError {
    #[error("duplicate task id `{0}`")]
    DuplicateTask(TaskKey),
    #[error("edge references unknown task `{0}`")]
    UnknownTask(TaskKey),
    #[error("task `{0}` has zero duration")]
    ZeroDuration(TaskKey),
    #[error("instance needs at least one agent")]
    NoAgents,
    #[error("dependency graph has a cycle")]
    Cycle,
}

/// A DAG scheduling problem. `setup` is an idle gap an agent needs
/// between two consecutive tasks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbstractInstance {
    pub tasks: Vec<Task>,
    pub edges: Vec<Edge>,
    pub agents: usize,
    #[serde(default)]
    pub setup: u64,
}

/// Index-based view of a validated instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    pub durations: Vec<u64>,
    /// `(predecessor, delay)` per task.
    pub preds: Vec<Vec<(usize, u64)>>,
    /// `(successor, delay)` per task.
    pub succs: Vec<Vec<(usize, u64)>>,
    pub topo: Vec<usize>,
    pub agents: usize,
    pub setup: u64,
}

impl AbstractInstance {
    /// Builds an instance from index-based data; task `i` gets id `i`.
    pub fn from_parts(durations: &[u64], edges: &[(usize, usize, u64)], agents: usize) -> Self {
        AbstractInstance {
            tasks: durations
                .iter()
                .enumerate()
                .map(|(i, &t)| Task {
                    id: TaskKey::Int(i as u64),
                    t,
                })
                .collect(),
            edges: edges
                .iter()
                .map(|&(u, v, d)| Edge {
                    u: TaskKey::Int(u as u64),
                    v: TaskKey::Int(v as u64),
                    d,
                })
                .collect(),
            agents,
            setup: 0,
        }
    }

    pub fn n_tasks(&self) -> usize {
        self.tasks.len()
    }

    pub fn index_of(&self, key: &TaskKey) -> Option<usize> {
        self.tasks.iter().position(|t| &t.id == key)
    }

    pub fn graph(&self) -> Result<Graph, InstanceError> {
        if self.agents == 0 {
            return Err(InstanceError::NoAgents);
        }
        let mut index = HashMap::new();
        for (i, task) in self.tasks.iter().enumerate() {
            if task.t == 0 {
                return Err(InstanceError::ZeroDuration(task.id.clone()));
            }
            if index.insert(&task.id, i).is_some() {
                return Err(InstanceError::DuplicateTask(task.id.clone()));
            }
        }
        let n = self.tasks.len();
        let mut preds = vec![Vec::new(); n];
        let mut succs = vec![Vec::new(); n];
        for e in &self.edges {
            let lookup = |k: &TaskKey| {
                index
                    .get(k)
                    .copied()
                    .ok_or_else(|| InstanceError::UnknownTask(k.clone()))
            };
            let (u, v) = (lookup(&e.u)?, lookup(&e.v)?);
            preds[v].push((u, e.d));
            succs[u].push((v, e.d));
        }
        let topo = topological_order(&preds, &succs).ok_or(InstanceError::Cycle)?;
        Ok(Graph {
            durations: self.tasks.iter().map(|t| t.t).collect(),
            preds,
            succs,
            topo,
            agents: self.agents,
            setup: self.setup,
        })
    }

    pub fn from_json(text: &str) -> Result<AbstractInstance, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serialization cannot fail")
    }
}

/// Kahn's algorithm, smallest ready index first.
fn topological_order(
    preds: &[Vec<(usize, u64)>],
    succs: &[Vec<(usize, u64)>],
) -> Option<Vec<usize>> {
    let n = preds.len();
    let mut indegree: Vec<usize> = preds.iter().map(Vec::len).collect();
    let mut ready: std::collections::BTreeSet<usize> =
        (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(u) = ready.pop_first() {
        order.push(u);
        for &(v, _) in &succs[u] {
            indegree[v] -= 1;
            if indegree[v] == 0 {
                ready.insert(v);
            }
        }
    }
    (order.len() == n).then_some(order)
}

impl Graph {
    pub fn n_tasks(&self) -> usize {
        self.durations.len()
    }

    /// Longest duration-plus-delay path starting at each task, the task's
    /// own duration included.
    pub fn tails(&self) -> Vec<u64> {
        let mut tail = vec![0; self.n_tasks()];
        for &u in self.topo.iter().rev() {
            let after = self.succs[u]
                .iter()
                .map(|&(v, d)| d + tail[v])
                .max()
                .unwrap_or(0);
            tail[u] = self.durations[u] + after;
        }
        tail
    }

    /// Length of the longest chain, a lower bound on any makespan.
    pub fn critical_path(&self) -> u64 {
        self.tails().into_iter().max().unwrap_or(0)
    }

    /// Makespan bound of one agent running everything in topological
    /// order: durations, setups, and each task's longest incoming delay.
    pub fn serial_sum(&self) -> u64 {
        let n = self.n_tasks() as u64;
        let waits: u64 = self
            .preds
            .iter()
            .map(|p| p.iter().map(|&(_, d)| d).max().unwrap_or(0))
            .sum();
        self.durations.iter().sum::<u64>() + self.setup * n.saturating_sub(1) + waits
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_may_be_strings_or_integers() {
        let text = r#"{"tasks": [{"id": "a", "t": 2}, {"id": 7, "t": 3}],
                       "edges": [{"u": "a", "v": 7, "d": 1}], "agents": 2}"#;
        let inst = AbstractInstance::from_json(text).unwrap();
        assert_eq!(inst.tasks[1].id, TaskKey::Int(7));
        let g = inst.graph().unwrap();
        assert_eq!(g.preds[1], vec![(0, 1)]);
        assert_eq!(inst.setup, 0);
        assert_eq!(g.critical_path(), 6);
    }

    #[test]
    fn structural_errors() {
        let mut inst = AbstractInstance::from_parts(&[1, 1], &[(0, 1, 0), (1, 0, 0)], 1);
        assert_eq!(inst.graph(), Err(InstanceError::Cycle));
        inst.edges.clear();
        inst.tasks[1].id = TaskKey::Int(0);
        assert_eq!(
            inst.graph(),
            Err(InstanceError::DuplicateTask(TaskKey::Int(0)))
        );
        let zero = AbstractInstance::from_parts(&[0], &[], 1);
        assert!(matches!(zero.graph(), Err(InstanceError::ZeroDuration(_))));
        let none = AbstractInstance::from_parts(&[1], &[], 0);
        assert_eq!(none.graph(), Err(InstanceError::NoAgents));
        let mut dangling = AbstractInstance::from_parts(&[1], &[], 1);
        dangling.edges.push(Edge {
            u: "x".into(),
            v: 0.into(),
            d: 0,
        });
        assert_eq!(
            dangling.graph(),
            Err(InstanceError::UnknownTask("x".into()))
        );
    }

    #[test]
    fn bounds_of_a_diamond() {
        let inst = AbstractInstance::from_parts(
            &[2, 3, 5, 1],
            &[(0, 1, 0), (0, 2, 4), (1, 3, 0), (2, 3, 0)],
            2,
        );
        let g = inst.graph().unwrap();
        assert_eq!(g.tails(), vec![12, 4, 6, 1]);
        assert_eq!(g.critical_path(), 12);
        assert_eq!(g.serial_sum(), 15);
    }
}
