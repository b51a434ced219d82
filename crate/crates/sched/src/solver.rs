//! Exact makespan minimisation by depth-first branch and bound.
//!
//! Tasks are appended one at a time in nondecreasing `(start, index)`
//! order, each at its earliest feasible start on the chosen agent. Every
//! left-justified schedule is produced this way, so the search is exact.
//! Pruning uses a head+tail critical-path bound, a workload bound, agent
//! symmetry (agents in identical states are interchangeable) and a memo of
//! states already reached with a smaller or equal partial makespan.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::instance::{AbstractInstance, Graph, InstanceError};
use crate::schedule::Schedule;

const MAX_TASKS: usize = 64;
const MEMO_LIMIT: usize = 1 << 21;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SolveError {
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error("exact search supports at most {MAX_TASKS} tasks, got {0}")]
    TooLarge(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    pub schedule: Schedule,
    pub makespan: u64,
    /// False when the time budget ran out before optimality was proven.
    pub optimal: bool,
    pub nodes: u64,
}

/// Greedy list scheduling: repeatedly start the ready task that can begin
/// earliest (longest tail first on ties) on the agent that frees first.
pub fn list_schedule(g: &Graph) -> Schedule {
    let n = g.n_tasks();
    let tails = g.tails();
    let mut start = vec![0; n];
    let mut assignment = vec![0; n];
    let mut done = vec![false; n];
    let mut free: Vec<Option<u64>> = vec![None; g.agents];
    for _ in 0..n {
        let mut best: Option<(u64, std::cmp::Reverse<u64>, usize, usize)> = None;
        for v in (0..n).filter(|&v| !done[v]) {
            if g.preds[v].iter().any(|&(u, _)| !done[u]) {
                continue;
            }
            let ready = g.preds[v]
                .iter()
                .map(|&(u, d)| start[u] + g.durations[u] + d)
                .max()
                .unwrap_or(0);
            for (k, f) in free.iter().enumerate() {
                let s = ready.max(f.map_or(0, |f| f + g.setup));
                let key = (s, std::cmp::Reverse(tails[v]), v, k);
                if best.is_none_or(|b| key < b) {
                    best = Some(key);
                }
            }
        }
        let (s, _, v, k) = best.expect("acyclic graph always has a ready task");
        start[v] = s;
        assignment[v] = k;
        done[v] = true;
        free[k] = Some(s + g.durations[v]);
    }
    Schedule::new(g, assignment, start)
}

/// Proves the optimum, however long it takes.
pub fn optimal_makespan(inst: &AbstractInstance) -> Result<Solution, SolveError> {
    optimal_makespan_within(inst, None)
}

/// Exact search with an optional wall-clock budget. When the budget runs
/// out the best schedule found so far is returned with `optimal = false`.
pub fn optimal_makespan_within(
    inst: &AbstractInstance,
    budget: Option<Duration>,
) -> Result<Solution, SolveError> {
    let g = inst.graph()?;
    solve_graph(&g, budget)
}

pub fn solve_graph(g: &Graph, budget: Option<Duration>) -> Result<Solution, SolveError> {
    let n = g.n_tasks();
    if n > MAX_TASKS {
        return Err(SolveError::TooLarge(n));
    }
    let seed = list_schedule(g);
    let mut search = Search {
        g,
        tails: g.tails(),
        all: if n == 64 { u64::MAX } else { (1u64 << n) - 1 },
        mask: 0,
        start: vec![0; n],
        assign: vec![0; n],
        free: vec![None; g.agents],
        last: None,
        makespan: 0,
        remaining: g.durations.iter().sum(),
        best: seed.makespan,
        best_start: seed.start.clone(),
        best_assign: seed.assignment.clone(),
        memo: HashMap::new(),
        deadline: budget.map(|b| Instant::now() + b),
        nodes: 0,
        timed_out: false,
    };
    if n > 0 && search.best > g.critical_path() {
        search.dfs();
    }
    let mut schedule = Schedule::new(g, search.best_assign, search.best_start);
    schedule.optimal = !search.timed_out;
    Ok(Solution {
        makespan: schedule.makespan,
        optimal: schedule.optimal,
        schedule,
        nodes: search.nodes,
    })
}

struct Search<'g> {
    g: &'g Graph,
    tails: Vec<u64>,
    all: u64,
    mask: u64,
    start: Vec<u64>,
    assign: Vec<usize>,
    /// End of the last task per agent, `None` while the agent is unused.
    free: Vec<Option<u64>>,
    last: Option<(u64, usize)>,
    makespan: u64,
    remaining: u64,
    best: u64,
    best_start: Vec<u64>,
    best_assign: Vec<usize>,
    memo: HashMap<Vec<u64>, u64>,
    deadline: Option<Instant>,
    nodes: u64,
    timed_out: bool,
}

impl Search<'_> {
    fn done(&self, v: usize) -> bool {
        self.mask & (1 << v) != 0
    }

    fn end(&self, v: usize) -> u64 {
        self.start[v] + self.g.durations[v]
    }

    fn ready(&self, k: usize) -> u64 {
        self.free[k].map_or(0, |f| f + self.g.setup)
    }

    fn pred_ready(&self, v: usize) -> Option<u64> {
        let mut t = 0;
        for &(u, d) in &self.g.preds[v] {
            if !self.done(u) {
                return None;
            }
            t = t.max(self.end(u) + d);
        }
        Some(t)
    }

    fn lower_bound(&self) -> u64 {
        let g = self.g;
        let floor = self.last.map_or(0, |(s, _)| s);
        let min_ready = (0..g.agents).map(|k| self.ready(k)).min().unwrap_or(0);
        let mut head = vec![0u64; g.n_tasks()];
        let mut bound = self.makespan;
        for &v in &g.topo {
            if self.done(v) {
                continue;
            }
            let mut est = floor.max(min_ready);
            for &(u, d) in &g.preds[v] {
                let pred_end = if self.done(u) {
                    self.end(u)
                } else {
                    head[u] + g.durations[u]
                };
                est = est.max(pred_end + d);
            }
            head[v] = est;
            bound = bound.max(est + self.tails[v]);
        }
        let m = g.agents as u64;
        let load: u64 = self.free.iter().map(|f| f.unwrap_or(0)).sum::<u64>() + self.remaining;
        bound.max(load.div_ceil(m))
    }

    /// Everything that determines the rest of the search from here.
    fn state_key(&self) -> Vec<u64> {
        let g = self.g;
        let mut key = vec![self.mask];
        let (ls, lv) = self.last.map_or((0, u64::MAX), |(s, v)| (s, v as u64));
        key.extend([ls, lv]);
        let mut agents: Vec<u64> = self
            .free
            .iter()
            .map(|f| f.map_or(u64::MAX, |f| f))
            .collect();
        agents.sort_unstable();
        key.extend(agents);
        for v in 0..g.n_tasks() {
            if self.done(v) && g.succs[v].iter().any(|&(w, _)| !self.done(w)) {
                key.push(self.end(v));
            }
        }
        key
    }

    fn out_of_time(&mut self) -> bool {
        if self.timed_out {
            return true;
        }
        if self.nodes.is_multiple_of(1024) {
            if let Some(deadline) = self.deadline {
                if Instant::now() >= deadline {
                    self.timed_out = true;
                }
            }
        }
        self.timed_out
    }

    fn dfs(&mut self) {
        if self.mask == self.all {
            if self.makespan < self.best {
                self.best = self.makespan;
                self.best_start = self.start.clone();
                self.best_assign = self.assign.clone();
            }
            return;
        }
        self.nodes += 1;
        if self.out_of_time() || self.lower_bound() >= self.best {
            return;
        }
        let key = self.state_key();
        match self.memo.get(&key) {
            Some(&seen) if seen <= self.makespan => return,
            _ => {
                if self.memo.len() < MEMO_LIMIT {
                    self.memo.insert(key, self.makespan);
                }
            }
        }

        let g = self.g;
        let mut moves: Vec<(u64, std::cmp::Reverse<u64>, usize, usize)> = Vec::new();
        for v in 0..g.n_tasks() {
            if self.done(v) {
                continue;
            }
            let Some(pr) = self.pred_ready(v) else {
                continue;
            };
            for k in 0..g.agents {
                if (0..k).any(|j| self.free[j] == self.free[k]) {
                    continue;
                }
                let s = pr.max(self.ready(k));
                if self.last.is_some_and(|last| (s, v) <= last) {
                    continue;
                }
                moves.push((s, std::cmp::Reverse(self.tails[v]), v, k));
            }
        }
        moves.sort_unstable();

        for (s, _, v, k) in moves {
            if s + self.tails[v] >= self.best {
                continue;
            }
            let saved = (self.free[k], self.last, self.makespan);
            self.mask |= 1 << v;
            self.start[v] = s;
            self.assign[v] = k;
            self.free[k] = Some(s + g.durations[v]);
            self.last = Some((s, v));
            self.makespan = self.makespan.max(s + g.durations[v]);
            self.remaining -= g.durations[v];

            self.dfs();

            self.mask &= !(1 << v);
            self.remaining += g.durations[v];
            (self.free[k], self.last, self.makespan) = saved;
            if self.timed_out {
                return;
            }
        }
    }
}
