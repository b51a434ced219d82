//! Scripted reference solver. It drives the simulator interactively with a
//! central controller: dishes are dealt round-robin to workers, and each
//! worker walks its dish through plate → cook → plain components → collect
//! → serve, reserving stations so workers never fight over them.

use std::collections::VecDeque;
use std::sync::Arc;

use thiserror::Error;

use super::bundle::TaskBundle;
use super::recipes::{Component, Recipe};
use crate::sim::{execute, Action, Outcome, Plan, RunRecord, Simulation};
use crate::world::{AgentId, Coord, Item, StationKind, Time};

/// Give up when no worker has done anything but wait for this long.
const STALL_LIMIT: Time = 2_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SolveError {
    #[error("solver needs between 1 and {0} workers")]
    Workers(usize),
    #[error("solver stalled at t = {0}")]
    Stalled(Time),
    #[error("engine rejected a scripted action: {0}")]
    Rejected(String),
    #[error("scripted run failed: {0}")]
    Failed(String),
    #[error("batch replay of the scripted plan failed: {0}")]
    Replay(String),
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub plan: Plan,
    /// Record of replaying `plan` through the batch executor.
    pub record: RunRecord,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Step {
    GoTo(usize),
    /// Issued once legal; the worker waits until then.
    Act(Action),
    AwaitCooked(usize),
    AwaitTurn(usize),
    Release(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum PlateStage {
    Need,
    Held,
    Placed(usize),
}

#[derive(Clone, Debug)]
struct Job {
    dish: usize,
    plate: PlateStage,
    cook_todo: Vec<Component>,
    plain_todo: Vec<Component>,
    /// Stove reserved for each entry of `cook_todo`, empty until reserved.
    stove_for: Vec<usize>,
    cooking: Vec<usize>,
}

#[derive(Clone, Debug)]
struct Worker {
    agent: usize,
    dishes: VecDeque<usize>,
    job: Option<Job>,
    steps: VecDeque<Step>,
}

enum Planned {
    Steps,
    Blocked,
    Done,
}

struct Controller {
    bundle: Arc<TaskBundle>,
    sim: Simulation,
    workers: Vec<Worker>,
    reserved: Vec<Option<usize>>,
    has_plate: Vec<bool>,
}

/// Solves `bundle` with the first `workers` agents; the rest finish at once.
pub fn solve(bundle: &Arc<TaskBundle>, workers: usize) -> Result<Solution, SolveError> {
    let n_agents = bundle.n_agents;
    if workers == 0 || workers > n_agents {
        return Err(SolveError::Workers(n_agents));
    }
    let n_dishes = bundle.orders.len();
    let mut ctl = Controller {
        bundle: Arc::clone(bundle),
        sim: Simulation::new(Arc::clone(bundle)),
        workers: (0..workers)
            .map(|w| Worker {
                agent: w,
                dishes: (w..n_dishes).step_by(workers).collect(),
                job: None,
                steps: VecDeque::new(),
            })
            .collect(),
        reserved: vec![None; bundle.map.stations().len()],
        has_plate: vec![false; n_dishes],
    };
    let mut plan = Plan::default();
    for a in workers..n_agents {
        ctl.submit(a, Action::Finish, &mut plan)?;
    }
    let mut last_work = 0;
    while ctl.sim.is_running() {
        let Some(agent) = ctl.sim.idle_agents().first().map(|a| a.index()) else {
            break;
        };
        let action = ctl.decide(agent);
        if !matches!(action, Action::Wait { .. }) {
            last_work = ctl.sim.clock();
        } else if ctl.sim.clock() - last_work > STALL_LIMIT {
            return Err(SolveError::Stalled(ctl.sim.clock()));
        }
        ctl.submit(agent, action, &mut plan)?;
    }
    let live = ctl.sim.record();
    if !live.success {
        return Err(SolveError::Failed(live.failure_reason.unwrap_or_default()));
    }
    let plan = merge_waits(plan);
    let record = execute(bundle, &plan);
    if !record.success || record.oct != live.oct {
        return Err(SolveError::Replay(
            record
                .failure_reason
                .unwrap_or_else(|| format!("oct {} != {}", record.oct, live.oct)),
        ));
    }
    Ok(Solution { plan, record })
}

/// Collapses runs of consecutive `Wait`s, which replay identically.
fn merge_waits(plan: Plan) -> Plan {
    let mut out = Plan::default();
    for (agent, actions) in plan.per_agent {
        let list = out.per_agent.entry(agent).or_default();
        for action in actions {
            match (list.last_mut(), &action) {
                (Some(Action::Wait { duration: acc }), Action::Wait { duration }) => {
                    *acc += duration
                }
                _ => list.push(action),
            }
        }
    }
    out
}

impl Controller {
    fn submit(&mut self, agent: usize, action: Action, plan: &mut Plan) -> Result<(), SolveError> {
        let event = self
            .sim
            .submit(AgentId(agent), action.clone())
            .map_err(|e| SolveError::Failed(e.to_string()))?;
        if let Outcome::Rejected { reason } = event.outcome {
            return Err(SolveError::Rejected(format!(
                "{} {action}: {reason}",
                event.agent
            )));
        }
        plan.push(AgentId(agent), action);
        Ok(())
    }

    fn position(&self, agent: usize) -> Coord {
        self.sim.state().agents[agent].position
    }

    fn decide(&mut self, agent: usize) -> Action {
        let w = agent;
        loop {
            if let Some(step) = self.workers[w].steps.front().cloned() {
                match step {
                    Step::GoTo(s) => {
                        let pos = self.position(agent);
                        if self.bundle.map.station(s).pos.manhattan(pos) == 1 {
                            self.workers[w].steps.pop_front();
                            continue;
                        }
                        return Action::MoveTo {
                            target: self.access_cell(pos, s),
                        };
                    }
                    Step::Act(action) => {
                        if self.is_legal(agent, &action) {
                            self.workers[w].steps.pop_front();
                            return action;
                        }
                        return Action::wait(1);
                    }
                    Step::AwaitCooked(s) => {
                        let done = matches!(
                            self.sim.state().stations[s].top(),
                            Some(Item::Cookware(c)) if c.has_cooked_food()
                        );
                        if done {
                            self.workers[w].steps.pop_front();
                            continue;
                        }
                        return Action::wait(1);
                    }
                    Step::AwaitTurn(d) => {
                        if self.sim.state().orders.next_index == d {
                            self.workers[w].steps.pop_front();
                            continue;
                        }
                        return Action::wait(1);
                    }
                    Step::Release(s) => {
                        self.reserved[s] = None;
                        self.workers[w].steps.pop_front();
                        continue;
                    }
                }
            }
            match self.plan_next(w) {
                Planned::Steps => continue,
                Planned::Blocked => return Action::wait(1),
                Planned::Done => return Action::Finish,
            }
        }
    }

    fn is_legal(&self, agent: usize, action: &Action) -> bool {
        let Ok(legal) = self.sim.legal_actions(AgentId(agent)) else {
            return false;
        };
        match action {
            Action::Interact { target } => legal.interact.contains(target),
            Action::Process { target } => legal.process.contains(target),
            _ => true,
        }
    }

    /// Nearest floor cell next to station `s`.
    fn access_cell(&self, from: Coord, s: usize) -> Coord {
        let map = &self.bundle.map;
        let dist = map.distances_from(from);
        map.access_cells(s)
            .into_iter()
            .filter_map(|c| dist[map.idx(c)].map(|d| (d, c)))
            .min_by_key(|&(d, _)| d)
            .map(|(_, c)| c)
            .expect("validated maps keep every station reachable")
    }

    fn distance(&self, from: Coord, s: usize) -> u32 {
        let map = &self.bundle.map;
        let dist = map.distances_from(from);
        map.access_cells(s)
            .into_iter()
            .filter_map(|c| dist[map.idx(c)])
            .min()
            .unwrap_or(u32::MAX)
    }

    fn nearest(&self, from: Coord, candidates: impl Iterator<Item = usize>) -> Option<usize> {
        candidates.min_by_key(|&s| (self.distance(from, s), s))
    }

    fn free(&self, s: usize) -> bool {
        self.reserved[s].is_none() && self.sim.state().stations[s].busy_by.is_none()
    }

    fn stations_of<'a>(&'a self, kind: &'a StationKind) -> impl Iterator<Item = usize> + 'a {
        self.bundle
            .map
            .stations()
            .iter()
            .enumerate()
            .filter(move |(_, st)| &st.kind == kind)
            .map(|(i, _)| i)
    }

    fn recipe(&self, dish: usize) -> &Recipe {
        self.bundle
            .recipe(&self.bundle.orders[dish])
            .expect("validated bundle has every ordered recipe")
    }

    fn plate_turn(&self, dish: usize) -> bool {
        let served = self.sim.state().orders.next_index;
        (served..dish).all(|e| self.has_plate[e])
    }

    fn plan_next(&mut self, w: usize) -> Planned {
        if self.workers[w].job.is_none() {
            let Some(dish) = self.workers[w].dishes.pop_front() else {
                return Planned::Done;
            };
            let recipe = self.recipe(dish);
            let ct = &self.bundle.constants;
            let mut cook_todo: Vec<Component> = recipe
                .components
                .iter()
                .filter(|c| c.cook.is_some())
                .cloned()
                .collect();
            cook_todo.sort_by_key(|c| std::cmp::Reverse(ct.cook_time(c.cook.unwrap())));
            let plain_todo = recipe
                .components
                .iter()
                .filter(|c| c.cook.is_none())
                .cloned()
                .collect();
            self.workers[w].job = Some(Job {
                dish,
                plate: PlateStage::Need,
                cook_todo,
                plain_todo,
                stove_for: Vec::new(),
                cooking: Vec::new(),
            });
        }
        let job = self.workers[w].job.clone().expect("job set above");
        match job.plate {
            PlateStage::Need => self.plan_plate(w, job.dish),
            PlateStage::Held => self.plan_assembly(w, &job),
            PlateStage::Placed(asm) => self.plan_components(w, job, asm),
        }
    }

    fn plan_plate(&mut self, w: usize, dish: usize) -> Planned {
        if !self.plate_turn(dish) {
            return Planned::Blocked;
        }
        let pos = self.position(self.workers[w].agent);
        let world = self.sim.state();
        let clean_stack = |s: usize| -> usize {
            world.stations[s]
                .contents
                .iter()
                .filter(|i| matches!(i, Item::Plate(p) if p.is_clean_empty()))
                .count()
        };
        let counters: Vec<usize> = self
            .stations_of(&StationKind::Counter)
            .filter(|&s| self.free(s))
            .collect();
        let single = self.nearest(
            pos,
            counters
                .iter()
                .copied()
                .filter(|&s| world.stations[s].contents.len() == 1 && clean_stack(s) == 1),
        );
        let steps = &mut Vec::new();
        let stage;
        if let Some(s) = single {
            self.reserved[s] = Some(w);
            stage = PlateStage::Placed(s);
        } else if let Some(s) = self.nearest(
            pos,
            counters.iter().copied().filter(|&s| {
                let n = world.stations[s].contents.len();
                n >= 2 && clean_stack(s) == n
            }),
        ) {
            self.reserved[s] = Some(w);
            steps.extend([
                Step::GoTo(s),
                Step::Act(Action::interact(&world.stations[s].name)),
                Step::Release(s),
            ]);
            stage = PlateStage::Held;
        } else if let Some(r) = self.nearest(
            pos,
            self.stations_of(&StationKind::DirtyPlateReturn)
                .filter(|&s| self.free(s) && !world.stations[s].contents.is_empty()),
        ) {
            let at = self.bundle.map.station(r).pos;
            let sink = self
                .nearest(at, self.stations_of(&StationKind::Sink))
                .expect("bundles always have a sink");
            self.reserved[r] = Some(w);
            steps.extend([
                Step::GoTo(r),
                Step::Act(Action::interact(&world.stations[r].name)),
                Step::Release(r),
                Step::GoTo(sink),
                Step::Act(Action::process(&world.stations[sink].name)),
            ]);
            stage = PlateStage::Held;
        } else {
            return Planned::Blocked;
        }
        self.has_plate[dish] = true;
        let steps = std::mem::take(steps);
        let worker = &mut self.workers[w];
        worker.steps.extend(steps);
        worker.job.as_mut().unwrap().plate = stage;
        Planned::Steps
    }

    fn plan_assembly(&mut self, w: usize, job: &Job) -> Planned {
        let pos = self.position(self.workers[w].agent);
        let world = self.sim.state();
        let empty_free = |s: usize| self.free(s) && world.stations[s].contents.is_empty();
        let mut target = self.nearest(
            pos,
            self.stations_of(&StationKind::Counter)
                .filter(|&s| empty_free(s)),
        );
        if target.is_none() {
            let boards: Vec<usize> = self
                .stations_of(&StationKind::CuttingBoard)
                .filter(|&s| empty_free(s))
                .collect();
            let chops = job.cook_todo.iter().chain(&job.plain_todo).any(|c| c.chop);
            if boards.len() >= 2 || (!chops && !boards.is_empty()) {
                target = self.nearest(pos, boards.into_iter());
            }
        }
        let Some(s) = target else {
            return Planned::Blocked;
        };
        self.reserved[s] = Some(w);
        let name = world.stations[s].name.clone();
        let worker = &mut self.workers[w];
        worker
            .steps
            .extend([Step::GoTo(s), Step::Act(Action::interact(name))]);
        worker.job.as_mut().unwrap().plate = PlateStage::Placed(s);
        Planned::Steps
    }

    /// Reserves one stove per cook component, all or nothing.
    fn reserve_stoves(&mut self, w: usize, job: &mut Job) -> bool {
        let world = self.sim.state();
        let mut picked: Vec<usize> = Vec::new();
        for comp in &job.cook_todo {
            let kind = comp.cook.unwrap();
            let found = self.stations_of(&StationKind::Stove).find(|&s| {
                !picked.contains(&s)
                    && self.free(s)
                    && matches!(
                        world.stations[s].contents.as_slice(),
                        [Item::Cookware(c)] if c.kind == kind && c.contents.is_none()
                    )
            });
            match found {
                Some(s) => picked.push(s),
                None => return false,
            }
        }
        for &s in &picked {
            self.reserved[s] = Some(w);
        }
        job.stove_for = picked;
        true
    }

    fn free_board(&self, pos: Coord) -> Option<usize> {
        let world = self.sim.state();
        self.nearest(
            pos,
            self.stations_of(&StationKind::CuttingBoard)
                .filter(|&s| self.free(s) && world.stations[s].contents.is_empty()),
        )
    }

    /// Steps that fetch `comp` from a dispenser and chop it if needed,
    /// ending with the food in hand. `None` if no board is free.
    fn fetch(&mut self, w: usize, comp: &Component) -> Option<Vec<Step>> {
        let pos = self.position(self.workers[w].agent);
        let disp_kind = StationKind::Dispenser(comp.ingredient.clone());
        let disp = self
            .nearest(pos, self.stations_of(&disp_kind))
            .expect("validated bundle has every dispenser");
        let name = |s: usize| self.bundle.map.station(s).name.clone();
        let mut steps = vec![Step::GoTo(disp), Step::Act(Action::interact(name(disp)))];
        if comp.chop {
            let at = self.bundle.map.station(disp).pos;
            let board = self.free_board(at)?;
            self.reserved[board] = Some(w);
            steps.extend([
                Step::GoTo(board),
                Step::Act(Action::interact(name(board))),
                Step::Act(Action::process(name(board))),
                Step::Act(Action::interact(name(board))),
                Step::Release(board),
            ]);
        }
        Some(steps)
    }

    fn plan_components(&mut self, w: usize, mut job: Job, asm: usize) -> Planned {
        let bundle = Arc::clone(&self.bundle);
        let name = |s: usize| bundle.map.station(s).name.clone();
        if !job.cook_todo.is_empty() && job.stove_for.is_empty() {
            self.reserve_stoves(w, &mut job);
        }
        let board_free = self
            .free_board(self.position(self.workers[w].agent))
            .is_some();
        let pick = |todo: &[Component]| todo.iter().position(|c| !c.chop || board_free);

        let mut steps = None;
        if !job.stove_for.is_empty() {
            if let Some(k) = pick(&job.cook_todo) {
                let comp = job.cook_todo.remove(k);
                let stove = job.stove_for.remove(k);
                let mut s = self.fetch(w, &comp).expect("board checked");
                s.extend([Step::GoTo(stove), Step::Act(Action::interact(name(stove)))]);
                job.cooking.push(stove);
                steps = Some(s);
            }
        }
        if steps.is_none() {
            if let Some(k) = pick(&job.plain_todo) {
                let comp = job.plain_todo.remove(k);
                let mut s = self.fetch(w, &comp).expect("board checked");
                s.extend([Step::GoTo(asm), Step::Act(Action::interact(name(asm)))]);
                steps = Some(s);
            }
        }
        if steps.is_none() && job.cook_todo.is_empty() && job.plain_todo.is_empty() {
            let mut s = vec![
                Step::GoTo(asm),
                Step::Act(Action::interact(name(asm))),
                Step::Release(asm),
            ];
            for &stove in &job.cooking {
                s.extend([
                    Step::GoTo(stove),
                    Step::AwaitCooked(stove),
                    Step::Act(Action::interact(name(stove))),
                    Step::Release(stove),
                ]);
            }
            let from = job
                .cooking
                .last()
                .map_or(self.bundle.map.station(asm).pos, |&s| {
                    self.bundle.map.station(s).pos
                });
            let window = self
                .nearest(from, self.stations_of(&StationKind::ServingWindow))
                .expect("bundles always have a serving window");
            s.extend([
                Step::GoTo(window),
                Step::AwaitTurn(job.dish),
                Step::Act(Action::interact(name(window))),
            ]);
            self.workers[w].steps.extend(s);
            self.workers[w].job = None;
            return Planned::Steps;
        }
        self.workers[w].job = Some(job);
        match steps {
            Some(s) => {
                self.workers[w].steps.extend(s);
                Planned::Steps
            }
            None => Planned::Blocked,
        }
    }
}
