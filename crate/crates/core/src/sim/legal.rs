use serde::{Deserialize, Serialize};

use super::action::Action;
use super::engine::Simulation;
use crate::world::{AgentId, Coord};

/// What an agent may do right now. Interact and Process targets are listed
/// exactly when the engine would accept them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LegalActions {
    pub agent: AgentId,
    /// The agent is mid-action or has finished; nothing is accepted.
    pub busy: bool,
    pub interact: Vec<String>,
    pub process: Vec<String>,
    /// Floor cells reachable from the agent's position, itself included.
    pub reachable: Vec<Coord>,
    pub can_wait: bool,
    pub can_finish: bool,
}

impl LegalActions {
    pub(crate) fn compute(sim: &Simulation, agent: AgentId) -> LegalActions {
        let i = agent.index();
        if !sim.is_running() || sim.is_busy(agent) || sim.is_finished(agent) {
            return LegalActions {
                agent,
                busy: true,
                interact: Vec::new(),
                process: Vec::new(),
                reachable: Vec::new(),
                can_wait: false,
                can_finish: false,
            };
        }
        let map = &sim.bundle().map;
        let world = sim.state();
        let rules = sim.rules();
        let pos = world.agents[i].position;
        let mut interact = Vec::new();
        let mut process = Vec::new();
        for s in crate::world::path::adjacent_station_indices(map, pos) {
            let name = &map.station(s).name;
            if rules.decide_interact(world, i, s).is_ok() {
                interact.push(name.clone());
            }
            if rules.decide_process(world, i, s).is_ok() {
                process.push(name.clone());
            }
        }
        let dist = map.distances_from(pos);
        let reachable = map
            .floor_cells()
            .filter(|&c| dist[map.idx(c)].is_some())
            .collect();
        LegalActions {
            agent,
            busy: false,
            interact,
            process,
            reachable,
            can_wait: true,
            can_finish: true,
        }
    }

    /// Concrete actions for every listed Interact/Process target.
    pub fn station_actions(&self) -> Vec<Action> {
        self.interact
            .iter()
            .map(|t| Action::interact(t.as_str()))
            .chain(self.process.iter().map(|t| Action::process(t.as_str())))
            .collect()
    }
}
