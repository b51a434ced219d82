use serde::{Deserialize, Serialize};

use super::geom::{AgentId, Coord, Time};
use super::item::Item;
use super::map::GridMap;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Agent {
    pub id: AgentId,
    pub position: Coord,
    pub held: Option<Item>,
    pub busy_until: Time,
    pub distance_traveled: u64,
    pub work_time: Time,
}

/// Live contents of one station. The last element of `contents` is the top
/// of the stack and the only item agents interact with.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StationState {
    pub name: String,
    pub contents: Vec<Item>,
    pub busy_by: Option<AgentId>,
}

impl StationState {
    pub fn top(&self) -> Option<&Item> {
        self.contents.last()
    }

    pub fn top_mut(&mut self) -> Option<&mut Item> {
        self.contents.last_mut()
    }
}

/// Dishes to serve, strictly in list order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderQueue {
    pub dishes: Vec<String>,
    pub next_index: usize,
}

impl OrderQueue {
    pub fn new(dishes: Vec<String>) -> Self {
        OrderQueue {
            dishes,
            next_index: 0,
        }
    }

    pub fn next_dish(&self) -> Option<&str> {
        self.dishes.get(self.next_index).map(String::as_str)
    }

    pub fn is_complete(&self) -> bool {
        self.next_index >= self.dishes.len()
    }

    pub fn len(&self) -> usize {
        self.dishes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dishes.is_empty()
    }
}

/// A dirty plate travelling back from a serving window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlateReturn {
    pub due: Time,
    pub station: usize,
}

/// Full kitchen snapshot.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorldState {
    pub clock: Time,
    pub stations: Vec<StationState>,
    pub agents: Vec<Agent>,
    pub orders: OrderQueue,
    pub pending_returns: Vec<PlateReturn>,
    /// Ingredients handed out by dispensers so far.
    pub dispensed: u64,
    /// Food items that left the kitchen on served plates.
    pub served_food: u64,
}

impl WorldState {
    pub fn initial(map: &GridMap, n_agents: usize, orders: Vec<String>) -> Self {
        WorldState {
            clock: 0,
            stations: map
                .stations()
                .iter()
                .map(|s| StationState {
                    name: s.name.clone(),
                    contents: s.initial.clone(),
                    busy_by: None,
                })
                .collect(),
            agents: map
                .agent_spawns()
                .iter()
                .take(n_agents)
                .enumerate()
                .map(|(i, &position)| Agent {
                    id: AgentId(i),
                    position,
                    held: None,
                    busy_until: 0,
                    distance_traveled: 0,
                    work_time: 0,
                })
                .collect(),
            orders: OrderQueue::new(orders),
            pending_returns: Vec::new(),
            dispensed: 0,
            served_food: 0,
        }
    }

    fn all_items(&self) -> impl Iterator<Item = &Item> {
        self.stations
            .iter()
            .flat_map(|s| &s.contents)
            .chain(self.agents.iter().filter_map(|a| a.held.as_ref()))
    }

    /// Plates anywhere in the kitchen, including those on their way back
    /// from a serving window.
    pub fn plate_count(&self) -> usize {
        self.all_items().filter(|i| i.is_plate()).count() + self.pending_returns.len()
    }

    /// Food items currently in the kitchen (loose, plated or in cookware).
    pub fn food_count(&self) -> u64 {
        self.all_items().map(|i| i.food_count() as u64).sum()
    }
}
