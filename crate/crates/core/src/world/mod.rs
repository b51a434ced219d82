//! Static kitchen layout, items, and the mutable world snapshot.

mod geom;
mod item;
mod map;
pub mod path;
mod state;

pub use geom::{AgentId, Coord, Direction, Time};
pub use item::{Cookware, CookwareKind, Food, FoodState, Item, Plate};
pub use map::{
    CellKind, GridMap, MapError, MapSpec, Station, StationKind, StationSpec, TimeConstants,
};
pub use path::{adjacent_stations, passable, shortest_path, PathError};
pub use state::{Agent, OrderQueue, PlateReturn, StationState, WorldState};
