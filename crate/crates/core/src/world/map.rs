use std::collections::{HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::geom::{Coord, Time};
use super::item::{CookwareKind, Item};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MapError {
    #[error("coordinate {0} is outside the {1}x{2} grid")]
    OutOfBounds(Coord, usize, usize),
    #[error("map dimensions must be positive")]
    EmptyGrid,
    #[error("two stations occupy {0}")]
    SharedCell(Coord),
    #[error("duplicate station name `{0}`")]
    DuplicateName(String),
    #[error("unknown station kind `{0}`")]
    UnknownKind(String),
    #[error("dispenser `{0}` has no ingredient")]
    MissingIngredient(String),
    #[error("agent spawn {0} is not a floor cell")]
    SpawnNotFloor(Coord),
    #[error("station `{0}` has no adjacent floor cell")]
    StationUnreachable(String),
    #[error("floor cells are not connected ({reachable} of {total} reachable)")]
    Disconnected { reachable: usize, total: usize },
    #[error("station `{name}` cannot hold its initial item: {reason}")]
    BadInitialItem { name: String, reason: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellKind {
    Floor,
    Station,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StationKind {
    Dispenser(String),
    CuttingBoard,
    Stove,
    Sink,
    Counter,
    ServingWindow,
    DirtyPlateReturn,
}

impl StationKind {
    pub fn tag(&self) -> &'static str {
        match self {
            StationKind::Dispenser(_) => "dispenser",
            StationKind::CuttingBoard => "cutting_board",
            StationKind::Stove => "stove",
            StationKind::Sink => "sink",
            StationKind::Counter => "counter",
            StationKind::ServingWindow => "serving_window",
            StationKind::DirtyPlateReturn => "dirty_plate_return",
        }
    }

    fn from_tag(tag: &str, ingredient: Option<String>, name: &str) -> Result<Self, MapError> {
        Ok(match tag {
            "dispenser" => StationKind::Dispenser(
                ingredient.ok_or_else(|| MapError::MissingIngredient(name.to_string()))?,
            ),
            "cutting_board" => StationKind::CuttingBoard,
            "stove" => StationKind::Stove,
            "sink" => StationKind::Sink,
            "counter" => StationKind::Counter,
            "serving_window" => StationKind::ServingWindow,
            "dirty_plate_return" => StationKind::DirtyPlateReturn,
            other => return Err(MapError::UnknownKind(other.to_string())),
        })
    }

    /// Whether `item` may be set down on an empty station of this kind.
    pub fn accepts(&self, item: &Item) -> bool {
        match self {
            StationKind::Counter | StationKind::CuttingBoard => true,
            StationKind::Stove => matches!(item, Item::Cookware(_)),
            StationKind::Sink => item.is_plate(),
            StationKind::DirtyPlateReturn => {
                matches!(item, Item::Plate(p) if p.dirty)
            }
            StationKind::Dispenser(_) | StationKind::ServingWindow => false,
        }
    }
}

impl fmt::Display for StationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StationKind::Dispenser(ing) => write!(f, "{ing} dispenser"),
            other => f.write_str(other.tag()),
        }
    }
}

/// A fixed workstation. `initial` is the item stack the station starts
/// with (bottom first); the live contents are tracked in the world state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Station {
    pub name: String,
    pub kind: StationKind,
    pub pos: Coord,
    pub initial: Vec<Item>,
}

impl Station {
    pub fn new(name: impl Into<String>, kind: StationKind, pos: Coord) -> Self {
        Station {
            name: name.into(),
            kind,
            pos,
            initial: Vec::new(),
        }
    }

    pub fn with_items(mut self, items: Vec<Item>) -> Self {
        self.initial = items;
        self
    }
}

/// Static kitchen layout.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "MapSpec", into = "MapSpec")]
pub struct GridMap {
    width: usize,
    height: usize,
    cells: Vec<CellKind>,
    stations: Vec<Station>,
    agent_spawns: Vec<Coord>,
}

impl GridMap {
    /// Builds a map, checking the structural rules (bounds, one station per
    /// cell, unique names). Reachability rules are checked by [`validate`].
    ///
    /// [`validate`]: GridMap::validate
    pub fn new(
        width: usize,
        height: usize,
        stations: Vec<Station>,
        agent_spawns: Vec<Coord>,
    ) -> Result<Self, MapError> {
        if width == 0 || height == 0 {
            return Err(MapError::EmptyGrid);
        }
        let mut cells = vec![CellKind::Floor; width * height];
        let mut names = HashSet::new();
        for st in &stations {
            let idx = index_of(width, height, st.pos)
                .ok_or(MapError::OutOfBounds(st.pos, width, height))?;
            if cells[idx] == CellKind::Station {
                return Err(MapError::SharedCell(st.pos));
            }
            cells[idx] = CellKind::Station;
            if !names.insert(st.name.as_str()) {
                return Err(MapError::DuplicateName(st.name.clone()));
            }
        }
        for &spawn in &agent_spawns {
            if index_of(width, height, spawn).is_none() {
                return Err(MapError::OutOfBounds(spawn, width, height));
            }
        }
        Ok(GridMap {
            width,
            height,
            cells,
            stations,
            agent_spawns,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn stations(&self) -> &[Station] {
        &self.stations
    }

    pub fn station(&self, idx: usize) -> &Station {
        &self.stations[idx]
    }

    pub fn agent_spawns(&self) -> &[Coord] {
        &self.agent_spawns
    }

    pub fn station_index(&self, name: &str) -> Option<usize> {
        self.stations.iter().position(|s| s.name == name)
    }

    pub fn in_bounds(&self, c: Coord) -> bool {
        index_of(self.width, self.height, c).is_some()
    }

    pub fn cell(&self, c: Coord) -> Option<CellKind> {
        index_of(self.width, self.height, c).map(|i| self.cells[i])
    }

    pub(crate) fn is_floor(&self, c: Coord) -> bool {
        self.cell(c) == Some(CellKind::Floor)
    }

    pub fn floor_cells(&self) -> impl Iterator<Item = Coord> + '_ {
        (0..self.height as i32)
            .flat_map(move |y| (0..self.width as i32).map(move |x| Coord::new(x, y)))
            .filter(|&c| self.is_floor(c))
    }

    /// Floor cells from which station `idx` can be operated, in N, E, S, W
    /// order around the station.
    pub fn access_cells(&self, idx: usize) -> Vec<Coord> {
        self.stations[idx]
            .pos
            .neighbors()
            .into_iter()
            .filter(|&c| self.is_floor(c))
            .collect()
    }

    /// Breadth-first distances (in tiles) from `from` to every cell,
    /// `None` for walls and unreachable cells.
    pub fn distances_from(&self, from: Coord) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.cells.len()];
        let Some(start) = index_of(self.width, self.height, from) else {
            return dist;
        };
        if self.cells[start] != CellKind::Floor {
            return dist;
        }
        dist[start] = Some(0);
        let mut queue = VecDeque::from([from]);
        while let Some(c) = queue.pop_front() {
            let d = dist[self.idx(c)].unwrap();
            for n in c.neighbors() {
                if let Some(ni) = index_of(self.width, self.height, n) {
                    if self.cells[ni] == CellKind::Floor && dist[ni].is_none() {
                        dist[ni] = Some(d + 1);
                        queue.push_back(n);
                    }
                }
            }
        }
        dist
    }

    pub fn distance(&self, from: Coord, to: Coord) -> Option<u32> {
        let i = index_of(self.width, self.height, to)?;
        self.distances_from(from)[i]
    }

    pub(crate) fn idx(&self, c: Coord) -> usize {
        c.y as usize * self.width + c.x as usize
    }

    /// Checks every layout invariant: spawns on floor, each station next to
    /// floor, floor connected, initial items placeable.
    pub fn validate(&self) -> Result<(), MapError> {
        for &spawn in &self.agent_spawns {
            if !self.is_floor(spawn) {
                return Err(MapError::SpawnNotFloor(spawn));
            }
        }
        for (i, st) in self.stations.iter().enumerate() {
            if self.access_cells(i).is_empty() {
                return Err(MapError::StationUnreachable(st.name.clone()));
            }
            check_initial_items(st)?;
        }
        let total = self.floor_cells().count();
        if let Some(first) = self.floor_cells().next() {
            let reachable = self.distances_from(first).iter().flatten().count();
            if reachable != total {
                return Err(MapError::Disconnected { reachable, total });
            }
        }
        Ok(())
    }

    /// Total number of plates present in the initial layout.
    pub fn initial_plate_count(&self) -> usize {
        self.stations
            .iter()
            .flat_map(|s| &s.initial)
            .filter(|i| i.is_plate())
            .count()
    }

    pub fn to_spec(&self) -> MapSpec {
        MapSpec::from(self.clone())
    }
}

fn check_initial_items(st: &Station) -> Result<(), MapError> {
    let bad = |reason: &str| MapError::BadInitialItem {
        name: st.name.clone(),
        reason: reason.to_string(),
    };
    match st.initial.as_slice() {
        [] => Ok(()),
        [single] if st.kind.accepts(single) => Ok(()),
        [_] => Err(bad("station kind does not accept this item")),
        many => {
            let all_clean = many
                .iter()
                .all(|i| matches!(i, Item::Plate(p) if p.is_clean_empty()));
            let all_dirty = many.iter().all(|i| matches!(i, Item::Plate(p) if p.dirty));
            if (all_clean || all_dirty) && st.kind.accepts(&many[0]) {
                Ok(())
            } else {
                Err(bad("only empty plates can be stacked"))
            }
        }
    }
}

fn index_of(width: usize, height: usize, c: Coord) -> Option<usize> {
    if c.x < 0 || c.y < 0 || c.x as usize >= width || c.y as usize >= height {
        None
    } else {
        Some(c.y as usize * width + c.x as usize)
    }
}

/// Wire form of a station inside the map JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationSpec {
    pub name: String,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ingredient: Option<String>,
    pub pos: Coord,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub items: Vec<Item>,
}

/// Wire form of the map JSON document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapSpec {
    pub width: usize,
    pub height: usize,
    pub stations: Vec<StationSpec>,
    pub agents: Vec<Coord>,
}

impl TryFrom<MapSpec> for GridMap {
    type Error = MapError;

    fn try_from(spec: MapSpec) -> Result<Self, MapError> {
        let stations = spec
            .stations
            .into_iter()
            .map(|s| {
                let kind = StationKind::from_tag(&s.kind, s.ingredient, &s.name)?;
                Ok(Station {
                    name: s.name,
                    kind,
                    pos: s.pos,
                    initial: s.items,
                })
            })
            .collect::<Result<Vec<_>, MapError>>()?;
        let map = GridMap::new(spec.width, spec.height, stations, spec.agents)?;
        map.validate()?;
        Ok(map)
    }
}

impl From<GridMap> for MapSpec {
    fn from(map: GridMap) -> Self {
        MapSpec {
            width: map.width,
            height: map.height,
            stations: map
                .stations
                .into_iter()
                .map(|s| {
                    let ingredient = match &s.kind {
                        StationKind::Dispenser(ing) => Some(ing.clone()),
                        _ => None,
                    };
                    StationSpec {
                        name: s.name,
                        kind: s.kind.tag().to_string(),
                        ingredient,
                        pos: s.pos,
                        items: s.initial,
                    }
                })
                .collect(),
            agents: map.agent_spawns,
        }
    }
}

/// Durations of every timed operation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeConstants {
    pub move_per_tile: Time,
    pub interact: Time,
    pub cut: Time,
    pub pot_cook: Time,
    pub pan_cook: Time,
    pub wash_plate: Time,
    pub dirty_plate_return: Time,
}

impl Default for TimeConstants {
    fn default() -> Self {
        TimeConstants {
            move_per_tile: 1,
            interact: 1,
            cut: 3,
            pot_cook: 8,
            pan_cook: 6,
            wash_plate: 3,
            dirty_plate_return: 10,
        }
    }
}

impl TimeConstants {
    pub fn cook_time(&self, kind: CookwareKind) -> Time {
        match kind {
            CookwareKind::Pot => self.pot_cook,
            CookwareKind::Pan => self.pan_cook,
        }
    }

    /// Name of the first non-positive constant, if any.
    pub fn first_non_positive(&self) -> Option<&'static str> {
        [
            ("move_per_tile", self.move_per_tile),
            ("interact", self.interact),
            ("cut", self.cut),
            ("pot_cook", self.pot_cook),
            ("pan_cook", self.pan_cook),
            ("wash_plate", self.wash_plate),
            ("dirty_plate_return", self.dirty_plate_return),
        ]
        .into_iter()
        .find(|&(_, v)| v == 0)
        .map(|(name, _)| name)
    }
}
