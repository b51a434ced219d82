//! Movement queries over the floor graph.
//!
//! Neighbour expansion always runs N, E, S, W, so the path returned for a
//! given pair of cells never changes between runs.

use std::collections::VecDeque;

use thiserror::Error;

use super::geom::Coord;
use super::map::{CellKind, GridMap, Station};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PathError {
    #[error("coordinate {0} is out of bounds")]
    OutOfBounds(Coord),
    #[error("coordinate {0} is not a floor cell")]
    NotFloor(Coord),
    #[error("no floor path from {from} to {to}")]
    Unreachable { from: Coord, to: Coord },
}

/// True iff `c` is a floor cell. Agents never block each other.
pub fn passable(map: &GridMap, c: Coord) -> Result<bool, PathError> {
    map.cell(c)
        .map(|k| k == CellKind::Floor)
        .ok_or(PathError::OutOfBounds(c))
}

/// Stations at Manhattan distance 1 from `c`, in N, E, S, W order.
pub fn adjacent_stations(map: &GridMap, c: Coord) -> Vec<&Station> {
    adjacent_station_indices(map, c)
        .into_iter()
        .map(|i| map.station(i))
        .collect()
}

pub(crate) fn adjacent_station_indices(map: &GridMap, c: Coord) -> Vec<usize> {
    c.neighbors()
        .into_iter()
        .filter_map(|n| map.stations().iter().position(|s| s.pos == n))
        .collect()
}

/// A minimum-length floor path from `from` to `to`, both ends included.
/// Its travel cost is `(len - 1) * move_per_tile`.
pub fn shortest_path(map: &GridMap, from: Coord, to: Coord) -> Result<Vec<Coord>, PathError> {
    for c in [from, to] {
        if !passable(map, c)? {
            return Err(PathError::NotFloor(c));
        }
    }
    if from == to {
        return Ok(vec![from]);
    }
    let mut parent: Vec<Option<Coord>> = vec![None; map.width() * map.height()];
    let mut seen = vec![false; map.width() * map.height()];
    seen[map.idx(from)] = true;
    let mut queue = VecDeque::from([from]);
    while let Some(c) = queue.pop_front() {
        for n in c.neighbors() {
            if !map.is_floor(n) || seen[map.idx(n)] {
                continue;
            }
            seen[map.idx(n)] = true;
            parent[map.idx(n)] = Some(c);
            if n == to {
                let mut path = vec![to];
                let mut cur = to;
                while let Some(p) = parent[map.idx(cur)] {
                    path.push(p);
                    cur = p;
                }
                path.reverse();
                return Ok(path);
            }
            queue.push_back(n);
        }
    }
    Err(PathError::Unreachable { from, to })
}

/// Number of tiles walked along the shortest path.
pub fn path_tiles(map: &GridMap, from: Coord, to: Coord) -> Result<u64, PathError> {
    shortest_path(map, from, to).map(|p| p.len() as u64 - 1)
}
