use std::fmt;

use serde::{Deserialize, Serialize};

/// Simulated time, in abstract time units.
pub type Time = u64;

/// A grid coordinate: `x` is the column, `y` the row, origin top-left.
///
/// Serialized as a two-element array `[x, y]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[i32; 2]", into = "[i32; 2]")]
pub struct Coord {
    pub x: i32,
    pub y: i32,
}

impl Coord {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }

    pub fn step(self, dir: Direction) -> Coord {
        let (dx, dy) = dir.delta();
        Coord::new(self.x + dx, self.y + dy)
    }

    pub fn manhattan(self, other: Coord) -> u32 {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y)
    }

    /// The four cardinal neighbours in N, E, S, W order.
    pub fn neighbors(self) -> [Coord; 4] {
        Direction::ALL.map(|d| self.step(d))
    }
}

impl From<[i32; 2]> for Coord {
    fn from([x, y]: [i32; 2]) -> Self {
        Coord { x, y }
    }
}

impl From<Coord> for [i32; 2] {
    fn from(c: Coord) -> Self {
        [c.x, c.y]
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.x, self.y)
    }
}

/// Cardinal directions. The declaration order is the tie-break order used
/// everywhere a neighbour scan has to be reproducible.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    North,
    East,
    South,
    West,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::North,
        Direction::East,
        Direction::South,
        Direction::West,
    ];

    pub const fn delta(self) -> (i32, i32) {
        match self {
            Direction::North => (0, -1),
            Direction::East => (1, 0),
            Direction::South => (0, 1),
            Direction::West => (-1, 0),
        }
    }
}

/// Agent identifier. Agents are numbered from zero internally and named
/// `agent1`, `agent2`, ... on the wire.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AgentId(pub usize);

impl AgentId {
    pub fn index(self) -> usize {
        self.0
    }

    pub fn parse(s: &str) -> Option<AgentId> {
        let n: usize = s.strip_prefix("agent")?.parse().ok()?;
        if n == 0 || s != format!("agent{n}") {
            return None;
        }
        Some(AgentId(n - 1))
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "agent{}", self.0 + 1)
    }
}

impl Serialize for AgentId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for AgentId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        AgentId::parse(&s)
            .ok_or_else(|| serde::de::Error::custom(format!("invalid agent id `{s}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coord_serializes_as_pair() {
        let c = Coord::new(3, 7);
        assert_eq!(serde_json::to_string(&c).unwrap(), "[3,7]");
        let back: Coord = serde_json::from_str("[3, 7]").unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn agent_ids_round_trip() {
        assert_eq!(AgentId(0).to_string(), "agent1");
        assert_eq!(AgentId::parse("agent3"), Some(AgentId(2)));
        assert_eq!(AgentId::parse("agent0"), None);
        assert_eq!(AgentId::parse("agent01"), None);
        assert_eq!(AgentId::parse("bot1"), None);
    }

    #[test]
    fn neighbours_are_nesw() {
        let c = Coord::new(1, 1);
        assert_eq!(
            c.neighbors(),
            [
                Coord::new(1, 0),
                Coord::new(2, 1),
                Coord::new(1, 2),
                Coord::new(0, 1)
            ]
        );
    }
}
