use rand::seq::SliceRandom;
use rand::Rng;

use super::recipes::Recipe;
use super::GenError;
use crate::world::{CookwareKind, Coord, GridMap, Item, Station, StationKind};

const MAX_ATTEMPTS: usize = 200;

/// A station the generator must place, with its starting items.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StationRequest {
    pub name: String,
    pub kind: StationKind,
    pub items: Vec<Item>,
}

impl StationRequest {
    fn new(name: String, kind: StationKind) -> Self {
        StationRequest {
            name,
            kind,
            items: Vec::new(),
        }
    }
}

/// Two of every station kind the dishes need, plus the service stations.
/// Each cookware kind gets two stoves already holding that cookware, and
/// the first counter is stocked with `min(2, n_dishes)` clean plates.
pub fn required_stations(dishes: &[&Recipe]) -> Vec<StationRequest> {
    let mut ingredients: Vec<&str> = dishes
        .iter()
        .flat_map(|r| r.components.iter().map(|c| c.ingredient.as_str()))
        .collect();
    ingredients.sort_unstable();
    ingredients.dedup();
    let needs_board = dishes.iter().any(|r| r.components.iter().any(|c| c.chop));
    let mut cookware: Vec<CookwareKind> = dishes.iter().flat_map(|r| r.cookware()).collect();
    cookware.sort();
    cookware.dedup();

    let mut out = Vec::new();
    let pair = |out: &mut Vec<StationRequest>, base: &str, kind: StationKind| {
        for k in 1..=2 {
            out.push(StationRequest::new(format!("{base}{k}"), kind.clone()));
        }
    };
    for ing in ingredients {
        pair(
            &mut out,
            &format!("{ing}_dispenser"),
            StationKind::Dispenser(ing.to_string()),
        );
    }
    if needs_board {
        pair(&mut out, "cutting_board", StationKind::CuttingBoard);
    }
    let mut stove = 0;
    for kind in cookware {
        for _ in 0..2 {
            stove += 1;
            let mut req = StationRequest::new(format!("stove{stove}"), StationKind::Stove);
            req.items.push(Item::cookware(kind));
            out.push(req);
        }
    }
    pair(&mut out, "counter", StationKind::Counter);
    let plate_counter = out.len() - 2;
    out[plate_counter].items = vec![Item::clean_plate(); dishes.len().min(2)];
    pair(&mut out, "sink", StationKind::Sink);
    pair(&mut out, "serving_window", StationKind::ServingWindow);
    pair(
        &mut out,
        "dirty_plate_return",
        StationKind::DirtyPlateReturn,
    );
    out
}

/// Non-corner border cells, the slots stations normally occupy.
fn border_slots(width: usize, height: usize) -> Vec<Coord> {
    let (w, h) = (width as i32, height as i32);
    let mut slots = Vec::new();
    for x in 1..w - 1 {
        slots.push(Coord::new(x, 0));
        slots.push(Coord::new(x, h - 1));
    }
    for y in 1..h - 1 {
        slots.push(Coord::new(0, y));
        slots.push(Coord::new(w - 1, y));
    }
    slots
}

/// Picks a grid size that fits `n_stations` on the border with some slack.
pub fn pick_size<R: Rng + ?Sized>(n_stations: usize, rng: &mut R) -> (usize, usize) {
    let mut w = rng.random_range(6..=9);
    let mut h = rng.random_range(6..=9);
    while border_slots(w, h).len() < n_stations + 4 {
        if w <= h {
            w += 1;
        } else {
            h += 1;
        }
    }
    (w, h)
}

/// Places the requested stations on a `width` x `height` grid. Most go on
/// the border; a few may become interior islands. Layouts are re-drawn
/// until every map invariant holds.
pub fn generate_map<R: Rng + ?Sized>(
    stations: &[StationRequest],
    n_agents: usize,
    (width, height): (usize, usize),
    rng: &mut R,
) -> Result<GridMap, GenError> {
    let border = border_slots(width, height);
    if width < 3 || height < 3 || border.len() < stations.len() {
        return Err(GenError::MapTooSmall {
            width,
            height,
            stations: stations.len(),
        });
    }
    let interior: Vec<Coord> = (2..height as i32 - 2)
        .flat_map(|y| (2..width as i32 - 2).map(move |x| Coord::new(x, y)))
        .collect();

    for attempt in 0..MAX_ATTEMPTS {
        // Late attempts fall back to a plain border layout.
        let max_islands = if attempt < MAX_ATTEMPTS / 2 {
            (interior.len() / 8).min(stations.len() / 6)
        } else {
            0
        };
        let n_islands = rng.random_range(0..=max_islands);
        let mut islands = interior.clone();
        islands.shuffle(rng);
        let mut slots = border.clone();
        slots.shuffle(rng);
        let mut order: Vec<usize> = (0..stations.len()).collect();
        order.shuffle(rng);

        // Never wall in a corner: of the two slots touching it, use one.
        let corner_of = |c: Coord| {
            let near = |v: i32, len: usize| v <= 1 || v >= len as i32 - 2;
            (near(c.x, width) && near(c.y, height)).then(|| {
                Coord::new(
                    if c.x <= 1 { 0 } else { width as i32 - 1 },
                    if c.y <= 1 { 0 } else { height as i32 - 1 },
                )
            })
        };
        let mut corners_used = Vec::new();
        let usable = slots.into_iter().filter(|&c| match corner_of(c) {
            Some(corner) if corners_used.contains(&corner) => false,
            Some(corner) => {
                corners_used.push(corner);
                true
            }
            None => true,
        });
        let placed: Vec<_> = islands[..n_islands]
            .iter()
            .copied()
            .chain(usable)
            .take(stations.len())
            .collect();
        if placed.len() < stations.len() {
            continue;
        }
        let mut positions = vec![Coord::new(0, 0); stations.len()];
        for (&s, &c) in order.iter().zip(&placed) {
            positions[s] = c;
        }
        let placed = positions;
        let built: Vec<Station> = stations
            .iter()
            .zip(&placed)
            .map(|(req, &pos)| {
                Station::new(req.name.clone(), req.kind.clone(), pos).with_items(req.items.clone())
            })
            .collect();
        let Ok(empty) = GridMap::new(width, height, built.clone(), Vec::new()) else {
            continue;
        };
        let mut floor: Vec<Coord> = empty.floor_cells().collect();
        if floor.len() < n_agents {
            continue;
        }
        floor.shuffle(rng);
        let spawns = floor[..n_agents].to_vec();
        let Ok(map) = GridMap::new(width, height, built, spawns) else {
            continue;
        };
        if map.validate().is_ok() {
            return Ok(map);
        }
    }
    Err(GenError::MapAttempts(MAX_ATTEMPTS))
}
