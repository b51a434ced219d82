//! Hand-built fixtures and independent reference computations shared by
//! the integration tests and the acceptance suite.

#![allow(dead_code)]

use std::collections::VecDeque;
use std::sync::Arc;

use kitchen_core::metrics::TaskOutcome;
use kitchen_core::taskgen::{find_recipe, Difficulty};
use kitchen_core::world::{CellKind, CookwareKind, Item, Station, StationKind};
use kitchen_core::{Action, AgentId, Coord, GridMap, Plan, Simulation, TaskBundle, TimeConstants};

/// Breadth-first search over floor cells using only `GridMap::cell`.
pub fn bfs(map: &GridMap, from: Coord, to: Coord) -> Option<u32> {
    let floor = |c: Coord| map.cell(c) == Some(CellKind::Floor);
    if !floor(from) || !floor(to) {
        return None;
    }
    let (w, h) = (map.width(), map.height());
    let mut seen = vec![None; w * h];
    let key = |c: Coord| c.y as usize * w + c.x as usize;
    seen[key(from)] = Some(0u32);
    let mut queue = VecDeque::from([from]);
    while let Some(c) = queue.pop_front() {
        let d = seen[key(c)].unwrap();
        if c == to {
            return Some(d);
        }
        for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            let n = Coord::new(c.x + dx, c.y + dy);
            if n.x < 0 || n.y < 0 || n.x >= w as i32 || n.y >= h as i32 {
                continue;
            }
            if floor(n) && seen[key(n)].is_none() {
                seen[key(n)] = Some(d + 1);
                queue.push_back(n);
            }
        }
    }
    None
}

pub fn st(name: &str, kind: StationKind, x: i32, y: i32) -> Station {
    Station::new(name, kind, Coord::new(x, y))
}

pub fn dispenser(ing: &str, x: i32, y: i32) -> Station {
    st(
        &format!("{ing}_dispenser1"),
        StationKind::Dispenser(ing.into()),
        x,
        y,
    )
}

/// Wraps a hand layout into a bundle with generous limits.
pub fn hand_bundle(
    width: usize,
    height: usize,
    stations: Vec<Station>,
    spawns: Vec<Coord>,
    orders: &[&str],
    constants: TimeConstants,
) -> Arc<TaskBundle> {
    let n_agents = spawns.len();
    let map = GridMap::new(width, height, stations, spawns).expect("hand map is well formed");
    let orders: Vec<String> = orders.iter().map(|s| s.to_string()).collect();
    let mut recipes = Vec::new();
    for id in &orders {
        if !recipes.iter().any(|r: &kitchen_core::Recipe| &r.id == id) {
            recipes.push(find_recipe(id).expect("catalog recipe"));
        }
    }
    let difficulty = Difficulty::derive(&recipes, &orders, &map).expect("orders have recipes");
    Arc::new(TaskBundle {
        id: "hand".into(),
        map,
        recipes,
        orders,
        constants,
        n_agents,
        seed: 0,
        t_max: 1000,
        d_max: 1000,
        difficulty,
        extensions: Default::default(),
    })
}

/// A 7x4 kitchen:
///
/// ```text
/// . L B C E P .
/// . . . . . . .
/// . . . . . . .
/// . W S R D O .
/// ```
///
/// L lettuce dispenser, B cutting board, C counter with one clean plate,
/// E stove without cookware, P stove with a pan, W serving window,
/// S sink, R dirty plate return, D rice dispenser, O stove with a pot.
pub fn kitchen_stations(dirty_plate_waiting: bool) -> Vec<Station> {
    let mut ret = st("dirty_plate_return1", StationKind::DirtyPlateReturn, 3, 3);
    if dirty_plate_waiting {
        ret = ret.with_items(vec![Item::dirty_plate()]);
    }
    vec![
        dispenser("lettuce", 1, 0),
        st("cutting_board1", StationKind::CuttingBoard, 2, 0),
        st("counter1", StationKind::Counter, 3, 0).with_items(vec![Item::clean_plate()]),
        st("stove1", StationKind::Stove, 4, 0),
        st("stove2", StationKind::Stove, 5, 0).with_items(vec![Item::cookware(CookwareKind::Pan)]),
        st("serving_window1", StationKind::ServingWindow, 1, 3),
        st("sink1", StationKind::Sink, 2, 3),
        ret,
        dispenser("rice", 4, 3),
        st("stove3", StationKind::Stove, 5, 3).with_items(vec![Item::cookware(CookwareKind::Pot)]),
    ]
}

pub fn kitchen(
    spawns: &[(i32, i32)],
    orders: &[&str],
    constants: TimeConstants,
) -> Arc<TaskBundle> {
    let spawns = spawns.iter().map(|&(x, y)| Coord::new(x, y)).collect();
    hand_bundle(7, 4, kitchen_stations(false), spawns, orders, constants)
}

pub fn salad_kitchen() -> Arc<TaskBundle> {
    kitchen(&[(1, 1)], &["salad_basic"], TimeConstants::default())
}

/// Fetch lettuce, chop it, fetch the plate, plate the lettuce, serve.
/// Travel is 5 tiles in total.
pub fn salad_golden() -> Plan {
    let mut plan = Plan::default();
    for a in [
        Action::interact("lettuce_dispenser1"),
        Action::move_to(2, 1),
        Action::interact("cutting_board1"),
        Action::process("cutting_board1"),
        Action::move_to(3, 1),
        Action::interact("counter1"),
        Action::move_to(2, 1),
        Action::interact("cutting_board1"),
        Action::move_to(1, 2),
        Action::interact("serving_window1"),
    ] {
        plan.push(AgentId(0), a);
    }
    plan
}

pub const SALAD_GOLDEN_TILES: u64 = 5;

/// Completion time of [`salad_golden`] traced by hand: travel, four
/// completed interactions and one chop. The serve ends the run at its
/// start instant.
pub fn salad_golden_oct(c: &TimeConstants) -> u64 {
    SALAD_GOLDEN_TILES * c.move_per_tile + 4 * c.interact + c.cut
}

/// Reference aggregates computed straight from the metric definitions.
pub struct Reference {
    pub sr: f64,
    pub poct: f64,
    pub noct: Option<f64>,
    pub pmd: f64,
    pub au: Option<f64>,
}

pub fn reference_metrics(outcomes: &[TaskOutcome]) -> Reference {
    let n = outcomes.len() as f64;
    let wins: Vec<&TaskOutcome> = outcomes.iter().filter(|o| o.success).collect();
    let mut poct = 0.0;
    let mut pmd = 0.0;
    for o in outcomes {
        if o.success {
            poct += o.oct as f64;
            let m = o.n_agents as f64;
            pmd += o.distances.iter().map(|&d| d as f64 / m).sum::<f64>();
        } else {
            poct += o.t_max.unwrap() as f64;
            pmd += o.d_max.unwrap() as f64;
        }
    }
    let avg = |xs: Vec<f64>| (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64);
    let noct = avg(wins
        .iter()
        .map(|o| o.oct as f64 / o.t_max.unwrap() as f64)
        .collect());
    let au = avg(wins
        .iter()
        .map(|o| {
            let m = o.n_agents as f64;
            o.work_times
                .iter()
                .map(|&w| w as f64 / o.oct as f64 / m)
                .sum::<f64>()
        })
        .collect());
    Reference {
        sr: wins.len() as f64 / n,
        poct: poct / n,
        noct,
        pmd: pmd / n,
        au,
    }
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Fills the cookware, lifts it off the stove at half the cook time, puts
/// it back later and returns how long it then takes to finish.
pub fn pause_resume(kind: CookwareKind, cook: u64) -> (u64, u64) {
    let mut c = TimeConstants::default();
    match kind {
        CookwareKind::Pot => c.pot_cook = cook,
        CookwareKind::Pan => c.pan_cook = cook,
    }
    let (spawn, disp, stand, stove, idx) = match kind {
        CookwareKind::Pot => ((4, 2), "rice_dispenser1", (5, 2), "stove3", 9),
        CookwareKind::Pan => ((1, 1), "lettuce_dispenser1", (5, 1), "stove2", 4),
    };
    let bundle = kitchen(&[spawn], &["salad_basic"], c);
    let mut sim = Simulation::new(bundle);
    let progress = |sim: &Simulation| match sim.state().stations[idx].top() {
        Some(Item::Cookware(cw)) => (cw.progress, cw.has_cooked_food()),
        other => panic!("no cookware on the stove: {other:?}"),
    };
    sim.submit(AgentId(0), Action::interact(disp)).unwrap();
    sim.submit(AgentId(0), Action::move_to(stand.0, stand.1))
        .unwrap();
    let filled = sim.clock();
    sim.submit(AgentId(0), Action::interact(stove)).unwrap();
    let half = cook / 2;
    sim.submit(AgentId(0), Action::wait(filled + half - sim.clock()))
        .unwrap();
    assert_eq!(progress(&sim), (half, false));
    sim.submit(AgentId(0), Action::interact(stove)).unwrap();
    sim.submit(AgentId(0), Action::wait(7)).unwrap();
    match &sim.state().agents[0].held {
        Some(Item::Cookware(cw)) => assert_eq!(cw.progress, half),
        other => panic!("agent should hold the cookware: {other:?}"),
    }
    let back = sim.clock();
    sim.submit(AgentId(0), Action::interact(stove)).unwrap();
    let mut done_at = None;
    while done_at.is_none() {
        if progress(&sim).1 {
            done_at = Some(sim.clock());
        } else {
            sim.submit(AgentId(0), Action::wait(1)).unwrap();
        }
    }
    (done_at.unwrap() - back, cook - half)
}
