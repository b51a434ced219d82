mod oracles;

use std::collections::HashMap;
use std::sync::Arc;

use kitchen_core::sim::Outcome;
use kitchen_core::taskgen::{assemble_bundle, solve, Category};
use kitchen_core::world::shortest_path;
use kitchen_core::{execute, Action, AgentId, Simulation, TaskBundle};
use oracles::bfs;
use proptest::prelude::*;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn arb_bundle() -> impl Strategy<Value = Arc<TaskBundle>> {
    (0..Category::ALL.len(), 1..=3usize, 1..=3usize, 0..1000u64).prop_map(|(c, d, a, seed)| {
        Arc::new(assemble_bundle(Category::ALL[c], d, a, seed).expect("generation succeeds"))
    })
}

fn check_invariants(sim: &Simulation, plates: usize) -> Result<(), TestCaseError> {
    let w = sim.state();
    prop_assert_eq!(
        w.dispensed,
        w.food_count() + w.served_food,
        "food conservation"
    );
    prop_assert_eq!(w.plate_count(), plates, "plate conservation");
    let mut holders = HashMap::new();
    for s in &w.stations {
        if let Some(a) = s.busy_by {
            prop_assert!(
                holders.insert(a, &s.name).is_none(),
                "{} holds two stations",
                a
            );
            prop_assert!(sim.is_busy(a));
        }
    }
    Ok(())
}

/// Drives every idle agent with random legal-looking commands.
fn random_walk(
    bundle: &Arc<TaskBundle>,
    seed: u64,
    steps: usize,
) -> Result<Simulation, TestCaseError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sim = Simulation::new(bundle.clone());
    let plates = bundle.map.initial_plate_count();
    for _ in 0..steps {
        if !sim.is_running() {
            break;
        }
        let idle = sim.idle_agents();
        let Some(&agent) = idle.choose(&mut rng) else {
            break;
        };
        let legal = sim.legal_actions(agent).unwrap();
        let mut options = legal.station_actions();
        if let Some(c) = legal.reachable.choose(&mut rng) {
            options.push(Action::MoveTo { target: *c });
        }
        options.push(Action::wait(rng.random_range(1..4)));
        // Occasionally try something arbitrary to exercise rejections.
        if rng.random_bool(0.1) {
            let s = &bundle.map.stations()[rng.random_range(0..bundle.map.stations().len())];
            options.push(Action::process(s.name.clone()));
        }
        let action = options.choose(&mut rng).unwrap().clone();
        let before = sim.state().clone();
        let ev = sim.submit(agent, action).unwrap();
        if let Outcome::Rejected { .. } = ev.outcome {
            prop_assert_eq!(sim.state(), &before, "rejection changed state");
        }
        check_invariants(&sim, plates)?;
    }
    Ok(sim)
}

fn work_from_events(sim: &Simulation) -> Vec<u64> {
    let mut work = vec![0; sim.n_agents()];
    let mut started: HashMap<AgentId, u64> = HashMap::new();
    for ev in sim.events() {
        match ev.outcome {
            Outcome::Started => {
                started.insert(ev.agent, ev.clock);
            }
            Outcome::Completed => {
                if matches!(
                    ev.action,
                    Action::MoveTo { .. } | Action::Interact { .. } | Action::Process { .. }
                ) {
                    work[ev.agent.index()] += ev.clock - started[&ev.agent];
                }
            }
            Outcome::Rejected { .. } => {}
        }
    }
    work
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_play_keeps_world_invariants(bundle in arb_bundle(), seed in any::<u64>()) {
        let sim = random_walk(&bundle, seed, 300)?;
        let rec = sim.record();
        let work = work_from_events(&sim);
        for (a, stats) in rec.per_agent.iter().enumerate() {
            prop_assert_eq!(stats.work_time, work[a]);
        }
    }

    #[test]
    fn reference_plans_satisfy_accounting(bundle in arb_bundle()) {
        let workers = bundle.n_agents;
        let sol = solve(&bundle, workers).unwrap();
        let rec = execute(&bundle, &sol.plan);
        prop_assert!(rec.success);
        prop_assert_eq!(&rec, &execute(&bundle, &sol.plan));
        let last_completion = rec
            .events
            .iter()
            .filter(|e| e.outcome == Outcome::Completed)
            .map(|e| e.clock)
            .max()
            .unwrap_or(0);
        prop_assert!(rec.oct >= last_completion);
        for stats in &rec.per_agent {
            prop_assert!(stats.work_time <= rec.oct);
        }
        prop_assert!(rec.oct <= bundle.t_max);
    }

    #[test]
    fn paths_match_bfs(bundle in arb_bundle(), seed in any::<u64>()) {
        let map = &bundle.map;
        let floor: Vec<_> = map.floor_cells().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let a = *floor.choose(&mut rng).unwrap();
            let b = *floor.choose(&mut rng).unwrap();
            let path = shortest_path(map, a, b).unwrap();
            prop_assert_eq!(Some(path.len() as u32 - 1), bfs(map, a, b));
            prop_assert_eq!(path.first(), Some(&a));
            prop_assert_eq!(path.last(), Some(&b));
            for w in path.windows(2) {
                prop_assert_eq!(w[0].manhattan(w[1]), 1);
            }
            prop_assert_eq!(&path, &shortest_path(map, a, b).unwrap());
        }
    }
}
