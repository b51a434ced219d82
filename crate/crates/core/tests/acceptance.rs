//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test -p kitchen-core --test acceptance`.

mod oracles;

#[path = "../../sched/tests/support/brute.rs"]
mod brute;

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use kitchen_core::metrics::{score, TaskOutcome};
use kitchen_core::sim::{AgentStats, RunRecord};
use kitchen_core::taskgen::{
    assemble_bundle, assemble_for_orders, recipe_catalog, solve, Category,
};
use kitchen_core::world::{shortest_path, CookwareKind};
use kitchen_core::{execute, AgentId};
use kitchen_sched::{
    generate_instance, optimal_makespan, penalty, score_plan, validate, AbstractInstance, Profile,
    Schedule,
};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn within(limit: Duration, started: Instant, detail: String) -> Check {
    let took = started.elapsed();
    if took < limit {
        Ok(format!("{detail}; {:.2?} (limit {limit:?})", took))
    } else {
        Err(format!("{detail}; took {took:.2?}, limit {limit:?}"))
    }
}

fn determinism() -> Check {
    let started = Instant::now();
    let mut pairs = 0;
    for i in 0..100u64 {
        let cat = Category::ALL[i as usize % 6];
        let dishes = 1 + (i as usize / 6) % 4;
        let agents = 1 + (i as usize / 24) % 3;
        let bundle =
            Arc::new(assemble_bundle(cat, dishes, agents, 1000 + i).map_err(|e| e.to_string())?);
        let plan = solve(&bundle, agents)
            .map_err(|e| format!("{}: {e}", bundle.id))?
            .plan;
        let a = serde_json::to_vec(&execute(&bundle, &plan)).unwrap();
        let b = serde_json::to_vec(&execute(&bundle, &plan)).unwrap();
        if a != b {
            return Err(format!("{}: records differ", bundle.id));
        }
        pairs += 1;
    }
    within(
        Duration::from_secs(10),
        started,
        format!("{pairs} pairs byte-identical"),
    )
}

fn solvability() -> Check {
    let started = Instant::now();
    let (mut runs, mut wins) = (0, 0);
    let mut failures = Vec::new();
    for recipe in recipe_catalog() {
        for dishes in [1, 2] {
            for agents in [1, 2] {
                for seed in 0..5 {
                    runs += 1;
                    let orders = vec![recipe.id.clone(); dishes];
                    let outcome = assemble_for_orders(&orders, agents, seed)
                        .map_err(|e| e.to_string())
                        .and_then(|b| {
                            let b = Arc::new(b);
                            let sol = solve(&b, agents).map_err(|e| e.to_string())?;
                            let rec = execute(&b, &sol.plan);
                            if rec.success {
                                Ok(())
                            } else {
                                Err(format!("{:?}", rec.failure_reason))
                            }
                        });
                    match outcome {
                        Ok(()) => wins += 1,
                        Err(e) => {
                            failures.push(format!("{} x{dishes} a{agents} s{seed}: {e}", recipe.id))
                        }
                    }
                }
            }
        }
    }
    let detail = format!("SR {wins}/{runs}");
    if !failures.is_empty() {
        return Err(format!("{detail}; first failure {}", failures[0]));
    }
    within(Duration::from_secs(60), started, detail)
}

fn pathfinding() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut checked = 0;
    for m in 0..20u64 {
        let bundle = assemble_bundle(
            Category::ALL[m as usize % 6],
            1 + m as usize % 4,
            1,
            500 + m,
        )
        .map_err(|e| e.to_string())?;
        let map = &bundle.map;
        let floor: Vec<_> = map.floor_cells().collect();
        for _ in 0..50 {
            let a = *floor.choose(&mut rng).unwrap();
            let b = *floor.choose(&mut rng).unwrap();
            let cost = shortest_path(map, a, b).map_err(|e| e.to_string())?.len() as u32 - 1;
            let want = oracles::bfs(map, a, b);
            if Some(cost) != want {
                return Err(format!("{}: {a}->{b} cost {cost}, BFS {want:?}", bundle.id));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} pairs on 20 maps equal BFS"))
}

fn synthetic_record(rng: &mut ChaCha8Rng) -> (RunRecord, u64, u64) {
    let m = rng.random_range(1..=3);
    let t_max = rng.random_range(20..600);
    let d_max = rng.random_range(10..300);
    // The executor never reports success past t_max.
    let success = rng.random_bool(0.7);
    let oct = if success {
        rng.random_range(1..=t_max)
    } else {
        rng.random_range(0..=t_max)
    };
    let per_agent = (0..m)
        .map(|a| AgentStats {
            agent: AgentId(a),
            distance: rng.random_range(0..200),
            work_time: rng.random_range(0..=oct),
        })
        .collect();
    let record = RunRecord {
        success,
        oct,
        per_agent,
        served: Vec::new(),
        failure_reason: (!success).then(|| "timeout: synthetic".to_string()),
        events: Vec::new(),
    };
    (record, t_max, d_max)
}

fn metric_closed_forms() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let outcomes: Vec<TaskOutcome> = (0..200)
        .map(|_| {
            let (r, t, d) = synthetic_record(&mut rng);
            TaskOutcome::from_record(&r, t, d)
        })
        .collect();
    let got = score(&outcomes).map_err(|e| e.to_string())?;
    let want = oracles::reference_metrics(&outcomes);
    let mut worst: f64 = 0.0;
    let pairs = [
        ("SR", Some(got.sr), Some(want.sr)),
        ("pOCT", Some(got.poct), Some(want.poct)),
        ("nOCT", got.noct, want.noct),
        ("pMD", Some(got.pmd), Some(want.pmd)),
        ("AU", got.au, want.au),
    ];
    for (name, a, b) in pairs {
        match (a, b) {
            (Some(a), Some(b)) => {
                let e = oracles::rel_err(a, b);
                if e > 1e-12 {
                    return Err(format!("{name}: {a} vs {b}"));
                }
                worst = worst.max(e);
            }
            _ => return Err(format!("{name} missing")),
        }
    }
    // Per-record MD against the definition.
    let (md, _) = kitchen_core::metrics::movement(&outcomes).map_err(|e| e.to_string())?;
    for (o, md) in outcomes.iter().zip(md) {
        let want = o
            .success
            .then(|| o.distances.iter().sum::<u64>() as f64 / o.n_agents as f64);
        match (md, want) {
            (Some(a), Some(b)) if oracles::rel_err(a, b) <= 1e-12 => {}
            (None, None) => {}
            other => return Err(format!("MD mismatch {other:?}")),
        }
    }
    for o in outcomes.iter().filter(|o| o.success) {
        let r = o.oct as f64 / o.t_max.unwrap() as f64;
        if !(r > 0.0 && r <= 1.0) {
            return Err(format!("nOCT {r} outside (0, 1]"));
        }
    }
    // The timeout rule on real runs: a successful run never exceeds t_max.
    for seed in 0..20 {
        let mut b = assemble_bundle(Category::ALL[seed % 6], 1, 1, seed as u64)
            .map_err(|e| e.to_string())?;
        let full = solve(&Arc::new(b.clone()), 1).map_err(|e| e.to_string())?;
        b.t_max = full.record.oct - seed as u64 % 2;
        let rec = execute(&Arc::new(b.clone()), &full.plan);
        if rec.success && rec.oct > b.t_max {
            return Err(format!(
                "{}: success at {} past t_max {}",
                b.id, rec.oct, b.t_max
            ));
        }
    }
    Ok(format!("200 records, max relative error {worst:e}"))
}

fn small_instances() -> Vec<AbstractInstance> {
    let p = Profile::small_v1();
    (0..300)
        .map(|s| generate_instance(&p, s).unwrap())
        .collect()
}

fn brute_of(inst: &AbstractInstance) -> u64 {
    let g = inst.graph().unwrap();
    let mut edges = Vec::new();
    for (v, ps) in g.preds.iter().enumerate() {
        edges.extend(ps.iter().map(|&(u, d)| (u, v, d)));
    }
    brute::brute_makespan(&g.durations, &edges, inst.agents, inst.setup)
}

fn exact_solver() -> Check {
    let started = Instant::now();
    let instances = small_instances();
    for (i, inst) in instances.iter().enumerate() {
        if inst.n_tasks() > 8 || inst.agents > 3 {
            return Err(format!("instance {i} outside the size limits"));
        }
        let sol = optimal_makespan(inst).map_err(|e| e.to_string())?;
        let want = brute_of(inst);
        if sol.makespan != want || !sol.optimal {
            return Err(format!(
                "instance {i}: solver {} vs brute force {want}",
                sol.makespan
            ));
        }
    }
    within(
        Duration::from_secs(300),
        started,
        format!("{} instances agree", instances.len()),
    )
}

/// Breaks a valid schedule: everything on agent 0 at time 0.
fn broken(sched: &Schedule) -> Schedule {
    Schedule {
        assignment: vec![0; sched.assignment.len()],
        start: vec![0; sched.start.len()],
        makespan: 0,
        optimal: false,
    }
}

fn oracle_normalization() -> Check {
    let mut instances = small_instances();
    let p = Profile::abstract_v1();
    instances.extend((0..50).map(|s| generate_instance(&p, s).unwrap()));
    let mut penalised = 0;
    for (i, inst) in instances.iter().enumerate() {
        let sol = optimal_makespan(inst).map_err(|e| e.to_string())?;
        let opt = sol.makespan;
        if !validate(inst, &sol.schedule).unwrap().is_valid() {
            return Err(format!("instance {i}: oracle schedule invalid"));
        }
        let s = score_plan(inst, &sol.schedule, opt).unwrap();
        if s.noct != Some(1.0) {
            return Err(format!("instance {i}: oracle nOCT {:?}", s.noct));
        }
        let bad = broken(&sol.schedule);
        if !validate(inst, &bad).unwrap().is_valid() {
            let s = score_plan(inst, &bad, opt).unwrap();
            // 1.2 x opt exactly, checked in integers: 5 * pOCT = 6 * opt.
            if s.valid || s.poct * 5.0 != (opt * 6) as f64 || s.poct != penalty(opt) {
                return Err(format!(
                    "instance {i}: penalty {} for optimum {opt}",
                    s.poct
                ));
            }
            penalised += 1;
        }
    }
    if penalty(100) != 120.0 {
        return Err(format!("optimum 100 gives penalty {}", penalty(100)));
    }
    Ok(format!(
        "nOCT 1.0000 on {} instances; {penalised} invalid plans charged 1.2 x optimum",
        instances.len()
    ))
}

fn pause_resume() -> Check {
    let mut lines = Vec::new();
    for kind in [CookwareKind::Pot, CookwareKind::Pan] {
        let default = kitchen_core::TimeConstants::default().cook_time(kind);
        for cook in [default, 10, 15] {
            let (took, expected) = oracles::pause_resume(kind, cook);
            if took != expected {
                return Err(format!(
                    "{kind} cook {cook}: finished after {took}, expected {expected}"
                ));
            }
            lines.push(format!("{kind}/{cook}: {took}"));
        }
    }
    Ok(format!(
        "remaining time after resume = cook - progress ({})",
        lines.join(", ")
    ))
}

fn parallel_speedup() -> Check {
    let orders = [
        ["salad_basic", "sashimi_fish"],
        ["burger_basic", "salad_advanced"],
        ["sushi_fish", "burrito_meat"],
        ["pasta_tomato", "sashimi_shrimp"],
    ];
    let mut lines = Vec::new();
    for pair in orders {
        for seed in 0..5 {
            let orders: Vec<String> = pair.iter().map(|s| s.to_string()).collect();
            let b = Arc::new(assemble_for_orders(&orders, 2, seed).map_err(|e| e.to_string())?);
            let one = solve(&b, 1).map_err(|e| e.to_string())?.record;
            let two = solve(&b, 2).map_err(|e| e.to_string())?.record;
            if !(one.success && two.success && two.oct < one.oct) {
                return Err(format!(
                    "{}: 1 agent {} vs 2 agents {}",
                    b.id, one.oct, two.oct
                ));
            }
            if seed == 0 {
                lines.push(format!("{}+{} {}->{}", pair[0], pair[1], one.oct, two.oct));
            }
        }
    }
    Ok(format!(
        "2-agent OCT < 1-agent OCT on 20 bundles ({})",
        lines.join(", ")
    ))
}

type CheckFn = fn() -> Check;

fn main() -> ExitCode {
    let checks: [(&str, CheckFn); 8] = [
        ("simulator determinism", determinism),
        ("golden solvability", solvability),
        ("pathfinding oracle", pathfinding),
        ("metric closed forms", metric_closed_forms),
        ("exact solver vs brute force", exact_solver),
        ("oracle normalization and penalty", oracle_normalization),
        ("cook pause/resume", pause_resume),
        ("parallel speedup", parallel_speedup),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        match check() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    println!("{} passed, {failed} failed", checks.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
