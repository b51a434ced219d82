//! Task generation: the recipe menu, order sampling, map synthesis,
//! bundle assembly and the scripted reference solver.

mod bundle;
mod mapgen;
mod order;
mod recipes;
pub mod solver;

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use bundle::{
    BundleError, Difficulty, Extensions, MapSize, TaskBundle, MAX_AGENTS, MAX_DISHES,
};
pub use mapgen::{generate_map, pick_size, required_stations, StationRequest};
pub use order::sample_order;
pub use recipes::{
    find_recipe, recipe_catalog, recipes_in, Category, Component, CookStep, Recipe, RecipeTier,
    Workflow,
};
pub use solver::{solve, Solution, SolveError};

use crate::world::{Time, TimeConstants};

/// Layouts tried before giving up on a bundle.
const BUNDLE_ATTEMPTS: usize = 20;
/// Time limit used while measuring the reference solver.
const PROBE_T_MAX: Time = 1_000_000;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("{0} dishes requested; supported range is 1..={MAX_DISHES}")]
    Dishes(usize),
    #[error("{0} agents requested; supported range is 1..={MAX_AGENTS}")]
    Agents(usize),
    #[error("{width}x{height} grid cannot host {stations} stations")]
    MapTooSmall {
        width: usize,
        height: usize,
        stations: usize,
    },
    #[error("unknown recipe `{0}`")]
    UnknownRecipe(String),
    #[error("no valid layout after {0} attempts")]
    MapAttempts(usize),
    #[error("reference solver failed on {attempts} layouts; last error: {last}")]
    Unsolvable { attempts: usize, last: String },
}

pub fn bundle_id(category: Category, n_dishes: usize, n_agents: usize, seed: u64) -> String {
    format!("{category}-d{n_dishes}-a{n_agents}-s{seed}")
}

/// Builds the benchmark instance for `(category, n_dishes, n_agents, seed)`.
/// Every draw comes from one generator seeded with `seed`. Layouts the
/// reference solver cannot finish are discarded. The stored limits are
/// three times the single-agent reference run's completion time and
/// travel distance.
pub fn assemble_bundle(
    category: Category,
    n_dishes: usize,
    n_agents: usize,
    seed: u64,
) -> Result<TaskBundle, GenError> {
    if !(1..=MAX_AGENTS).contains(&n_agents) {
        return Err(GenError::Agents(n_agents));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let orders = sample_order(category, n_dishes, &mut rng)?.dishes;
    let id = bundle_id(category, n_dishes, n_agents, seed);
    build(id, orders, n_agents, seed, &mut rng)
}

/// Builds an instance for an explicit list of recipe ids, served in order.
pub fn assemble_for_orders(
    orders: &[String],
    n_agents: usize,
    seed: u64,
) -> Result<TaskBundle, GenError> {
    if !(1..=MAX_AGENTS).contains(&n_agents) {
        return Err(GenError::Agents(n_agents));
    }
    if !(1..=MAX_DISHES).contains(&orders.len()) {
        return Err(GenError::Dishes(orders.len()));
    }
    let first = orders[0].replace('_', "-");
    let id = format!("{first}-d{}-a{n_agents}-s{seed}", orders.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    build(id, orders.to_vec(), n_agents, seed, &mut rng)
}

fn build(
    id: String,
    orders: Vec<String>,
    n_agents: usize,
    seed: u64,
    rng: &mut ChaCha8Rng,
) -> Result<TaskBundle, GenError> {
    let catalog = recipe_catalog();
    let mut dishes: Vec<&Recipe> = Vec::with_capacity(orders.len());
    for id in &orders {
        match catalog.iter().find(|r| &r.id == id) {
            Some(r) => dishes.push(r),
            None => return Err(GenError::UnknownRecipe(id.clone())),
        }
    }
    let mut recipes: Vec<Recipe> = Vec::new();
    for r in &dishes {
        if !recipes.iter().any(|k| k.id == r.id) {
            recipes.push((*r).clone());
        }
    }
    let requests = required_stations(&dishes);

    let mut last = String::new();
    for _ in 0..BUNDLE_ATTEMPTS {
        let size = pick_size(requests.len(), rng);
        let map = generate_map(&requests, n_agents, size, rng)?;
        let difficulty =
            Difficulty::derive(&recipes, &orders, &map).expect("orders come from recipes");
        let mut bundle = TaskBundle {
            id: id.clone(),
            map,
            recipes: recipes.clone(),
            orders: orders.clone(),
            constants: TimeConstants::default(),
            n_agents,
            seed,
            t_max: PROBE_T_MAX,
            d_max: 0,
            difficulty,
            extensions: Default::default(),
        };
        match solve(&Arc::new(bundle.clone()), 1) {
            Ok(sol) => {
                bundle.t_max = 3 * sol.record.oct.max(1);
                bundle.d_max = 3 * sol.record.per_agent[0].distance.max(1);
                return Ok(bundle);
            }
            Err(e) => last = e.to_string(),
        }
    }
    Err(GenError::Unsolvable {
        attempts: BUNDLE_ATTEMPTS,
        last,
    })
}
