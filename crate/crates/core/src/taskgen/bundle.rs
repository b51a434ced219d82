use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::recipes::{Recipe, RecipeTier};
use crate::sim::rules::Rules;
use crate::world::{GridMap, MapError, StationKind, Time, TimeConstants};

pub const MAX_AGENTS: usize = 3;
pub const MAX_DISHES: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapSize {
    Small,
    Medium,
    Large,
}

impl MapSize {
    /// Bucket by number of floor cells.
    pub fn of(map: &GridMap) -> MapSize {
        match map.floor_cells().count() {
            n if n < 40 => MapSize::Small,
            n if n < 80 => MapSize::Medium,
            _ => MapSize::Large,
        }
    }
}

impl fmt::Display for MapSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MapSize::Small => "small",
            MapSize::Medium => "medium",
            MapSize::Large => "large",
        })
    }
}

/// Difficulty triple: recipe tier, number of dishes, map size.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Difficulty {
    pub c_recipe: RecipeTier,
    pub c_order: usize,
    pub c_map: MapSize,
}

impl Difficulty {
    /// Recomputes the label from bundle contents. The recipe tier is the
    /// hardest tier among ordered dishes.
    pub fn derive(recipes: &[Recipe], orders: &[String], map: &GridMap) -> Option<Difficulty> {
        let c_recipe = orders
            .iter()
            .map(|id| {
                recipes
                    .iter()
                    .find(|r| &r.id == id)
                    .map(|r| r.category.tier())
            })
            .collect::<Option<Vec<_>>>()?
            .into_iter()
            .max()?;
        Some(Difficulty {
            c_recipe,
            c_order: orders.len(),
            c_map: MapSize::of(map),
        })
    }
}

impl fmt::Display for Difficulty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.c_recipe, self.c_order, self.c_map)
    }
}

/// Optional rule extensions. None are implemented; bundles that enable
/// one are rejected.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Extensions {
    #[serde(default)]
    pub overcooking: bool,
    #[serde(default)]
    pub divided_kitchen: bool,
}

#[derive(Debug, Error)]
pub enum BundleError {
    #[error("bundle JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("map: {0}")]
    Map(#[from] MapError),
    #[error("time constant `{0}` must be positive")]
    Constant(&'static str),
    #[error("{0} agents requested; supported range is 1..={MAX_AGENTS}")]
    Agents(usize),
    #[error("map has {spawns} spawn point(s) for {agents} agent(s)")]
    Spawns { spawns: usize, agents: usize },
    #[error("{0} dishes requested; supported range is 1..={MAX_DISHES}")]
    Dishes(usize),
    #[error("order `{0}` has no recipe in the bundle")]
    UnknownRecipe(String),
    #[error("no {kind} on the map, but `{dish}` needs one")]
    MissingStation { kind: String, dish: String },
    #[error("no stove holds a {0}, but the orders need one")]
    MissingCookware(String),
    #[error("difficulty label {stored} does not match contents ({derived})")]
    Difficulty {
        stored: Difficulty,
        derived: Difficulty,
    },
    #[error("extension `{0}` is not supported")]
    Extension(&'static str),
    #[error("t_max must be positive")]
    TimeLimit,
}

/// One self-contained benchmark instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskBundle {
    pub id: String,
    pub map: GridMap,
    pub recipes: Vec<Recipe>,
    pub orders: Vec<String>,
    pub constants: TimeConstants,
    pub n_agents: usize,
    pub seed: u64,
    pub t_max: Time,
    pub d_max: u64,
    pub difficulty: Difficulty,
    #[serde(default)]
    pub extensions: Extensions,
}

impl TaskBundle {
    pub fn from_json(text: &str) -> Result<TaskBundle, BundleError> {
        let bundle: TaskBundle = serde_json::from_str(text)?;
        bundle.validate()?;
        Ok(bundle)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bundle serialization cannot fail")
    }

    pub fn recipe(&self, id: &str) -> Option<&Recipe> {
        self.recipes.iter().find(|r| r.id == id)
    }

    pub(crate) fn rules(&self) -> Rules<'_> {
        Rules {
            map: &self.map,
            constants: &self.constants,
            recipes: &self.recipes,
        }
    }

    pub fn validate(&self) -> Result<(), BundleError> {
        self.map.validate()?;
        if let Some(name) = self.constants.first_non_positive() {
            return Err(BundleError::Constant(name));
        }
        if !(1..=MAX_AGENTS).contains(&self.n_agents) {
            return Err(BundleError::Agents(self.n_agents));
        }
        let spawns = self.map.agent_spawns().len();
        if spawns < self.n_agents {
            return Err(BundleError::Spawns {
                spawns,
                agents: self.n_agents,
            });
        }
        if !(1..=MAX_DISHES).contains(&self.orders.len()) {
            return Err(BundleError::Dishes(self.orders.len()));
        }
        if self.t_max == 0 {
            return Err(BundleError::TimeLimit);
        }
        if self.extensions.overcooking {
            return Err(BundleError::Extension("overcooking"));
        }
        if self.extensions.divided_kitchen {
            return Err(BundleError::Extension("divided_kitchen"));
        }
        let present = |kind: &StationKind| self.map.stations().iter().any(|s| &s.kind == kind);
        let always = [
            StationKind::ServingWindow,
            StationKind::DirtyPlateReturn,
            StationKind::Sink,
        ];
        for dish in &self.orders {
            let recipe = self
                .recipe(dish)
                .ok_or_else(|| BundleError::UnknownRecipe(dish.clone()))?;
            for kind in recipe.station_kinds().iter().chain(&always) {
                if !present(kind) {
                    return Err(BundleError::MissingStation {
                        kind: kind.to_string(),
                        dish: dish.clone(),
                    });
                }
            }
            for cw in recipe.cookware() {
                let held = self.map.stations().iter().any(|s| {
                    s.initial
                        .iter()
                        .any(|i| i.as_cookware().is_some_and(|c| c.kind == cw))
                });
                if !held {
                    return Err(BundleError::MissingCookware(cw.to_string()));
                }
            }
        }
        let derived = Difficulty::derive(&self.recipes, &self.orders, &self.map)
            .expect("orders checked above");
        if derived != self.difficulty {
            return Err(BundleError::Difficulty {
                stored: self.difficulty,
                derived,
            });
        }
        Ok(())
    }
}
