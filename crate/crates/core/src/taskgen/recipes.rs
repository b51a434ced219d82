use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::world::{CookwareKind, Food, StationKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Burger,
    Burrito,
    Pasta,
    Salad,
    Sashimi,
    Sushi,
}

impl Category {
    pub const ALL: [Category; 6] = [
        Category::Burger,
        Category::Burrito,
        Category::Pasta,
        Category::Salad,
        Category::Sashimi,
        Category::Sushi,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Burger => "burger",
            Category::Burrito => "burrito",
            Category::Pasta => "pasta",
            Category::Salad => "salad",
            Category::Sashimi => "sashimi",
            Category::Sushi => "sushi",
        }
    }

    /// Recipe difficulty tier of the category.
    pub fn tier(self) -> RecipeTier {
        match self {
            Category::Salad | Category::Sashimi => RecipeTier::Easy,
            Category::Burger | Category::Sushi => RecipeTier::Medium,
            Category::Burrito | Category::Pasta => RecipeTier::Hard,
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Category::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown category `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecipeTier {
    Easy,
    Medium,
    Hard,
}

impl fmt::Display for RecipeTier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RecipeTier::Easy => "easy",
            RecipeTier::Medium => "medium",
            RecipeTier::Hard => "hard",
        })
    }
}

/// One item that must end up on the plate, and how it gets prepared.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Component {
    pub ingredient: String,
    #[serde(default)]
    pub chop: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cook: Option<CookwareKind>,
}

impl Component {
    fn raw(ingredient: &str) -> Self {
        Component {
            ingredient: ingredient.to_string(),
            chop: false,
            cook: None,
        }
    }

    fn chopped(ingredient: &str) -> Self {
        Component {
            chop: true,
            ..Component::raw(ingredient)
        }
    }

    fn chopped_then(ingredient: &str, cook: CookwareKind) -> Self {
        Component {
            chop: true,
            cook: Some(cook),
            ..Component::raw(ingredient)
        }
    }

    fn cooked(ingredient: &str, cook: CookwareKind) -> Self {
        Component {
            cook: Some(cook),
            ..Component::raw(ingredient)
        }
    }

    pub fn matches(&self, food: &Food) -> bool {
        food.name == self.ingredient && food.chopped == self.chop && food.cooked == self.cook
    }

    /// The finished food item this component describes.
    pub fn finished_food(&self) -> Food {
        Food {
            name: self.ingredient.clone(),
            chopped: self.chop,
            cooked: self.cook,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum CookStep {
    GetIngredient(String),
    Chop(String),
    CookInPot(String),
    CookInPan(String),
    Plate,
    Serve,
}

/// Dependency graph of preparation steps for one dish. Edges point from a
/// step to the steps that depend on it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Workflow {
    pub steps: Vec<CookStep>,
    pub edges: Vec<(usize, usize)>,
}

impl Workflow {
    /// Steps in a dependency-respecting order (Kahn's algorithm), or `None`
    /// if the graph has a cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.steps.len();
        let mut indeg = vec![0usize; n];
        for &(_, v) in &self.edges {
            indeg[v] += 1;
        }
        let mut ready: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(u) = ready.pop() {
            order.push(u);
            for &(a, b) in &self.edges {
                if a == u {
                    indeg[b] -= 1;
                    if indeg[b] == 0 {
                        ready.push(b);
                    }
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    /// Steps with no outgoing edges.
    pub fn sinks(&self) -> Vec<usize> {
        (0..self.steps.len())
            .filter(|&i| self.edges.iter().all(|&(u, _)| u != i))
            .collect()
    }

    pub fn predecessors(&self, step: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter(|&&(_, v)| v == step)
            .map(|&(u, _)| u)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recipe {
    pub id: String,
    pub category: Category,
    pub text: String,
    pub components: Vec<Component>,
}

impl Recipe {
    /// Builds the step graph: each component runs get → [chop] → [cook] and
    /// feeds the single plating step, which precedes serving.
    pub fn workflow(&self) -> Workflow {
        let mut steps = Vec::new();
        let mut edges = Vec::new();
        let mut tails = Vec::new();
        for c in &self.components {
            steps.push(CookStep::GetIngredient(c.ingredient.clone()));
            let mut last = steps.len() - 1;
            if c.chop {
                steps.push(CookStep::Chop(c.ingredient.clone()));
                edges.push((last, steps.len() - 1));
                last = steps.len() - 1;
            }
            if let Some(kind) = c.cook {
                steps.push(match kind {
                    CookwareKind::Pot => CookStep::CookInPot(c.ingredient.clone()),
                    CookwareKind::Pan => CookStep::CookInPan(c.ingredient.clone()),
                });
                edges.push((last, steps.len() - 1));
                last = steps.len() - 1;
            }
            tails.push(last);
        }
        steps.push(CookStep::Plate);
        let plate = steps.len() - 1;
        edges.extend(tails.into_iter().map(|t| (t, plate)));
        steps.push(CookStep::Serve);
        edges.push((plate, plate + 1));
        Workflow { steps, edges }
    }

    /// Whether a plate holding exactly `foods` (in any order) is this dish.
    pub fn matches_plate(&self, foods: &[Food]) -> bool {
        if foods.len() != self.components.len() {
            return false;
        }
        let mut used = vec![false; foods.len()];
        self.components.iter().all(|c| {
            match (0..foods.len()).find(|&i| !used[i] && c.matches(&foods[i])) {
                Some(i) => {
                    used[i] = true;
                    true
                }
                None => false,
            }
        })
    }

    /// Station kinds (besides the always-present service stations) this
    /// dish needs.
    pub fn station_kinds(&self) -> Vec<StationKind> {
        let mut kinds = Vec::new();
        for c in &self.components {
            kinds.push(StationKind::Dispenser(c.ingredient.clone()));
            if c.chop {
                kinds.push(StationKind::CuttingBoard);
            }
            if c.cook.is_some() {
                kinds.push(StationKind::Stove);
            }
        }
        kinds.sort();
        kinds.dedup();
        kinds
    }

    pub fn cookware(&self) -> Vec<CookwareKind> {
        let mut kinds: Vec<_> = self.components.iter().filter_map(|c| c.cook).collect();
        kinds.sort();
        kinds.dedup();
        kinds
    }
}

/// The fixed menu: twenty dishes in six categories.
pub fn recipe_catalog() -> Vec<Recipe> {
    use CookwareKind::{Pan, Pot};
    let r = |id: &str, category, text: &str, components| Recipe {
        id: id.to_string(),
        category,
        text: text.to_string(),
        components,
    };
    let raw = Component::raw;
    let chopped = Component::chopped;
    let pan = |i| Component::chopped_then(i, Pan);
    let pot = |i| Component::cooked(i, Pot);
    vec![
        r(
            "burger_basic",
            Category::Burger,
            "First chop the meat and cook it in pan. Then put the cooked meat with a piece of bread on a plate to make a basic burger.",
            vec![pan("meat"), raw("bread")],
        ),
        r(
            "burger_lettuce",
            Category::Burger,
            "Chop the meat and cook it in pan. Chop the lettuce. Then put the cooked meat, chopped lettuce with a piece of bread on a plate to make a burger with lettuce.",
            vec![pan("meat"), chopped("lettuce"), raw("bread")],
        ),
        r(
            "burger_full",
            Category::Burger,
            "Chop the meat and cook it in pan. Chop the lettuce and tomato. Then put the cooked meat, chopped lettuce, chopped tomato with a piece of bread on a plate to make a full burger.",
            vec![pan("meat"), chopped("lettuce"), chopped("tomato"), raw("bread")],
        ),
        r(
            "burger_cheese",
            Category::Burger,
            "Chop the meat and cook it in pan. Then put the cooked meat with a piece of bread and a slice of cheese on a plate to make a burger with cheese.",
            vec![pan("meat"), raw("bread"), raw("cheese")],
        ),
        r(
            "burger_cheese_lettuce",
            Category::Burger,
            "Chop the meat and cook it in pan. Chop the lettuce. Then put the cooked meat, chopped lettuce with a piece of bread and a slice of cheese on a plate to make a burger with cheese and lettuce.",
            vec![pan("meat"), chopped("lettuce"), raw("bread"), raw("cheese")],
        ),
        r(
            "burrito_meat",
            Category::Burrito,
            "Chop and cook the meat in pan, cook the rice in pot, then put cooked meat and cooked rice together with a raw tortilla to a plate to make a burrito with meat.",
            vec![pan("meat"), pot("rice"), raw("tortilla")],
        ),
        r(
            "burrito_chicken",
            Category::Burrito,
            "Chop and cook the chicken in pan, cook the rice in pot, then put cooked chicken and cooked rice together with a raw tortilla to a plate to make a burrito with chicken.",
            vec![pan("chicken"), pot("rice"), raw("tortilla")],
        ),
        r(
            "burrito_mushroom",
            Category::Burrito,
            "Chop and cook the mushroom in pan, cook the rice in pot, then put cooked mushroom and cooked rice together with a raw tortilla to a plate to make a burrito with mushroom.",
            vec![pan("mushroom"), pot("rice"), raw("tortilla")],
        ),
        r(
            "pasta_tomato",
            Category::Pasta,
            "Cook the pasta in pot, chop the tomato and cook it in pan, then put cooked pasta and cooked tomato together to a plate to make pasta with tomato pasta.",
            vec![pot("pasta"), pan("tomato")],
        ),
        r(
            "pasta_meat",
            Category::Pasta,
            "Cook the pasta in pot, chop the meat and cook it in pan, then put cooked pasta and cooked meat together to a plate to make pasta with meat sauce.",
            vec![pot("pasta"), pan("meat")],
        ),
        r(
            "pasta_mushroom",
            Category::Pasta,
            "Cook the pasta in pot, chop the mushroom and cook it in pan, then put cooked pasta and cooked mushroom together to a plate to make pasta with mushroom sauce.",
            vec![pot("pasta"), pan("mushroom")],
        ),
        r(
            "pasta_seafood",
            Category::Pasta,
            "Cook the pasta in pot, chop the fish and prawn and cook them in pan respectively, then put cooked pasta, cooked fish and cooked prawn together to a plate to make seafood pasta.",
            vec![pot("pasta"), pan("fish"), pan("prawn")],
        ),
        r(
            "salad_basic",
            Category::Salad,
            "Put chopped lettuce on a plate to make a salad.",
            vec![chopped("lettuce")],
        ),
        r(
            "salad_advanced",
            Category::Salad,
            "Put chopped lettuce and chopped tomato together to a plate to make a salad.",
            vec![chopped("lettuce"), chopped("tomato")],
        ),
        r(
            "salad_full",
            Category::Salad,
            "Put chopped lettuce, chopped tomato and chopped cucumber together to a plate to make a salad.",
            vec![chopped("lettuce"), chopped("tomato"), chopped("cucumber")],
        ),
        r(
            "sashimi_fish",
            Category::Sashimi,
            "Chop the fish and put the chopped fish to a plate to make sashimi with fish.",
            vec![chopped("fish")],
        ),
        r(
            "sashimi_shrimp",
            Category::Sashimi,
            "Chop the shrimp and put the chopped shrimp to a plate to make sashimi with shrimp.",
            vec![chopped("shrimp")],
        ),
        r(
            "sushi_fish",
            Category::Sushi,
            "First chop the fish and cook the rice. Then put the chopped fish and cooked rice and a piece of nori on a plate to make a fish sushi.",
            vec![chopped("fish"), pot("rice"), raw("nori")],
        ),
        r(
            "sushi_cucumber",
            Category::Sushi,
            "First chop the cucumber and cook the rice. Then put the chopped cucumber and cooked rice and a piece of nori on a plate to make a cucumber sushi.",
            vec![chopped("cucumber"), pot("rice"), raw("nori")],
        ),
        r(
            "sushi_full",
            Category::Sushi,
            "First chop the fish and cucumber and cook the rice. Then put the chopped fish, chopped cucumber and cooked rice and a piece of nori on a plate to make a full sushi.",
            vec![chopped("fish"), chopped("cucumber"), pot("rice"), raw("nori")],
        ),
    ]
}

pub fn recipes_in(category: Category) -> Vec<Recipe> {
    recipe_catalog()
        .into_iter()
        .filter(|r| r.category == category)
        .collect()
}

pub fn find_recipe(id: &str) -> Option<Recipe> {
    recipe_catalog().into_iter().find(|r| r.id == id)
}
