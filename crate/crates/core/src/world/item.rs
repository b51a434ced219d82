use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CookwareKind {
    Pot,
    Pan,
}

impl fmt::Display for CookwareKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CookwareKind::Pot => "pot",
            CookwareKind::Pan => "pan",
        })
    }
}

/// A single piece of food. Chopping happens at most once and always before
/// cooking; `cooked` records which cookware finished it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Food {
    pub name: String,
    #[serde(default)]
    pub chopped: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cooked: Option<CookwareKind>,
}

/// Coarse processing state of a food item, as shown to players.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FoodState {
    Raw,
    Chopped,
    Cooking,
    Cooked,
}

impl Food {
    pub fn raw(name: impl Into<String>) -> Self {
        Food {
            name: name.into(),
            chopped: false,
            cooked: None,
        }
    }

    pub fn is_cooked(&self) -> bool {
        self.cooked.is_some()
    }

    pub fn state(&self) -> FoodState {
        match (self.chopped, self.cooked) {
            (_, Some(_)) => FoodState::Cooked,
            (true, None) => FoodState::Chopped,
            (false, None) => FoodState::Raw,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Plate {
    #[serde(default)]
    pub dirty: bool,
    #[serde(default)]
    pub contents: Vec<Food>,
}

impl Plate {
    pub fn is_clean_empty(&self) -> bool {
        !self.dirty && self.contents.is_empty()
    }
}

/// A pot or pan. Holds at most one food item; `progress` counts cooking time
/// already spent on a stove and survives being picked up.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cookware {
    pub kind: CookwareKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contents: Option<Food>,
    #[serde(default)]
    pub progress: u64,
}

impl Cookware {
    pub fn empty(kind: CookwareKind) -> Self {
        Cookware {
            kind,
            contents: None,
            progress: 0,
        }
    }

    /// True while the cookware holds food that still needs heat.
    pub fn is_cooking_pending(&self) -> bool {
        self.contents.as_ref().is_some_and(|f| !f.is_cooked())
    }

    pub fn has_cooked_food(&self) -> bool {
        self.contents.as_ref().is_some_and(Food::is_cooked)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Item {
    Ingredient(Food),
    Plate(Plate),
    Cookware(Cookware),
}

impl Item {
    pub fn clean_plate() -> Item {
        Item::Plate(Plate::default())
    }

    pub fn dirty_plate() -> Item {
        Item::Plate(Plate {
            dirty: true,
            contents: Vec::new(),
        })
    }

    pub fn cookware(kind: CookwareKind) -> Item {
        Item::Cookware(Cookware::empty(kind))
    }

    pub fn as_plate(&self) -> Option<&Plate> {
        match self {
            Item::Plate(p) => Some(p),
            _ => None,
        }
    }

    pub fn as_cookware(&self) -> Option<&Cookware> {
        match self {
            Item::Cookware(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_plate(&self) -> bool {
        matches!(self, Item::Plate(_))
    }

    /// Number of food items carried by this item, including itself.
    pub fn food_count(&self) -> usize {
        match self {
            Item::Ingredient(_) => 1,
            Item::Plate(p) => p.contents.len(),
            Item::Cookware(c) => usize::from(c.contents.is_some()),
        }
    }
}

impl fmt::Display for Item {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Item::Ingredient(food) => write!(f, "{} ({:?})", food.name, food.state()),
            Item::Plate(p) if p.dirty => f.write_str("dirty plate"),
            Item::Plate(p) => write!(f, "plate with {} item(s)", p.contents.len()),
            Item::Cookware(c) => match &c.contents {
                Some(food) => write!(f, "{} with {}", c.kind, food.name),
                None => write!(f, "empty {}", c.kind),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn item_json_shorthand() {
        let plate: Item = serde_json::from_str(r#"{"type":"plate"}"#).unwrap();
        assert_eq!(plate, Item::clean_plate());
        let pot: Item = serde_json::from_str(r#"{"type":"cookware","kind":"pot"}"#).unwrap();
        assert_eq!(pot, Item::cookware(CookwareKind::Pot));
        let lettuce: Item =
            serde_json::from_str(r#"{"type":"ingredient","name":"lettuce","chopped":true}"#)
                .unwrap();
        match lettuce {
            Item::Ingredient(f) => assert_eq!(f.state(), FoodState::Chopped),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn cookware_flags() {
        let mut pan = Cookware::empty(CookwareKind::Pan);
        assert!(!pan.is_cooking_pending());
        pan.contents = Some(Food::raw("meat"));
        assert!(pan.is_cooking_pending());
        pan.contents.as_mut().unwrap().cooked = Some(CookwareKind::Pan);
        assert!(pan.has_cooked_food());
    }
}
