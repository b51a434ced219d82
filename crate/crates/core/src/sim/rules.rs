//! Item-transfer and processing rules shared by every driver of the
//! simulation. Deciding is side-effect free; applying mutates the world.

use super::record::Rejection;
use crate::taskgen::Recipe;
use crate::world::{Cookware, Food, GridMap, Item, StationKind, Time, TimeConstants, WorldState};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum FoodSlot {
    HeldIngredient,
    HeldPlate,
    HeldCookware,
    TopIngredient,
    TopPlate,
    TopCookware,
}

/// What an accepted `Interact` does.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Transfer {
    Dispense(String),
    PickUp,
    PlaceDown,
    MoveFood { from: FoodSlot, to: FoodSlot },
    Serve,
}

/// What an accepted `Process` does when it completes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Operation {
    Chop,
    WashHeld,
    WashTop,
    /// Stand by a stove until the food in its cookware is done.
    Attend,
}

pub(crate) struct Rules<'a> {
    pub map: &'a GridMap,
    pub constants: &'a TimeConstants,
    pub recipes: &'a [Recipe],
}

impl Rules<'_> {
    fn recipe(&self, id: &str) -> Option<&Recipe> {
        self.recipes.iter().find(|r| r.id == id)
    }

    pub fn decide_interact(
        &self,
        world: &WorldState,
        agent: usize,
        station: usize,
    ) -> Result<Transfer, Rejection> {
        let def = self.map.station(station);
        let live = &world.stations[station];
        if live.busy_by.is_some() {
            return Err(Rejection::StationBusy(def.name.clone()));
        }
        let held = world.agents[agent].held.as_ref();
        match &def.kind {
            StationKind::Dispenser(ingredient) => match held {
                None => Ok(Transfer::Dispense(ingredient.clone())),
                Some(item) => Err(Rejection::HandsFull(item.to_string())),
            },
            StationKind::ServingWindow => self.decide_serve(world, held),
            kind => match (held, live.top()) {
                (None, None) => Err(Rejection::IllegalInteract(format!(
                    "`{}` holds nothing to pick up",
                    def.name
                ))),
                (None, Some(_)) => Ok(Transfer::PickUp),
                (Some(item), None) if kind.accepts(item) => Ok(Transfer::PlaceDown),
                (Some(item), None) => Err(Rejection::IllegalInteract(format!(
                    "{kind} `{}` cannot hold {item}",
                    def.name
                ))),
                (Some(item), Some(top)) => combine(kind, item, top),
            },
        }
    }

    fn decide_serve(&self, world: &WorldState, held: Option<&Item>) -> Result<Transfer, Rejection> {
        let plate = match held {
            Some(Item::Plate(p)) if !p.dirty && !p.contents.is_empty() => p,
            _ => {
                return Err(Rejection::IllegalInteract(
                    "only plated dishes can be served".into(),
                ))
            }
        };
        let orders = &world.orders;
        let Some(expected) = orders.next_dish() else {
            return Err(Rejection::IllegalInteract(
                "every order has already been served".into(),
            ));
        };
        if self
            .recipe(expected)
            .is_some_and(|r| r.matches_plate(&plate.contents))
        {
            return Ok(Transfer::Serve);
        }
        let later = orders.dishes[orders.next_index + 1..].iter().find(|d| {
            self.recipe(d)
                .is_some_and(|r| r.matches_plate(&plate.contents))
        });
        Err(match later {
            Some(dish) => Rejection::OutOfOrder {
                dish: dish.clone(),
                expected: expected.to_string(),
            },
            None => Rejection::WrongDish {
                expected: expected.to_string(),
            },
        })
    }

    pub fn decide_process(
        &self,
        world: &WorldState,
        agent: usize,
        station: usize,
    ) -> Result<(Operation, Time), Rejection> {
        let def = self.map.station(station);
        let live = &world.stations[station];
        if live.busy_by.is_some() {
            return Err(Rejection::StationBusy(def.name.clone()));
        }
        let illegal = |msg: String| Err(Rejection::IllegalProcess(msg));
        match &def.kind {
            StationKind::CuttingBoard => match live.top() {
                Some(Item::Ingredient(f)) if !f.chopped && !f.is_cooked() => {
                    Ok((Operation::Chop, self.constants.cut))
                }
                Some(Item::Ingredient(f)) => illegal(format!("{} is already chopped", f.name)),
                Some(other) => illegal(format!("cannot chop {other}")),
                None => illegal(format!("`{}` holds nothing to chop", def.name)),
            },
            StationKind::Sink => {
                let dirty = |i: Option<&Item>| matches!(i, Some(Item::Plate(p)) if p.dirty);
                if dirty(world.agents[agent].held.as_ref()) {
                    Ok((Operation::WashHeld, self.constants.wash_plate))
                } else if dirty(live.top()) {
                    Ok((Operation::WashTop, self.constants.wash_plate))
                } else {
                    illegal("no dirty plate to wash".into())
                }
            }
            StationKind::Stove => match live.top() {
                Some(Item::Cookware(c)) if c.is_cooking_pending() => {
                    let remaining = self.constants.cook_time(c.kind).saturating_sub(c.progress);
                    Ok((Operation::Attend, remaining.max(1)))
                }
                Some(Item::Cookware(c)) => illegal(format!("nothing is cooking in the {}", c.kind)),
                _ => illegal(format!("stove `{}` has no cookware", def.name)),
            },
            kind => illegal(format!("{kind} `{}` has no process", def.name)),
        }
    }

    /// Applies an accepted transfer. Returns the served dish id, if any.
    pub fn apply_interact(
        &self,
        world: &mut WorldState,
        agent: usize,
        station: usize,
        transfer: Transfer,
    ) -> Option<String> {
        match transfer {
            Transfer::Dispense(ingredient) => {
                world.agents[agent].held = Some(Item::Ingredient(Food::raw(ingredient)));
                world.dispensed += 1;
            }
            Transfer::PickUp => {
                world.agents[agent].held = world.stations[station].contents.pop();
            }
            Transfer::PlaceDown => {
                let item = world.agents[agent].held.take().expect("decided with item");
                world.stations[station].contents.push(item);
            }
            Transfer::MoveFood { from, to } => {
                let food = take_food(world, agent, station, from);
                put_food(world, agent, station, to, food);
            }
            Transfer::Serve => {
                let Some(Item::Plate(plate)) = world.agents[agent].held.take() else {
                    unreachable!("serve decided without a plate")
                };
                world.served_food += plate.contents.len() as u64;
                let dish = world.orders.dishes[world.orders.next_index].clone();
                world.orders.next_index += 1;
                let window = self.map.station(station).pos;
                if let Some(ret) = self.return_station_for(window) {
                    world.pending_returns.push(crate::world::PlateReturn {
                        due: world.clock + self.constants.dirty_plate_return,
                        station: ret,
                    });
                }
                return Some(dish);
            }
        }
        None
    }

    pub fn complete_process(
        &self,
        world: &mut WorldState,
        agent: usize,
        station: usize,
        op: Operation,
    ) {
        match op {
            Operation::Chop => {
                if let Some(Item::Ingredient(f)) = world.stations[station].top_mut() {
                    f.chopped = true;
                }
            }
            Operation::WashHeld => {
                if let Some(Item::Plate(p)) = world.agents[agent].held.as_mut() {
                    p.dirty = false;
                }
            }
            Operation::WashTop => {
                if let Some(Item::Plate(p)) = world.stations[station].top_mut() {
                    p.dirty = false;
                }
            }
            Operation::Attend => {}
        }
    }

    /// The dirty-plate return station closest to a serving window.
    fn return_station_for(&self, window: crate::world::Coord) -> Option<usize> {
        self.map
            .stations()
            .iter()
            .enumerate()
            .filter(|(_, s)| s.kind == StationKind::DirtyPlateReturn)
            .min_by_key(|(i, s)| (s.pos.manhattan(window), *i))
            .map(|(i, _)| i)
    }

    /// Advances autonomous cooking on every stove by `dt`.
    pub fn advance_cooking(&self, world: &mut WorldState, dt: Time) {
        if dt == 0 {
            return;
        }
        for (i, def) in self.map.stations().iter().enumerate() {
            if def.kind != StationKind::Stove {
                continue;
            }
            if let Some(Item::Cookware(c)) = world.stations[i].top_mut() {
                if c.is_cooking_pending() {
                    let need = self.constants.cook_time(c.kind);
                    c.progress = (c.progress + dt).min(need);
                    if c.progress >= need {
                        c.contents.as_mut().unwrap().cooked = Some(c.kind);
                    }
                }
            }
        }
    }
}

fn combine(kind: &StationKind, held: &Item, top: &Item) -> Result<Transfer, Rejection> {
    use FoodSlot::*;
    let refuse = |msg: String| Err(Rejection::IllegalInteract(msg));
    match (held, top) {
        (Item::Ingredient(_), Item::Plate(p)) if p.dirty => {
            refuse("a dirty plate cannot hold food".into())
        }
        (Item::Ingredient(f), Item::Plate(_)) if !f.is_cooked() => Ok(Transfer::MoveFood {
            from: HeldIngredient,
            to: TopPlate,
        }),
        (Item::Ingredient(f), Item::Cookware(c)) if c.contents.is_none() && !f.is_cooked() => {
            Ok(Transfer::MoveFood {
                from: HeldIngredient,
                to: TopCookware,
            })
        }
        (Item::Plate(hp), Item::Ingredient(f)) if !hp.dirty && !f.is_cooked() => {
            Ok(Transfer::MoveFood {
                from: TopIngredient,
                to: HeldPlate,
            })
        }
        (Item::Plate(hp), Item::Cookware(c)) if !hp.dirty => match &c.contents {
            Some(f) if f.is_cooked() => Ok(Transfer::MoveFood {
                from: TopCookware,
                to: HeldPlate,
            }),
            Some(f) => refuse(format!("{} in the {} is not cooked yet", f.name, c.kind)),
            None => refuse(format!("the {} is empty", c.kind)),
        },
        (Item::Cookware(hc), Item::Plate(p)) if !p.dirty && hc.has_cooked_food() => {
            Ok(Transfer::MoveFood {
                from: HeldCookware,
                to: TopPlate,
            })
        }
        (Item::Cookware(hc), Item::Ingredient(f)) if hc.contents.is_none() && !f.is_cooked() => {
            Ok(Transfer::MoveFood {
                from: TopIngredient,
                to: HeldCookware,
            })
        }
        (Item::Plate(a), Item::Plate(b))
            if ((a.is_clean_empty() && b.is_clean_empty()) || (a.dirty && b.dirty))
                && kind.accepts(held) =>
        {
            Ok(Transfer::PlaceDown)
        }
        _ => refuse(format!("cannot combine {held} with {top}")),
    }
}

fn take_food(world: &mut WorldState, agent: usize, station: usize, slot: FoodSlot) -> Food {
    let reset = |c: &mut Cookware| {
        c.progress = 0;
        c.contents.take().expect("decided with food")
    };
    match slot {
        FoodSlot::HeldIngredient => match world.agents[agent].held.take() {
            Some(Item::Ingredient(f)) => f,
            _ => unreachable!(),
        },
        FoodSlot::TopIngredient => match world.stations[station].contents.pop() {
            Some(Item::Ingredient(f)) => f,
            _ => unreachable!(),
        },
        FoodSlot::HeldCookware => match world.agents[agent].held.as_mut() {
            Some(Item::Cookware(c)) => reset(c),
            _ => unreachable!(),
        },
        FoodSlot::TopCookware => match world.stations[station].top_mut() {
            Some(Item::Cookware(c)) => reset(c),
            _ => unreachable!(),
        },
        FoodSlot::HeldPlate | FoodSlot::TopPlate => unreachable!("plates are never a source"),
    }
}

fn put_food(world: &mut WorldState, agent: usize, station: usize, slot: FoodSlot, food: Food) {
    let target = match slot {
        FoodSlot::HeldPlate | FoodSlot::HeldCookware => world.agents[agent].held.as_mut(),
        FoodSlot::TopPlate | FoodSlot::TopCookware => world.stations[station].top_mut(),
        _ => unreachable!("ingredients are never a destination"),
    };
    match target {
        Some(Item::Plate(p)) => p.contents.push(food),
        Some(Item::Cookware(c)) => {
            c.contents = Some(food);
            c.progress = 0;
        }
        _ => unreachable!(),
    }
}
