use rand::Rng;

use super::bundle::MAX_DISHES;
use super::recipes::{recipes_in, Category};
use super::GenError;
use crate::world::OrderQueue;

/// Draws `n_dishes` recipes from `category`, uniformly with replacement.
pub fn sample_order<R: Rng + ?Sized>(
    category: Category,
    n_dishes: usize,
    rng: &mut R,
) -> Result<OrderQueue, GenError> {
    if !(1..=MAX_DISHES).contains(&n_dishes) {
        return Err(GenError::Dishes(n_dishes));
    }
    let menu = recipes_in(category);
    let dishes = (0..n_dishes)
        .map(|_| menu[rng.random_range(0..menu.len())].id.clone())
        .collect();
    Ok(OrderQueue::new(dishes))
}
