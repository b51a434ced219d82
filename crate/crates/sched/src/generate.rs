//! Seeded random layered DAG instances.

use std::ops::RangeInclusive;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::AbstractInstance;

/// Generation parameters. Tasks are split into layers of random width;
/// each task in one layer depends on each task of the next with
/// probability `density`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub name: String,
    pub tasks: RangeInclusive<usize>,
    pub layer_width: RangeInclusive<usize>,
    pub density: f64,
    pub duration: RangeInclusive<u64>,
    pub delay_prob: f64,
    pub delay: RangeInclusive<u64>,
    pub agents: Vec<usize>,
    #[serde(default)]
    pub setup: u64,
}

#[derive(Debug, Error, PartialEq)]
pub enum ProfileError {
    #[error("unknown profile `{0}`")]
    Unknown(String),
    #[error("profile `{name}`: {reason}")]
    Infeasible { name: String, reason: String },
}

impl Profile {
    /// The default benchmark profile: 8 to 16 tasks, two or three agents,
    /// delays on roughly 30% of edges.
    pub fn abstract_v1() -> Profile {
        Profile {
            name: "abstract-v1".into(),
            tasks: 8..=16,
            layer_width: 1..=4,
            density: 0.35,
            duration: 1..=10,
            delay_prob: 0.3,
            delay: 1..=5,
            agents: vec![2, 3],
            setup: 0,
        }
    }

    /// Small instances that brute force can still enumerate.
    pub fn small_v1() -> Profile {
        Profile {
            name: "small-v1".into(),
            tasks: 2..=8,
            layer_width: 1..=3,
            density: 0.4,
            duration: 1..=6,
            delay_prob: 0.3,
            delay: 1..=4,
            agents: vec![1, 2, 3],
            setup: 0,
        }
    }

    pub fn named(name: &str) -> Result<Profile, ProfileError> {
        match name {
            "abstract-v1" => Ok(Profile::abstract_v1()),
            "small-v1" => Ok(Profile::small_v1()),
            _ => Err(ProfileError::Unknown(name.to_string())),
        }
    }

    pub fn check(&self) -> Result<(), ProfileError> {
        let bad = |reason: &str| {
            Err(ProfileError::Infeasible {
                name: self.name.clone(),
                reason: reason.to_string(),
            })
        };
        if self.tasks.is_empty() || *self.tasks.start() == 0 {
            return bad("task range must be nonempty and positive");
        }
        if self.layer_width.is_empty() || *self.layer_width.start() == 0 {
            return bad("layer width range must be nonempty and positive");
        }
        if self.duration.is_empty() || *self.duration.start() == 0 {
            return bad("durations must be positive");
        }
        if self.delay.is_empty() {
            return bad("delay range is empty");
        }
        if !(0.0..=1.0).contains(&self.density) || !(0.0..=1.0).contains(&self.delay_prob) {
            return bad("probabilities must lie in [0, 1]");
        }
        if self.agents.is_empty() || self.agents.contains(&0) {
            return bad("agent counts must be positive");
        }
        Ok(())
    }
}

pub fn generate_instance(profile: &Profile, seed: u64) -> Result<AbstractInstance, ProfileError> {
    profile.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(profile.tasks.clone());
    let mut layers: Vec<Vec<usize>> = Vec::new();
    let mut next = 0;
    while next < n {
        let width = rng.random_range(profile.layer_width.clone()).min(n - next);
        layers.push((next..next + width).collect());
        next += width;
    }
    let durations: Vec<u64> = (0..n)
        .map(|_| rng.random_range(profile.duration.clone()))
        .collect();
    let mut edges = Vec::new();
    for pair in layers.windows(2) {
        for &u in &pair[0] {
            for &v in &pair[1] {
                if rng.random_bool(profile.density) {
                    let d = if rng.random_bool(profile.delay_prob) {
                        rng.random_range(profile.delay.clone())
                    } else {
                        0
                    };
                    edges.push((u, v, d));
                }
            }
        }
    }
    let agents = *profile.agents.choose(&mut rng).expect("checked nonempty");
    let mut inst = AbstractInstance::from_parts(&durations, &edges, agents);
    inst.setup = profile.setup;
    Ok(inst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_profiles() {
        assert_eq!(
            Profile::named("abstract-v1").unwrap(),
            Profile::abstract_v1()
        );
        assert!(matches!(
            Profile::named("nope"),
            Err(ProfileError::Unknown(_))
        ));
    }

    #[test]
    fn generation_is_seeded() {
        let p = Profile::abstract_v1();
        assert_eq!(generate_instance(&p, 3), generate_instance(&p, 3));
        let inst = generate_instance(&p, 3).unwrap();
        assert!((8..=16).contains(&inst.n_tasks()));
        assert!([2, 3].contains(&inst.agents));
    }

    #[test]
    fn density_zero_gives_independent_tasks() {
        let mut p = Profile::abstract_v1();
        p.density = 0.0;
        for seed in 0..20 {
            assert!(generate_instance(&p, seed).unwrap().edges.is_empty());
        }
    }

    #[test]
    fn full_density_single_width_is_a_chain() {
        let mut p = Profile::abstract_v1();
        p.density = 1.0;
        p.layer_width = 1..=1;
        for seed in 0..20 {
            let inst = generate_instance(&p, seed).unwrap();
            let g = inst.graph().unwrap();
            assert_eq!(inst.edges.len(), inst.n_tasks() - 1);
            let serial: u64 =
                g.durations.iter().sum::<u64>() + inst.edges.iter().map(|e| e.d).sum::<u64>();
            assert_eq!(g.critical_path(), serial);
        }
    }

    #[test]
    fn infeasible_profiles() {
        let mut p = Profile::small_v1();
        p.duration = 0..=3;
        assert!(matches!(
            generate_instance(&p, 0),
            Err(ProfileError::Infeasible { .. })
        ));
        let mut p = Profile::small_v1();
        p.agents.clear();
        assert!(generate_instance(&p, 0).is_err());
        let mut p = Profile::small_v1();
        p.density = 1.5;
        assert!(generate_instance(&p, 0).is_err());
    }
}
