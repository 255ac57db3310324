//! Seeded random instances for property tests and the acceptance suite.
//!
//! Every probability and utility is a small-denominator rational so all checks stay exact.

use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::{MenuObservation, RevealedAtom, SdscDataset, World};
use crate::forward::observation_from_signal;
use crate::geometry::posterior_cover;
use crate::mean::{MeanProblemSet, MeanWorld};
use crate::numeric::{add_scaled, int, q, Affine, Rational};

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A multiple of 1/10 in `[-1, 1]`.
pub fn tenth(rng: &mut ChaCha8Rng) -> Rational {
    q(rng.gen_range(-10..=10), 10)
}

/// Full-support prior with integer weights in `1..=5`.
pub fn prior(rng: &mut ChaCha8Rng, n: usize) -> Vec<Rational> {
    let w: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=5)).collect();
    let total: i64 = w.iter().sum();
    w.into_iter().map(|k| q(k, total)).collect()
}

fn labels(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|k| format!("{prefix}{k}")).collect()
}

pub fn world(rng: &mut ChaCha8Rng, n_states: usize, n_actions: usize) -> World {
    let utility = (0..n_actions).map(|_| (0..n_states).map(|_| tenth(rng)).collect()).collect();
    World::new(labels("w", n_states), labels("a", n_actions), utility).expect("generated world")
}

pub fn sender(rng: &mut ChaCha8Rng, n_states: usize, n_actions: usize) -> Vec<Vec<Rational>> {
    (0..n_actions).map(|_| (0..n_states).map(|_| tenth(rng)).collect()).collect()
}

/// Between one and `max` distinct menus, each with at least two actions when possible.
pub fn menus(rng: &mut ChaCha8Rng, n_actions: usize, max: usize) -> Vec<Vec<usize>> {
    let count = rng.gen_range(1..=max);
    let mut out: BTreeSet<Vec<usize>> = BTreeSet::new();
    let all: Vec<usize> = (0..n_actions).collect();
    for _ in 0..count * 4 {
        if out.len() == count {
            break;
        }
        let size = rng.gen_range(n_actions.min(2)..=n_actions);
        let mut pick: Vec<usize> = all.choose_multiple(rng, size).copied().collect();
        pick.sort_unstable();
        out.insert(pick);
    }
    out.into_iter().collect()
}

/// A known sender with several menus at one prior, as used by the round-trip checks.
#[derive(Clone, Debug)]
pub struct RoundTrip {
    pub world: World,
    pub sender_utility: Vec<Vec<Rational>>,
    pub problems: Vec<(Vec<usize>, Vec<Rational>)>,
}

pub fn round_trip(rng: &mut ChaCha8Rng) -> RoundTrip {
    let n_states = rng.gen_range(2..=3);
    let n_actions = rng.gen_range(2..=5);
    let world = world(rng, n_states, n_actions);
    let sender_utility = sender(rng, n_states, n_actions);
    let p0 = prior(rng, n_states);
    let problems = menus(rng, n_actions, 3).into_iter().map(|m| (m, p0.clone())).collect();
    RoundTrip { world, sender_utility, problems }
}

/// Like [`round_trip`] but with an extra action strictly dominated in every state, offered
/// in every menu, so its region is empty everywhere.
pub fn round_trip_with_dominated(rng: &mut ChaCha8Rng) -> (RoundTrip, usize) {
    let mut rt = round_trip(rng);
    let n = rt.world.n_states();
    let floor: Vec<Rational> = (0..n)
        .map(|s| rt.world.receiver_utility.iter().map(|row| row[s].clone()).min().expect("actions") - int(1))
        .collect();
    let mut actions = rt.world.actions.clone();
    actions.push("dominated".into());
    let mut utility = rt.world.receiver_utility.clone();
    utility.push(floor);
    rt.world = World::new(rt.world.states.clone(), actions, utility).expect("generated world");
    rt.sender_utility.push((0..n).map(|_| tenth(rng)).collect());
    let d = rt.world.actions.len() - 1;
    for (menu, _) in rt.problems.iter_mut() {
        menu.push(d);
    }
    (rt, d)
}

/// One menu whose revealed posteriors obey the receiver: a split of the prior along a random
/// direction, or no information at all. Ties are broken at random, so boundary posteriors occur.
pub fn obedient_observation(rng: &mut ChaCha8Rng, world: &World, menu: &[usize], prior: &[Rational]) -> MenuObservation {
    let pooled = |a: usize| {
        let atoms = vec![RevealedAtom { action: a, posterior: prior.to_vec(), mass: Rational::one() }];
        observation_from_signal(menu, prior, &atoms)
    };
    let n = prior.len();
    if rng.gen_bool(0.2) {
        let best = world.receiver_best(menu, prior);
        return pooled(*best.choose(rng).expect("menu nonempty"));
    }
    let direction: Vec<Rational> = loop {
        let mut d: Vec<i64> = (0..n - 1).map(|_| rng.gen_range(-3..=3)).collect();
        d.push(-d.iter().sum::<i64>());
        if d.iter().any(|&x| x != 0) {
            break d.into_iter().map(int).collect();
        }
    };
    // Largest t with prior + t d still a belief, then a random fraction of it.
    let mut reach = |sign: i64| -> Rational {
        let t_max = prior
            .iter()
            .zip(&direction)
            .filter(|(_, d)| (*d * int(sign)).is_negative())
            .map(|(p, d)| p / (-(d * int(sign))))
            .min()
            .expect("direction sums to zero");
        t_max * q(rng.gen_range(1..=4), 4)
    };
    let (s, r) = (reach(1), reach(-1));
    let mut up = prior.to_vec();
    add_scaled(&mut up, &direction, &s);
    let mut down = prior.to_vec();
    add_scaled(&mut down, &direction, &-r.clone());
    let a = *world.receiver_best(menu, &up).choose(rng).expect("menu nonempty");
    let b = *world.receiver_best(menu, &down).choose(rng).expect("menu nonempty");
    if a == b {
        return pooled(a);
    }
    let total = &s + &r;
    let atoms = vec![
        RevealedAtom { action: a, posterior: up, mass: &r / &total },
        RevealedAtom { action: b, posterior: down, mass: &s / &total },
    ];
    observation_from_signal(menu, prior, &atoms)
}

/// Obedient data on `n_states` states with up to `max_menus` menus at one prior.
pub fn obedient_dataset(rng: &mut ChaCha8Rng, n_states: usize, max_actions: usize, max_menus: usize) -> SdscDataset {
    let n_actions = rng.gen_range(2..=max_actions);
    let world = world(rng, n_states, n_actions);
    let p0 = prior(rng, n_states);
    let observations = menus(rng, n_actions, max_menus)
        .iter()
        .map(|m| obedient_observation(rng, &world, m, &p0))
        .collect();
    SdscDataset { world, observations }
}

/// Binary-state obedient data, as used by the grid-search comparison.
pub fn obedient_binary_dataset(rng: &mut ChaCha8Rng, max_actions: usize, max_menus: usize) -> SdscDataset {
    obedient_dataset(rng, 2, max_actions, max_menus)
}

/// Single menu, obedient by construction, on two or three states.
pub fn single_menu(rng: &mut ChaCha8Rng) -> SdscDataset {
    let n = rng.gen_range(2..=3);
    obedient_dataset(rng, n, 4, 1)
}

/// Random mean world and sender with a few menus at a common prior; `|Z| <= max_support`.
pub fn mean_problem_set(rng: &mut ChaCha8Rng, max_support: usize) -> MeanProblemSet {
    let inner = rng.gen_range(0..=max_support.saturating_sub(2));
    let mut support: BTreeSet<Rational> = BTreeSet::from([Rational::zero(), Rational::one()]);
    while support.len() < inner + 2 {
        support.insert(q(rng.gen_range(1..10), 10));
    }
    let support: Vec<Rational> = support.into_iter().collect();
    let n_actions = rng.gen_range(2..=4);
    let affine = |rng: &mut ChaCha8Rng| Affine::new(tenth(rng) * int(2), tenth(rng));
    let receiver: Vec<Affine> = (0..n_actions).map(|_| affine(rng)).collect();
    let sender: Vec<Affine> = (0..n_actions).map(|_| affine(rng)).collect();
    let world = MeanWorld::new(support, labels("a", n_actions), receiver).expect("generated world");
    let pmf = prior(rng, world.support.len());
    let problems = menus(rng, n_actions, 3).into_iter().map(|m| (m, pmf.clone())).collect();
    MeanProblemSet { world, sender_utility: sender, problems }
}

/// Uniformly drawn belief on the simplex with denominator `den`.
pub fn grid_belief(rng: &mut ChaCha8Rng, n: usize, den: i64) -> Vec<Rational> {
    let mut cuts: Vec<i64> = (0..n - 1).map(|_| rng.gen_range(0..=den)).collect();
    cuts.sort_unstable();
    let mut out = Vec::with_capacity(n);
    let mut last = 0;
    for c in cuts {
        out.push(q(c - last, den));
        last = c;
    }
    out.push(q(den - last, den));
    out
}

/// Outer points of every menu, for checks that only need geometry.
pub fn outer_points(world: &World, menu: &[usize]) -> Vec<Vec<Rational>> {
    posterior_cover(world, menu).outer_points
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::validate;
    use crate::persuasion::check_nias;

    #[test]
    fn generators_are_deterministic_and_valid() {
        let a = round_trip(&mut rng(7));
        let b = round_trip(&mut rng(7));
        assert_eq!(a.world, b.world);
        assert_eq!(a.problems, b.problems);
        for seed in 0..20 {
            let d = obedient_dataset(&mut rng(seed), 2 + seed as usize % 2, 4, 3);
            assert!(validate(&d).is_empty());
            assert!(check_nias(&d).unwrap().is_consistent());
        }
    }

    #[test]
    fn grid_beliefs_are_distributions() {
        let mut r = rng(3);
        for _ in 0..50 {
            let p = grid_belief(&mut r, 3, 12);
            assert!(crate::numeric::is_distribution(&p));
        }
    }
}
