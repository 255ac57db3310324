//! Small hand-built worlds and datasets used by tests, the acceptance suite and the CLI.
//!
//! Binary-state worlds use states `w1`, `w2` and write beliefs as `(1 - p, p)` where
//! `p` is the probability of `w2`.

use crate::dataset::{MenuObservation, SdscDataset, World};
use crate::mean::{MeanDataset, MeanObservation, MeanProblem, MeanWorld};
use crate::numeric::{int, q, Affine, Rational};

fn labels(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// Utility row `(f(0), f(1))` of a payoff that is affine in `p`.
fn line(intercept: Rational, slope: Rational) -> Vec<Rational> {
    let (lo, hi) = Affine::new(slope, intercept).endpoints();
    vec![lo, hi]
}

fn binary_world(actions: &[&str], utility: Vec<Vec<Rational>>) -> World {
    World::new(labels(&["w1", "w2"]), labels(actions), utility).expect("well formed world")
}

fn binary_prior(p: Rational) -> Vec<Rational> {
    vec![int(1) - &p, p]
}

fn zero2() -> Vec<Rational> {
    vec![int(0), int(0)]
}

/// Four actions with regions `[0,1/5]`, `[1/5,3/5]`, `[3/5,4/5]`, `[4/5,1]`.
pub fn example1_world() -> World {
    binary_world(
        &["a", "b", "c", "d"],
        vec![
            line(int(1), int(-1)),
            line(q(9, 10), q(-1, 2)),
            line(q(3, 5), int(0)),
            line(int(-1), int(2)),
        ],
    )
}

pub fn example1_sender() -> Vec<Vec<Rational>> {
    vec![
        line(q(3, 10), int(-1)),
        line(q(6, 5), int(-2)),
        line(q(-4, 5), int(2)),
        line(q(-23, 10), int(3)),
    ]
}

/// Posteriors 2/5 (action b, mass 3/4) and 4/5 (action c, mass 1/4) at prior 1/2.
pub fn example1() -> SdscDataset {
    SdscDataset {
        world: example1_world(),
        observations: vec![MenuObservation {
            menu: vec![0, 1, 2, 3],
            prior: binary_prior(q(1, 2)),
            sigma: vec![zero2(), vec![q(9, 10), q(3, 5)], vec![q(1, 10), q(2, 5)], zero2()],
        }],
    }
}

/// Posteriors 1/5 (b) and 4/5 (c), each with mass 1/2.
pub fn example1_consistent() -> SdscDataset {
    SdscDataset {
        world: example1_world(),
        observations: vec![MenuObservation {
            menu: vec![0, 1, 2, 3],
            prior: binary_prior(q(1, 2)),
            sigma: vec![zero2(), vec![q(4, 5), q(1, 5)], vec![q(1, 5), q(4, 5)], zero2()],
        }],
    }
}

/// Regions `[0,1/3]`, `[1/3,2/3]`, `[2/3,1]`.
pub fn example3_world() -> World {
    binary_world(
        &["a", "b", "c"],
        vec![line(int(2), int(-3)), line(int(1), int(0)), line(int(-1), int(3))],
    )
}

/// Three menus at prior 1/2 that NIAS accepts but no sender utility rationalizes.
pub fn example3() -> SdscDataset {
    let prior = binary_prior(q(1, 2));
    SdscDataset {
        world: example3_world(),
        observations: vec![
            MenuObservation {
                menu: vec![0, 1, 2],
                prior: prior.clone(),
                sigma: vec![vec![q(2, 3), q(1, 3)], zero2(), vec![q(1, 3), q(2, 3)]],
            },
            MenuObservation {
                menu: vec![0, 1],
                prior: prior.clone(),
                sigma: vec![vec![int(1), int(0)], vec![int(0), int(1)]],
            },
            MenuObservation {
                menu: vec![1, 2],
                prior,
                sigma: vec![vec![int(1), int(0)], vec![int(0), int(1)]],
            },
        ],
    }
}

/// Three states, uniform prior, the receiver's choice reveals the state.
pub fn example4() -> SdscDataset {
    let world = World::new(
        labels(&["w1", "w2", "w3"]),
        labels(&["a", "b", "c"]),
        vec![
            vec![int(0), int(0), int(0)],
            vec![int(-3), int(2), int(-3)],
            vec![int(-3), int(-3), int(2)],
        ],
    )
    .expect("well formed world");
    let third = q(1, 3);
    SdscDataset {
        world,
        observations: vec![MenuObservation {
            menu: vec![0, 1, 2],
            prior: vec![third.clone(), third.clone(), third],
            sigma: vec![
                vec![int(1), int(0), int(0)],
                vec![int(0), int(1), int(0)],
                vec![int(0), int(0), int(1)],
            ],
        }],
    }
}

/// Five actions, menus `{a1,a2,a5}` and `{a3,a4,a5}`, prior 3/10.
pub fn example5_world() -> World {
    binary_world(
        &["a1", "a2", "a3", "a4", "a5"],
        vec![
            line(q(1, 10), q(-1, 3)),
            zero2(),
            line(q(3, 10), int(-1)),
            zero2(),
            line(q(-3, 5), int(1)),
        ],
    )
}

pub fn example5_sender() -> Vec<Vec<Rational>> {
    vec![
        line(int(1), int(-2)),
        vec![q(1, 5), q(1, 5)],
        line(int(0), int(1)),
        vec![q(1, 5), q(1, 5)],
        zero2(),
    ]
}

/// The first menu splits the prior into full revelation (a1 at 0, a5 at 1); the second
/// keeps the prior and picks a3.
pub fn example5() -> SdscDataset {
    let prior = binary_prior(q(3, 10));
    SdscDataset {
        world: example5_world(),
        observations: vec![
            MenuObservation {
                menu: vec![0, 1, 4],
                prior: prior.clone(),
                sigma: vec![vec![int(1), int(0)], zero2(), vec![int(0), int(1)]],
            },
            MenuObservation {
                menu: vec![2, 3, 4],
                prior,
                sigma: vec![vec![int(1), int(1)], zero2(), zero2()],
            },
        ],
    }
}

/// Menu values that support the sender payoff in each [`example5`] menu.
pub fn example5_menu_values() -> Vec<Vec<Rational>> {
    vec![line(int(1), int(-1)), vec![q(3, 10), q(3, 10)]]
}

/// Sender likes the extreme actions and gets nothing from the middle one.
pub fn example6_sender() -> Vec<Vec<Rational>> {
    vec![vec![int(1), int(1)], zero2(), vec![int(1), int(1)]]
}

/// Full revelation at prior 1/2 in the three-action world of [`example3_world`].
pub fn example6_data() -> SdscDataset {
    SdscDataset {
        world: example3_world(),
        observations: vec![MenuObservation {
            menu: vec![0, 1, 2],
            prior: binary_prior(q(1, 2)),
            sigma: vec![vec![int(1), int(0)], zero2(), vec![int(0), int(1)]],
        }],
    }
}

pub fn binary_belief(p: Rational) -> Vec<Rational> {
    binary_prior(p)
}

fn mean_world(support: Vec<Rational>, actions: &[&str], utility: Vec<Affine>) -> MeanWorld {
    MeanWorld::new(support, labels(actions), utility).expect("well formed world")
}

/// Four actions with kinks at 0.3, 0.5, 0.7 and a prior uniform on `{0, 0.4, 0.6, 1}`.
pub fn figure4a() -> MeanProblem {
    let world = mean_world(
        vec![int(0), q(2, 5), q(3, 5), int(1)],
        &["a1", "a2", "a3", "a4"],
        vec![
            Affine::new(int(-3), int(3)),
            Affine::new(int(-1), q(12, 5)),
            Affine::new(int(1), q(7, 5)),
            Affine::new(int(3), int(0)),
        ],
    );
    MeanProblem {
        world,
        sender_utility: vec![
            Affine::new(q(-10, 3), int(2)),
            Affine::new(q(1, 10), q(97, 100)),
            Affine::new(q(-1, 10), q(107, 100)),
            Affine::new(q(10, 3), q(-4, 3)),
        ],
        menu: vec![0, 1, 2, 3],
        prior: vec![q(1, 4); 4],
    }
}

/// Four actions with kinks at 1/4, 1/2, 3/4 and the prior uniform on `{0, 1}`.
pub fn figure4b() -> MeanProblem {
    let world = mean_world(
        vec![int(0), int(1)],
        &["a1", "a2", "a3", "a4"],
        vec![
            Affine::new(int(-3), int(3)),
            Affine::new(int(-1), q(5, 2)),
            Affine::new(int(1), q(3, 2)),
            Affine::new(int(3), int(0)),
        ],
    );
    MeanProblem {
        world,
        sender_utility: vec![
            Affine::new(int(1), q(1, 4)),
            Affine::new(int(-1), q(3, 4)),
            Affine::new(int(1), q(-1, 4)),
            Affine::new(int(-1), q(5, 4)),
        ],
        menu: vec![0, 1, 2, 3],
        prior: vec![q(1, 2), q(1, 2)],
    }
}

/// Two actions split at 1/2 with revealed means 1/4 and 3/4 strictly inside their regions,
/// so pooling part of each atom at the prior mean keeps every action's mass and mean.
pub fn mean_interior_split() -> MeanDataset {
    let world = mean_world(
        vec![int(0), int(1)],
        &["low", "high"],
        vec![Affine::new(int(-1), int(1)), Affine::new(int(1), int(0))],
    );
    MeanDataset {
        world,
        observations: vec![MeanObservation {
            menu: vec![0, 1],
            prior: vec![q(1, 2), q(1, 2)],
            sigma: vec![vec![q(3, 4), q(1, 4)], vec![q(1, 4), q(3, 4)]],
        }],
    }
}
