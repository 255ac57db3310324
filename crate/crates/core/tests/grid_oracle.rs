use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use persuasion::feasibility::{decide, Certificate};
use persuasion::forward::{brute_force_nbps, BruteForceOutcome};
use persuasion::numeric::Rational;
use persuasion::persuasion::{build_nbps_system, check_nbps, NbpsMode, Outcome};
use persuasion::random::{self, obedient_binary_dataset};

const GRID: u32 = 30;

/// The smallest integer multiple of `x`, if every entry fits in `0..=GRID`.
fn on_grid(x: &[Rational]) -> Option<Vec<BigInt>> {
    let denominator = x.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let scaled: Vec<BigInt> = x.iter().map(|v| (v * Rational::from_integer(denominator.clone())).to_integer()).collect();
    let g = scaled.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
    let primitive: Vec<BigInt> = scaled.iter().map(|v| v / &g).collect();
    primitive.iter().all(|v| *v <= BigInt::from(GRID)).then_some(primitive)
}

#[test]
fn grid_search_never_contradicts_the_system() {
    let (mut violated, mut on_grid_witnesses) = (0, 0);
    for seed in 0..50 {
        let data = obedient_binary_dataset(&mut random::rng(1000 + seed), 3, 3);
        let verdict = check_nbps(&data, &NbpsMode::StateDependent).unwrap();
        let grid = brute_force_nbps(&data, GRID).unwrap();
        assert_ne!(grid, BruteForceOutcome::Aborted, "seed {seed}: search budget exhausted");
        match verdict.outcome {
            Outcome::Consistent => {
                assert_eq!(grid, BruteForceOutcome::InconclusiveConsistent, "seed {seed}");
            }
            Outcome::Violated => {
                violated += 1;
                let built = build_nbps_system(&data, &NbpsMode::StateDependent).unwrap();
                let Certificate::PrimalWitness { x } = decide(&built.system).unwrap() else {
                    continue;
                };
                if on_grid(&x).is_some() {
                    on_grid_witnesses += 1;
                    assert!(matches!(grid, BruteForceOutcome::Violated { .. }), "seed {seed}");
                }
            }
        }
    }
    assert!(violated > 0 && on_grid_witnesses > 0, "instances exercise the violated branch");
}
