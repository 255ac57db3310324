#![allow(dead_code)]

use persuasion::dataset::SdscDataset;
use persuasion::forward::{generate_dataset, solve, SenderProblem};
use persuasion::numeric::{q, Rational};
use persuasion::persuasion::{check, validate_rationalizer, NbpsMode, SenderRationalization};
use persuasion::random::RoundTrip;

pub fn generated(rt: &RoundTrip) -> SdscDataset {
    generate_dataset(&rt.world, &rt.sender_utility, &rt.problems).expect("generation succeeds")
}

/// The rationalizer `check` extracts; panics unless the data pass.
pub fn extracted(data: &SdscDataset) -> SenderRationalization {
    let report = check(data, &NbpsMode::StateDependent).expect("check runs");
    report.decisive().state_rationalizer().cloned().expect("consistent data carry a rationalizer")
}

/// The generating sender together with the value hyperplanes of its optimal signals.
pub fn generating(rt: &RoundTrip) -> SenderRationalization {
    let menu_values = rt
        .problems
        .iter()
        .map(|(menu, prior)| {
            let problem = SenderProblem {
                world: rt.world.clone(),
                sender_utility: rt.sender_utility.clone(),
                menu: menu.clone(),
                prior: prior.clone(),
            };
            solve(&problem).expect("solvable").menu_value
        })
        .collect();
    SenderRationalization { sender_utility: rt.sender_utility.clone(), menu_values }
}

fn combine(x: &[Vec<Rational>], y: &[Vec<Rational>], f: impl Fn(&Rational, &Rational) -> Rational) -> Vec<Vec<Rational>> {
    x.iter().zip(y).map(|(a, b)| a.iter().zip(b).map(|(s, t)| f(s, t)).collect()).collect()
}

pub fn midpoint(r: &SenderRationalization, s: &SenderRationalization) -> SenderRationalization {
    let half = q(1, 2);
    let mid = |a: &Rational, b: &Rational| (a + b) * &half;
    SenderRationalization {
        sender_utility: combine(&r.sender_utility, &s.sender_utility, mid),
        menu_values: combine(&r.menu_values, &s.menu_values, mid),
    }
}

/// `alpha u + beta` with a per-state shift, applied to utilities and hyperplanes alike.
pub fn affine_image(r: &SenderRationalization, alpha: &Rational, beta: &[Rational]) -> SenderRationalization {
    let map = |rows: &[Vec<Rational>]| -> Vec<Vec<Rational>> {
        rows.iter().map(|row| row.iter().zip(beta).map(|(x, b)| alpha * x + b).collect()).collect()
    };
    SenderRationalization { sender_utility: map(&r.sender_utility), menu_values: map(&r.menu_values) }
}

/// Actions with zero choice probability in every observation they appear in.
pub fn never_chosen(data: &SdscDataset) -> Vec<usize> {
    (0..data.world.actions.len())
        .filter(|&a| {
            data.observations.iter().all(|o| match o.position(a) {
                Some(k) => o.sigma[k].iter().all(|x| *x == Rational::from_integer(0.into())),
                None => true,
            })
        })
        .collect()
}

pub fn valid(data: &SdscDataset, r: &SenderRationalization) -> bool {
    validate_rationalizer(data, r)
}
