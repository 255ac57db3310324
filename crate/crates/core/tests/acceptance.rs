//! One PASS/FAIL line per acceptance criterion. Every comparison is exact rational
//! equality or an exact count, so the tolerance on every criterion is zero.

mod common;

use std::process::ExitCode;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use persuasion::dataset::{is_informative, revealed_signal};
use persuasion::examples;
use persuasion::feasibility::{decide, Certificate};
use persuasion::forward::{benefits_from_persuasion, brute_force_nbps, generate_dataset, BruteForceOutcome, SenderProblem};
use persuasion::mean::{check_mean, mean_benefit, mean_generate_dataset, mean_solve, validate_mean_rationalizer};
use persuasion::numeric::{int, q, Rational};
use persuasion::persuasion::{
    build_nbps_system, check, check_nbps, check_single_menu, replay_verdict, verify_reallocation, BalancedSignal,
    MenuReallocation, NbpsMode, Outcome, Rationalizer, SenderRationalization, Witness, WitnessAtom,
};
use persuasion::random::{self, mean_problem_set, obedient_binary_dataset, round_trip, round_trip_with_dominated};

type Check = Result<String, String>;
/// (observation, removed (action, p), added (action, p)) with p the weight on w2.
type MenuPattern = (usize, Vec<(usize, Vec<Rational>)>, Vec<(usize, Vec<Rational>)>);
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, what: impl Into<String>) -> Result<(), String> {
    if ok { Ok(()) } else { Err(what.into()) }
}

fn p(x: i64, y: i64) -> Vec<Rational> {
    examples::binary_belief(q(x, y))
}

fn criterion_1() -> Check {
    let verdict = check_nbps(&examples::example1(), &NbpsMode::StateDependent).map_err(|e| e.to_string())?;
    let Some(Witness::Reallocation(w)) = &verdict.witness else {
        return Err("example 1 is not violated by a reallocation".into());
    };
    ensure(w.menus.len() == 1, "witness touches one menu")?;
    let added: Vec<(Vec<Rational>, Rational)> =
        w.menus[0].added_distribution().into_iter().map(|a| (a.posterior, a.weight)).collect();
    let expected = vec![(p(1, 5), q(1, 3)), (p(1, 2), q(2, 3))];
    let mut sorted = added.clone();
    sorted.sort();
    let mut want = expected.clone();
    want.sort();
    ensure(sorted == want, format!("b-atom split {added:?}"))?;
    let removed = w.menus[0].removed_distribution();
    ensure(
        removed.len() == 1 && removed[0].posterior == p(2, 5) && removed[0].action == 1,
        "removed mass comes from the b atom at 0.4",
    )?;
    let other = check(&examples::example1_consistent(), &NbpsMode::StateDependent).map_err(|e| e.to_string())?;
    ensure(other.outcome() == Outcome::Consistent, "0.2/0.8 variant is consistent")?;
    Ok("split 1/3 at 0.2 and 2/3 at 0.5; variant consistent".into())
}

fn criterion_2() -> Check {
    let data = examples::example3();
    let verdict = check_nbps(&data, &NbpsMode::StateDependent).map_err(|e| e.to_string())?;
    replay_verdict(&data, &verdict, &NbpsMode::StateDependent)?;
    let Some(Witness::Reallocation(w)) = &verdict.witness else {
        return Err("example 3 is not violated by a reallocation".into());
    };
    let weights: Vec<Rational> = {
        let mut by_menu = vec![Rational::zero(); 3];
        for m in &w.menus {
            by_menu[m.observation] = m.weight.clone();
        }
        by_menu
    };
    let scale = &weights[0] / int(6);
    ensure(
        scale > Rational::zero() && weights == vec![&scale * int(6), &scale * int(5), &scale * int(5)],
        format!("weights {weights:?} not proportional to (6,5,5)"),
    )?;
    let pattern: [MenuPattern; 3] = [
        (0, vec![(0, p(1, 3)), (2, p(2, 3))], vec![(0, p(0, 1)), (2, p(1, 1))]),
        (1, vec![(0, p(0, 1)), (1, p(1, 1))], vec![(0, p(1, 3)), (1, p(1, 2))]),
        (2, vec![(1, p(0, 1)), (2, p(1, 1))], vec![(1, p(1, 2)), (2, p(2, 3))]),
    ];
    let support = |atoms: &[WitnessAtom]| -> Vec<(usize, Vec<Rational>)> {
        let mut s: Vec<_> = atoms.iter().map(|a| (a.action, a.posterior.clone())).collect();
        s.sort();
        s
    };
    for (obs, removed, added) in pattern {
        let m = w.menus.iter().find(|m| m.observation == obs).ok_or(format!("menu {obs} carries no weight"))?;
        ensure(support(&m.removed) == removed, format!("menu {obs}: removed support differs"))?;
        ensure(support(&m.added) == added, format!("menu {obs}: added support differs"))?;
    }
    Ok(format!("weights {}:{}:{} ~ 6:5:5, supports match, replay ok", weights[0], weights[1], weights[2]))
}

fn criterion_3() -> Check {
    let data = examples::example4();
    let general = check_nbps(&data, &NbpsMode::StateDependent).map_err(|e| e.to_string())?;
    ensure(general.outcome == Outcome::Consistent, "NBPS should be consistent")?;
    let transparent = check_nbps(&data, &NbpsMode::Transparent).map_err(|e| e.to_string())?;
    replay_verdict(&data, &transparent, &NbpsMode::Transparent)?;
    let Some(Witness::Reallocation(w)) = &transparent.witness else {
        return Err("SI-NBPS is not violated by a reallocation".into());
    };
    let third = q(1, 3);
    let allowed = [
        vec![third.clone(), q(2, 3), int(0)],
        vec![third.clone(), third.clone(), third.clone()],
        vec![third.clone(), int(0), q(2, 3)],
    ];
    let prior = data.observations[0].prior.clone();
    let at_prior: Vec<&WitnessAtom> = w.menus.iter().flat_map(|m| &m.added).filter(|a| a.posterior == prior).collect();
    ensure(!at_prior.is_empty(), "witness puts mass on the prior")?;
    ensure(at_prior.iter().all(|a| allowed.contains(&a.posterior)), "prior mass outside the allowed posteriors")?;
    // The split that sends a to the prior and b, c to (1/3,2/3,0), (1/3,0,2/3), written over
    // the vertices of each region, is itself a valid transparent witness.
    let atom = |action: usize, posterior: Vec<Rational>, weight: Rational| WitnessAtom { action, posterior, weight };
    let removed = vec![
        atom(0, vec![int(1), int(0), int(0)], third.clone()),
        atom(1, vec![int(0), int(1), int(0)], third.clone()),
        atom(2, vec![int(0), int(0), int(1)], third.clone()),
    ];
    let added = vec![
        atom(0, prior.clone(), third.clone()),
        atom(1, vec![int(0), int(1), int(0)], q(1, 18)),
        atom(1, vec![q(2, 5), q(3, 5), int(0)], q(5, 18)),
        atom(2, vec![int(0), int(0), int(1)], q(1, 18)),
        atom(2, vec![q(2, 5), int(0), q(3, 5)], q(5, 18)),
    ];
    let mut perturbed = vec![
        atom(0, prior.clone(), third.clone()),
        atom(1, vec![int(0), int(1), int(0)], q(1, 18)),
        atom(1, vec![q(2, 5), q(3, 5), int(0)], q(5, 18)),
        atom(2, vec![int(0), int(0), int(1)], q(1, 18)),
        atom(2, vec![q(2, 5), int(0), q(3, 5)], q(5, 18)),
    ];
    perturbed.sort_by(|x, y| (x.action, &x.posterior).cmp(&(y.action, &y.posterior)));
    let hand = BalancedSignal {
        menus: vec![MenuReallocation { observation: 0, weight: int(1), removed, added, perturbed: perturbed.clone() }],
        step: int(1),
    };
    verify_reallocation(&data, &NbpsMode::Transparent, &hand)?;
    // Pooled by action, the perturbed signal is exactly (p0, (1/3,2/3,0), (1/3,0,2/3)).
    for (action, target) in [(0, &allowed[1]), (1, &allowed[0]), (2, &allowed[2])] {
        let parts: Vec<&WitnessAtom> = perturbed.iter().filter(|a| a.action == action).collect();
        let mass: Rational = parts.iter().map(|a| a.weight.clone()).sum();
        let mean: Vec<Rational> =
            (0..3).map(|s| parts.iter().map(|a| &a.weight * &a.posterior[s]).sum::<Rational>() / &mass).collect();
        ensure(&mean == target && mass == third, format!("pooled posterior of action {action}"))?;
    }
    Ok("NBPS consistent, SI-NBPS violated with prior mass only at (1/3,1/3,1/3); hand split replays".into())
}

fn criterion_4() -> Check {
    let data = examples::example5();
    let verdict = check(&data, &NbpsMode::StateDependent).map_err(|e| e.to_string())?;
    ensure(verdict.outcome() == Outcome::Consistent, "example 5 should be consistent")?;
    let printed = SenderRationalization {
        sender_utility: examples::example5_sender(),
        menu_values: examples::example5_menu_values(),
    };
    ensure(printed.menu_values[0] == vec![int(1), int(0)], "first hyperplane runs from 1 to 0")?;
    ensure(printed.menu_values[1] == vec![q(3, 10), q(3, 10)], "second hyperplane is constant 3/10")?;
    ensure(common::valid(&data, &printed), "printed utility does not validate")?;
    Ok("consistent; printed utility validates with (1,0) and (3/10,3/10)".into())
}

fn criterion_5() -> Check {
    let world = examples::example3_world();
    let sender = examples::example6_sender();
    let problem = |prior: Vec<Rational>| SenderProblem {
        world: world.clone(),
        sender_utility: sender.clone(),
        menu: vec![0, 1, 2],
        prior,
    };
    ensure(benefits_from_persuasion(&problem(p(1, 2))).map_err(|e| e.to_string())?, "benefit at 1/2")?;
    ensure(!benefits_from_persuasion(&problem(p(1, 5))).map_err(|e| e.to_string())?, "no benefit at 1/5")?;
    let data = generate_dataset(&world, &sender, &[(vec![0, 1, 2], p(1, 5))]).map_err(|e| e.to_string())?;
    let signal = revealed_signal(&data.observations[0]);
    ensure(!is_informative(&signal, &p(1, 5)), "generated signal at 1/5 is informative")?;
    Ok("benefit at 1/2, none at 1/5, uninformative data at 1/5".into())
}

fn criterion_6() -> Check {
    let b = examples::figure4b();
    let s = mean_solve(&b).map_err(|e| e.to_string())?;
    let mut atoms: Vec<(Rational, Rational)> = s.atoms.iter().map(|a| (a.mean.clone(), a.mass.clone())).collect();
    atoms.sort();
    ensure(atoms == vec![(q(1, 4), q(1, 2)), (q(3, 4), q(1, 2))], format!("figure 4(b) atoms {atoms:?}"))?;
    ensure(s.value == q(1, 2), "figure 4(b) value")?;
    ensure(mean_benefit(&b).map_err(|e| e.to_string())?, "figure 4(b) benefit")?;
    let a = examples::figure4a();
    let s = mean_solve(&a).map_err(|e| e.to_string())?;
    ensure(mean_benefit(&a).map_err(|e| e.to_string())?, "figure 4(a) benefit")?;
    ensure(!s.price.is_affine(), "figure 4(a) price should be non-affine")?;
    Ok(format!("4(b) atoms 1/4, 3/4 mass 1/2 value 1/2; 4(a) kinks at {:?}", s.price.kinks().iter().map(|k| k.to_string()).collect::<Vec<_>>()))
}

fn criterion_7() -> Check {
    let mut passed = 0;
    for seed in 0..200 {
        let rt = round_trip(&mut random::rng(7000 + seed));
        let data = common::generated(&rt);
        let report = check(&data, &NbpsMode::StateDependent).map_err(|e| e.to_string())?;
        let valid = report.outcome() == Outcome::Consistent
            && report.decisive().state_rationalizer().is_some_and(|r| common::valid(&data, r));
        if valid {
            passed += 1;
        }
    }
    ensure(passed == 200, format!("{passed}/200 consistent with valid rationalizers"))?;
    Ok("200/200 consistent, all rationalizers validate".into())
}

fn on_grid(x: &[Rational], grid: u32) -> bool {
    let denominator = x.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let scaled: Vec<BigInt> = x.iter().map(|v| (v * Rational::from_integer(denominator.clone())).to_integer()).collect();
    let g = scaled.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
    scaled.iter().all(|v| v / &g <= BigInt::from(grid))
}

fn criterion_8() -> Check {
    let mut agree = 0;
    for seed in 0..100 {
        let data = obedient_binary_dataset(&mut random::rng(8000 + seed), 4, 1);
        let direct = check_single_menu(&data.world, &data.observations[0]).map_err(|e| e.to_string())?;
        let system = check_nbps(&data, &NbpsMode::StateDependent).map_err(|e| e.to_string())?;
        if direct.outcome == system.outcome {
            agree += 1;
        }
    }
    ensure(agree == 100, format!("single-menu agreement {agree}/100"))?;
    let (mut sound, mut on_grid_count, mut matched) = (0, 0, 0);
    for seed in 0..50 {
        let data = obedient_binary_dataset(&mut random::rng(8500 + seed), 3, 3);
        let verdict = check_nbps(&data, &NbpsMode::StateDependent).map_err(|e| e.to_string())?;
        let grid = brute_force_nbps(&data, 30).map_err(|e| e.to_string())?;
        let violated = matches!(grid, BruteForceOutcome::Violated { .. });
        ensure(grid != BruteForceOutcome::Aborted, format!("grid search aborted on instance {seed}"))?;
        if verdict.outcome == Outcome::Consistent && violated {
            return Err(format!("grid finds a violation the system misses on instance {seed}"));
        }
        sound += 1;
        if verdict.outcome == Outcome::Violated {
            let built = build_nbps_system(&data, &NbpsMode::StateDependent).map_err(|e| e.to_string())?;
            if let Certificate::PrimalWitness { x } = decide(&built.system).map_err(|e| e.to_string())? {
                if on_grid(&x, 30) {
                    on_grid_count += 1;
                    if violated {
                        matched += 1;
                    }
                }
            }
        }
    }
    ensure(matched == on_grid_count, format!("grid agrees on {matched}/{on_grid_count} on-grid witnesses"))?;
    Ok(format!("100/100 single-menu agree; grid sound on {sound}/50, agrees on {matched}/{on_grid_count} on-grid witnesses"))
}

fn criterion_9() -> Check {
    let (mut mid, mut affine, mut slack, mut free) = (0, 0, 0, 0);
    for seed in 0..50 {
        let rt = round_trip(&mut random::rng(9000 + seed));
        let data = common::generated(&rt);
        let r = common::extracted(&data);
        let other = {
            let truth = common::generating(&rt);
            if common::valid(&data, &truth) { truth } else { common::affine_image(&r, &q(2, 1), &vec![q(1, 3); rt.world.n_states()]) }
        };
        if common::valid(&data, &common::midpoint(&r, &other)) {
            mid += 1;
        }
        let beta: Vec<Rational> = (0..rt.world.n_states()).map(|s| q(s as i64 - 1, 4)).collect();
        if common::valid(&data, &common::affine_image(&r, &q(3 + seed as i64, 5), &beta)) {
            affine += 1;
        }

        let (rt, dominated) = round_trip_with_dominated(&mut random::rng(9500 + seed));
        let data = common::generated(&rt);
        let r = common::extracted(&data);
        let mut lowered = r.clone();
        for b in common::never_chosen(&data) {
            for x in lowered.sender_utility[b].iter_mut() {
                *x -= q(1 + seed as i64, 10);
            }
        }
        if common::valid(&data, &lowered) {
            slack += 1;
        }
        let mut changed = r.clone();
        for (s, x) in changed.sender_utility[dominated].iter_mut().enumerate() {
            *x = int(100 * (s as i64 + 1) - 7 * seed as i64);
        }
        if common::valid(&data, &changed) {
            free += 1;
        }
    }
    ensure((mid, affine, slack, free) == (50, 50, 50, 50), format!("midpoint {mid}, affine {affine}, slack {slack}, free {free} of 50"))?;
    Ok("midpoint, affine image, lowered unchosen utility, free dominated utility: 50/50 each".into())
}

fn criterion_10() -> Check {
    let mut passed = 0;
    for seed in 0..100 {
        let set = mean_problem_set(&mut random::rng(10_000 + seed), 5);
        let data = mean_generate_dataset(&set.world, &set.sender_utility, &set.problems).map_err(|e| e.to_string())?;
        let report = check_mean(&data).map_err(|e| e.to_string())?;
        let ok = report.outcome() == Outcome::Consistent
            && match &report.decisive().rationalizer {
                Some(Rationalizer::Mean(r)) => {
                    r.prices.iter().all(|f| f.is_convex() && f.is_continuous()) && validate_mean_rationalizer(&data, r)
                }
                _ => false,
            };
        if ok {
            passed += 1;
        }
    }
    ensure(passed == 100, format!("{passed}/100 mean datasets consistent with valid prices"))?;
    Ok("100/100 consistent, price functions convex and validated".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("example 1 split and variant", criterion_1),
        ("example 3 witness 6:5:5", criterion_2),
        ("example 4 NBPS vs SI-NBPS", criterion_3),
        ("example 5 printed rationalizer", criterion_4),
        ("example 6 prior dependence", criterion_5),
        ("figure 4 posterior means", criterion_6),
        ("state round trip x200", criterion_7),
        ("oracle agreement", criterion_8),
        ("partial identification x50", criterion_9),
        ("mean round trip x100", criterion_10),
    ];
    let mut failures = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let started = std::time::Instant::now();
        let result = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = started.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {:>2} PASS [{name}] tolerance 0 (exact) {secs:.2}s: {detail}", k + 1),
            Err(why) => {
                failures += 1;
                println!("criterion {:>2} FAIL [{name}] tolerance 0 (exact) {secs:.2}s: {why}", k + 1);
            }
        }
    }
    println!("acceptance: {} of 10 criteria pass", 10 - failures);
    if failures == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
