//! Persuasion over posterior means: a prior with finite support `Z` in `[0, 1]`, receiver
//! and sender payoffs affine in the mean, feasibility as mean-preserving contraction, and
//! the balanced-improvement test with convex price functions as rationalizers.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};
use serde::Deserialize;

use crate::dataset::{RawQ, Violation};
use crate::error::{Error, Result};
use crate::feasibility::{decide, support_maximal_witness, Certificate, FeasibilitySystem, RowKind};
use crate::lp::{LinearProgram, LpOutcome};
use crate::numeric::{render, sum, Affine, Rational};
use crate::persuasion::{Axiom, CheckReport, NiasViolation, Rationalizer, Verdict, Witness};

fn positive_part(v: Rational) -> Rational {
    if v.is_positive() {
        v
    } else {
        Rational::zero()
    }
}

/// Support points, actions and receiver payoffs `v(a, z)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeanWorld {
    pub support: Vec<Rational>,
    pub actions: Vec<String>,
    pub receiver_utility: Vec<Affine>,
}

impl MeanWorld {
    pub fn new(support: Vec<Rational>, actions: Vec<String>, receiver_utility: Vec<Affine>) -> Result<Self> {
        if support.len() < 2 || !support[0].is_zero() || !support[support.len() - 1].is_one() {
            return Err(Error::input("support must start at 0 and end at 1"));
        }
        if support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::input("support must be strictly increasing"));
        }
        if actions.is_empty() {
            return Err(Error::input("a world needs at least one action"));
        }
        let distinct: BTreeSet<&String> = actions.iter().collect();
        if distinct.len() != actions.len() {
            return Err(Error::input("duplicate action label"));
        }
        if receiver_utility.len() != actions.len() {
            return Err(Error::input("one receiver payoff per action"));
        }
        Ok(MeanWorld { support, actions, receiver_utility })
    }

    pub fn action_index(&self, label: &str) -> Option<usize> {
        self.actions.iter().position(|a| a == label)
    }

    pub fn receiver_best(&self, menu: &[usize], z: &Rational) -> Vec<usize> {
        let values: Vec<Rational> = menu.iter().map(|&a| self.receiver_utility[a].eval(z)).collect();
        let best = values.iter().max().expect("menu is nonempty");
        menu.iter().zip(&values).filter(|(_, v)| *v == best).map(|(a, _)| *a).collect()
    }

    /// The interval of means at which `action` is a receiver best response in `menu`.
    pub fn interval(&self, menu: &[usize], action: usize) -> Option<(Rational, Rational)> {
        let own = &self.receiver_utility[action];
        let (mut lo, mut hi) = (Rational::zero(), Rational::one());
        for &b in menu {
            if b == action {
                continue;
            }
            let other = &self.receiver_utility[b];
            let slope = &own.slope - &other.slope;
            let gap = &other.intercept - &own.intercept;
            if slope.is_zero() {
                if gap.is_positive() {
                    return None;
                }
            } else if slope.is_positive() {
                lo = lo.max(gap / slope);
            } else {
                hi = hi.min(gap / slope);
            }
        }
        (lo <= hi).then_some((lo, hi))
    }
}

/// One menu with the prior pmf on the support and `sigma[k][z]` for the k-th menu action.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeanObservation {
    pub menu: Vec<usize>,
    pub prior: Vec<Rational>,
    pub sigma: Vec<Vec<Rational>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeanDataset {
    pub world: MeanWorld,
    pub observations: Vec<MeanObservation>,
}

impl MeanDataset {
    pub fn ensure_valid(&self) -> Result<()> {
        let v = validate_mean(self);
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(v))
        }
    }

    pub fn common_prior(&self) -> Option<&[Rational]> {
        let first = &self.observations.first()?.prior;
        self.observations.iter().all(|o| &o.prior == first).then_some(first.as_slice())
    }
}

pub fn validate_mean(dataset: &MeanDataset) -> Vec<Violation> {
    let world = &dataset.world;
    let n = world.support.len();
    let label = |k: usize| render(&world.support[k]);
    let mut out = Vec::new();
    for (i, obs) in dataset.observations.iter().enumerate() {
        if obs.menu.is_empty() {
            out.push(Violation::EmptyMenu { observation: i });
        }
        let mut seen = BTreeSet::new();
        for &a in &obs.menu {
            if a >= world.actions.len() {
                out.push(Violation::UnknownAction { observation: i, action: a });
            } else if !seen.insert(a) {
                out.push(Violation::RepeatedMenuAction { observation: i, action: world.actions[a].clone() });
            }
        }
        if obs.prior.len() != n {
            out.push(Violation::DimensionMismatch { observation: i, what: "prior" });
            continue;
        }
        if obs.sigma.len() != obs.menu.len() || obs.sigma.iter().any(|c| c.len() != n) {
            out.push(Violation::DimensionMismatch { observation: i, what: "choice matrix" });
            continue;
        }
        for (k, p) in obs.prior.iter().enumerate() {
            if p.is_negative() {
                out.push(Violation::NegativePrior { observation: i, state: label(k) });
            }
        }
        let total = sum(&obs.prior);
        if !total.is_one() {
            out.push(Violation::PriorNotNormalized { observation: i, total });
        }
        for k in 0..n {
            for (pos, column) in obs.sigma.iter().enumerate() {
                if column[k].is_negative() && obs.menu[pos] < world.actions.len() {
                    out.push(Violation::NegativeChoice {
                        observation: i,
                        action: world.actions[obs.menu[pos]].clone(),
                        state: label(k),
                    });
                }
            }
            let total: Rational = obs.sigma.iter().map(|c| &c[k]).sum();
            if !total.is_one() {
                out.push(Violation::ColumnNotNormalized { observation: i, state: label(k), total });
            }
        }
        for (j, other) in dataset.observations.iter().enumerate().take(i) {
            let same_menu: BTreeSet<_> = other.menu.iter().collect();
            if same_menu == obs.menu.iter().collect() && other.prior == obs.prior {
                out.push(Violation::RepeatedObservation { first: j, second: i });
            }
        }
    }
    out
}

/// A point mass of a distribution on `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct PointMass {
    pub point: Rational,
    pub mass: Rational,
}

pub fn prior_atoms(support: &[Rational], pmf: &[Rational]) -> Vec<PointMass> {
    support
        .iter()
        .zip(pmf)
        .filter(|(_, m)| !m.is_zero())
        .map(|(z, m)| PointMass { point: z.clone(), mass: m.clone() })
        .collect()
}

pub fn mean_of(atoms: &[PointMass]) -> Rational {
    atoms.iter().map(|a| &a.point * &a.mass).sum()
}

/// `I(z) = ∫_0^z (F0 - F)`, exact for point-mass distributions.
pub fn integral_gap(prior: &[PointMass], f: &[PointMass], z: &Rational) -> Rational {
    let part = |atoms: &[PointMass]| -> Rational {
        atoms.iter().map(|a| &a.mass * positive_part(z - &a.point)).sum()
    };
    part(prior) - part(f)
}

/// Every atom location of the given distributions together with 0 and 1, sorted.
pub fn breakpoints(dists: &[&[PointMass]]) -> Vec<Rational> {
    let mut points: BTreeSet<Rational> = BTreeSet::from([Rational::zero(), Rational::one()]);
    for d in dists {
        points.extend(d.iter().map(|a| a.point.clone()));
    }
    points.into_iter().collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MpcProfile {
    pub feasible: bool,
    /// `(z, I(z))` at every kink.
    pub points: Vec<(Rational, Rational)>,
}

/// Whether `f` is a mean-preserving contraction of `prior`.
pub fn mpc_check(prior: &[PointMass], f: &[PointMass]) -> MpcProfile {
    let points: Vec<(Rational, Rational)> = breakpoints(&[prior, f])
        .into_iter()
        .map(|z| {
            let gap = integral_gap(prior, f, &z);
            (z, gap)
        })
        .collect();
    let total_ok = sum(&f.iter().map(|a| a.mass.clone()).collect::<Vec<_>>()).is_one()
        && f.iter().all(|a| !a.mass.is_negative());
    let feasible = total_ok
        && points.iter().all(|(_, v)| !v.is_negative())
        && points.last().is_some_and(|(_, v)| v.is_zero());
    MpcProfile { feasible, points }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeanAtom {
    pub action: usize,
    pub mean: Rational,
    pub mass: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeanRevealedSignal {
    pub atoms: Vec<MeanAtom>,
}

impl MeanRevealedSignal {
    pub fn distribution(&self) -> Vec<PointMass> {
        let mut by_point: BTreeMap<Rational, Rational> = BTreeMap::new();
        for a in &self.atoms {
            *by_point.entry(a.mean.clone()).or_insert_with(Rational::zero) += &a.mass;
        }
        by_point.into_iter().map(|(point, mass)| PointMass { point, mass }).collect()
    }

    pub fn is_informative(&self, z0: &Rational) -> bool {
        self.atoms.iter().any(|a| a.mean != *z0)
    }

    pub fn atom(&self, action: usize) -> Option<&MeanAtom> {
        self.atoms.iter().find(|a| a.action == action)
    }
}

/// Revealed mean `z_a` and mass of every chosen action.
pub fn revealed_means(world: &MeanWorld, obs: &MeanObservation) -> MeanRevealedSignal {
    let atoms = obs
        .menu
        .iter()
        .zip(&obs.sigma)
        .filter_map(|(&action, column)| {
            let mass: Rational = column.iter().zip(&obs.prior).map(|(s, p)| s * p).sum();
            if mass.is_zero() {
                return None;
            }
            let first: Rational =
                column.iter().zip(&obs.prior).zip(&world.support).map(|((s, p), z)| s * p * z).sum();
            Some(MeanAtom { action, mean: first / &mass, mass })
        })
        .collect();
    MeanRevealedSignal { atoms }
}

/// Candidate means for one action: interval endpoints, support points inside, and the prior
/// mean when the action is optimal there.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeanCandidateSet {
    pub action: usize,
    pub interval: Option<(Rational, Rational)>,
    pub points: Vec<Rational>,
    pub includes_prior: bool,
}

pub fn mean_candidate_set(world: &MeanWorld, menu: &[usize], z0: &Rational) -> Vec<MeanCandidateSet> {
    menu.iter()
        .map(|&action| {
            let interval = world.interval(menu, action);
            let mut points = BTreeSet::new();
            let mut includes_prior = false;
            if let Some((lo, hi)) = &interval {
                points.insert(lo.clone());
                points.insert(hi.clone());
                points.extend(world.support.iter().filter(|z| lo <= *z && *z <= hi).cloned());
                if lo <= z0 && z0 <= hi {
                    points.insert(z0.clone());
                    includes_prior = true;
                }
            }
            MeanCandidateSet { action, interval, points: points.into_iter().collect(), includes_prior }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Price functions

/// Continuous piecewise-affine function on `[0, 1]`; `pieces[j]` applies between
/// `breakpoints[j - 1]` and `breakpoints[j]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PriceFunction {
    pub breakpoints: Vec<Rational>,
    pub pieces: Vec<Affine>,
}

impl PriceFunction {
    /// `base(z) + Σ weight (kink - z)_+`, with kinks at or outside the ends dropped into the base.
    pub fn from_kinks(base: Affine, kinks: &[(Rational, Rational)]) -> Self {
        let mut base = base;
        let mut interior: BTreeMap<Rational, Rational> = BTreeMap::new();
        for (point, weight) in kinks {
            if weight.is_zero() || point.is_negative() || point.is_zero() {
                continue;
            }
            if *point >= Rational::one() {
                base.slope -= weight;
                base.intercept += weight * point;
            } else {
                *interior.entry(point.clone()).or_insert_with(Rational::zero) += weight;
            }
        }
        let breakpoints: Vec<Rational> = interior.keys().cloned().collect();
        let mut pieces = Vec::with_capacity(breakpoints.len() + 1);
        for j in 0..=breakpoints.len() {
            let mut piece = base.clone();
            for (point, weight) in interior.iter().skip(j) {
                piece.slope -= weight;
                piece.intercept += weight * point;
            }
            pieces.push(piece);
        }
        PriceFunction { breakpoints, pieces }
    }

    pub fn affine(line: Affine) -> Self {
        PriceFunction { breakpoints: Vec::new(), pieces: vec![line] }
    }

    pub fn eval(&self, z: &Rational) -> Rational {
        let j = self.breakpoints.iter().filter(|b| *b < z).count();
        self.pieces[j].eval(z)
    }

    pub fn is_continuous(&self) -> bool {
        self.pieces.len() == self.breakpoints.len() + 1
            && self.breakpoints.iter().enumerate().all(|(j, b)| self.pieces[j].eval(b) == self.pieces[j + 1].eval(b))
    }

    pub fn is_convex(&self) -> bool {
        self.is_continuous() && self.pieces.windows(2).all(|w| w[0].slope <= w[1].slope)
    }

    /// Breakpoints where the slope actually changes.
    pub fn kinks(&self) -> Vec<Rational> {
        self.breakpoints
            .iter()
            .enumerate()
            .filter(|(j, _)| self.pieces[*j].slope != self.pieces[j + 1].slope)
            .map(|(_, b)| b.clone())
            .collect()
    }

    pub fn is_affine(&self) -> bool {
        self.kinks().is_empty()
    }
}

// ---------------------------------------------------------------------------
// Obedience

pub fn check_nias_mean(dataset: &MeanDataset) -> Result<Verdict> {
    dataset.ensure_valid()?;
    let world = &dataset.world;
    let mut found = Vec::new();
    for (i, obs) in dataset.observations.iter().enumerate() {
        for atom in revealed_means(world, obs).atoms {
            let own = world.receiver_utility[atom.action].eval(&atom.mean);
            for &b in &obs.menu {
                if world.receiver_utility[b].eval(&atom.mean) > own {
                    found.push(NiasViolation {
                        observation: i,
                        chosen: atom.action,
                        better: b,
                        posterior: vec![atom.mean.clone()],
                    });
                }
            }
        }
    }
    Ok(if found.is_empty() {
        Verdict::consistent(Axiom::NiasMean, None)
    } else {
        Verdict::violated(Axiom::NiasMean, Witness::Nias(found))
    })
}

// ---------------------------------------------------------------------------
// The balanced-improvement system over means

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MeanColumn {
    Revealed { observation: usize, action: usize, mean: Rational },
    Candidate { observation: usize, action: usize, mean: Rational, at_prior: bool },
    /// Slack of the strict conditions for one informative menu.
    Strictness { observation: usize },
}

impl MeanColumn {
    fn observation(&self) -> usize {
        match self {
            MeanColumn::Revealed { observation, .. }
            | MeanColumn::Candidate { observation, .. }
            | MeanColumn::Strictness { observation } => *observation,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MeanRow {
    Mass { observation: usize },
    /// Contraction slack at a support point where the revealed distribution binds.
    Kink { observation: usize, point: Rational },
    Tail { observation: usize },
    ActionMean { action: usize },
    ActionMass { action: usize },
    Prior { observation: usize },
}

#[derive(Clone, Debug)]
pub struct NbpsmSystem {
    pub system: FeasibilitySystem,
    pub columns: Vec<MeanColumn>,
    pub rows: Vec<MeanRow>,
    pub prior_mean: Rational,
    /// Support points where `I(F0, F_sigma)` vanishes, per observation.
    pub binding: Vec<Vec<Rational>>,
}

fn common_prior_atoms(dataset: &MeanDataset) -> Result<(Vec<PointMass>, Rational)> {
    let pmf = dataset
        .common_prior()
        .ok_or_else(|| Error::input("the posterior-mean test needs one prior shared by all observations"))?;
    let atoms = prior_atoms(&dataset.world.support, pmf);
    let z0 = mean_of(&atoms);
    Ok((atoms, z0))
}

/// Support points where the revealed distribution's contraction constraint binds.
pub fn binding_points(world: &MeanWorld, prior: &[PointMass], signal: &MeanRevealedSignal) -> Vec<Rational> {
    let f = signal.distribution();
    world.support.iter().filter(|z| integral_gap(prior, &f, z).is_zero()).cloned().collect()
}

pub fn build_nbpsm_system(dataset: &MeanDataset) -> Result<NbpsmSystem> {
    dataset.ensure_valid()?;
    let world = &dataset.world;
    let (prior, z0) = common_prior_atoms(dataset)?;
    let mut columns = Vec::new();
    let mut binding = Vec::new();
    let mut informative = Vec::new();
    for (i, obs) in dataset.observations.iter().enumerate() {
        let signal = revealed_means(world, obs);
        binding.push(binding_points(world, &prior, &signal));
        informative.push(signal.is_informative(&z0));
        for atom in &signal.atoms {
            columns.push(MeanColumn::Revealed { observation: i, action: atom.action, mean: atom.mean.clone() });
        }
        for set in mean_candidate_set(world, &obs.menu, &z0) {
            for z in &set.points {
                columns.push(MeanColumn::Candidate {
                    observation: i,
                    action: set.action,
                    mean: z.clone(),
                    at_prior: *z == z0,
                });
            }
        }
        if informative[i] {
            columns.push(MeanColumn::Strictness { observation: i });
        }
    }

    let offered: BTreeSet<usize> = dataset.observations.iter().flat_map(|o| o.menu.iter().copied()).collect();
    let mut rows = Vec::new();
    for (i, points) in binding.iter().enumerate() {
        rows.push(MeanRow::Mass { observation: i });
        for z in points.iter().filter(|z| z.is_positive() && **z < Rational::one()) {
            rows.push(MeanRow::Kink { observation: i, point: z.clone() });
        }
        rows.push(MeanRow::Tail { observation: i });
        if informative[i] {
            rows.push(MeanRow::Prior { observation: i });
        }
    }
    for &a in &offered {
        rows.push(MeanRow::ActionMean { action: a });
        rows.push(MeanRow::ActionMass { action: a });
    }

    let one = Rational::one();
    let matrix: Vec<Vec<Rational>> = rows
        .iter()
        .map(|row| columns.iter().map(|col| entry(row, col, &one)).collect())
        .collect();
    let row_kinds = rows
        .iter()
        .map(|r| match r {
            MeanRow::Kink { .. } | MeanRow::Prior { .. } => RowKind::Le,
            _ => RowKind::Eq,
        })
        .collect();
    let objective = columns
        .iter()
        .map(|c| if matches!(c, MeanColumn::Strictness { .. }) { -Rational::one() } else { Rational::zero() })
        .collect();
    let row_labels = rows.iter().map(|r| mean_row_label(world, r)).collect();
    let column_labels = columns.iter().map(|c| mean_column_label(world, c)).collect();
    Ok(NbpsmSystem {
        system: FeasibilitySystem { matrix, row_kinds, objective, row_labels, column_labels },
        columns,
        rows,
        prior_mean: z0,
        binding,
    })
}

fn entry(row: &MeanRow, col: &MeanColumn, one: &Rational) -> Rational {
    let zero = Rational::zero();
    // revealed columns enter with +, candidates with -
    let (obs, action, mean, sign) = match col {
        MeanColumn::Revealed { observation, action, mean } => (*observation, *action, mean, one.clone()),
        MeanColumn::Candidate { observation, action, mean, .. } => (*observation, *action, mean, -one.clone()),
        MeanColumn::Strictness { observation } => {
            return match row {
                MeanRow::Kink { observation: o, .. } | MeanRow::Prior { observation: o } if o == observation => {
                    one.clone()
                }
                _ => zero,
            };
        }
    };
    match row {
        MeanRow::Mass { observation } if *observation == obs => sign,
        MeanRow::Kink { observation, point } if *observation == obs => -sign * positive_part(point - mean),
        MeanRow::Tail { observation } if *observation == obs => sign * (one - mean),
        MeanRow::ActionMean { action: a } if *a == action => sign * mean,
        MeanRow::ActionMass { action: a } if *a == action => sign,
        MeanRow::Prior { observation } if *observation == obs => match col {
            MeanColumn::Candidate { at_prior: true, .. } => -one.clone(),
            _ => zero,
        },
        _ => zero,
    }
}

fn mean_row_label(world: &MeanWorld, row: &MeanRow) -> String {
    match row {
        MeanRow::Mass { observation } => format!("menu[{observation}]/mass"),
        MeanRow::Kink { observation, point } => format!("menu[{observation}]/kink@{}", render(point)),
        MeanRow::Tail { observation } => format!("menu[{observation}]/tail"),
        MeanRow::ActionMean { action } => format!("action[{}]/mean", world.actions[*action]),
        MeanRow::ActionMass { action } => format!("action[{}]/mass", world.actions[*action]),
        MeanRow::Prior { observation } => format!("menu[{observation}]/prior"),
    }
}

fn mean_column_label(world: &MeanWorld, col: &MeanColumn) -> String {
    match col {
        MeanColumn::Revealed { observation, action, mean } => {
            format!("revealed[{observation}]/{}@{}", world.actions[*action], render(mean))
        }
        MeanColumn::Candidate { observation, action, mean, .. } => {
            format!("candidate[{observation}]/{}@{}", world.actions[*action], render(mean))
        }
        MeanColumn::Strictness { observation } => format!("strict[{observation}]"),
    }
}

// ---------------------------------------------------------------------------
// Certificates

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeanWeight {
    pub action: usize,
    pub mean: Rational,
    pub weight: Rational,
}

/// One menu's share of a balanced reallocation over means.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeanReallocation {
    pub observation: usize,
    pub weight: Rational,
    /// Unnormalised revealed mass taken out; divided by `weight` it is `F_i`.
    pub removed: Vec<MeanWeight>,
    /// Unnormalised mass put back; divided by `weight` it is `G_i`.
    pub added: Vec<MeanWeight>,
    /// Auxiliary prior with support in `Z` that both `F_i` and `G_i` contract.
    pub prior: Vec<PointMass>,
}

impl MeanReallocation {
    fn normalised(&self, list: &[MeanWeight]) -> Vec<PointMass> {
        let mut by_point: BTreeMap<Rational, Rational> = BTreeMap::new();
        for w in list {
            *by_point.entry(w.mean.clone()).or_insert_with(Rational::zero) += &w.weight / &self.weight;
        }
        by_point.into_iter().map(|(point, mass)| PointMass { point, mass }).collect()
    }

    pub fn removed_distribution(&self) -> Vec<PointMass> {
        self.normalised(&self.removed)
    }

    pub fn added_distribution(&self) -> Vec<PointMass> {
        self.normalised(&self.added)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeanWitness {
    pub menus: Vec<MeanReallocation>,
    /// Observation whose replacement is strictly inside the contraction set and uses the prior mean.
    pub strict_observation: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeanRationalizer {
    pub sender_utility: Vec<Affine>,
    /// One price function per observation.
    pub prices: Vec<PriceFunction>,
}

pub fn check_nbpsm(dataset: &MeanDataset) -> Result<Verdict> {
    let built = build_nbpsm_system(dataset)?;
    match decide(&built.system)? {
        Certificate::PrimalWitness { x } => {
            let x = support_maximal_witness(&built.system)?.unwrap_or(x);
            let witness = decode_mean_witness(dataset, &built, &x)?;
            if let Err(msg) = verify_mean_witness(dataset, &witness) {
                return Err(Error::Internal(format!("decoded witness does not replay: {msg}")));
            }
            Ok(Verdict::violated(Axiom::NbpsMean, Witness::Mean(witness)))
        }
        Certificate::DualRationalizer { y, .. } => {
            let r = decode_mean_rationalizer(dataset, &built, &y);
            let failures = mean_rationalizer_failures(dataset, &r);
            if !failures.is_empty() {
                return Err(Error::Internal(format!(
                    "extracted rationalizer does not validate: {}",
                    failures.join("; ")
                )));
            }
            Ok(Verdict::consistent(Axiom::NbpsMean, Some(Rationalizer::Mean(r))))
        }
    }
}

fn decode_mean_witness(dataset: &MeanDataset, built: &NbpsmSystem, x: &[Rational]) -> Result<MeanWitness> {
    let mut menus = Vec::new();
    let mut strict = None;
    for (i, points) in built.binding.iter().enumerate() {
        let mut removed = Vec::new();
        let mut added = Vec::new();
        for (col, w) in built.columns.iter().zip(x) {
            if col.observation() != i || w.is_zero() {
                continue;
            }
            match col {
                MeanColumn::Revealed { action, mean, .. } => {
                    removed.push(MeanWeight { action: *action, mean: mean.clone(), weight: w.clone() })
                }
                MeanColumn::Candidate { action, mean, .. } => {
                    added.push(MeanWeight { action: *action, mean: mean.clone(), weight: w.clone() })
                }
                MeanColumn::Strictness { .. } => {
                    strict.get_or_insert(i);
                }
            }
        }
        let weight: Rational = removed.iter().map(|w| &w.weight).sum();
        if weight.is_zero() {
            continue;
        }
        let mut realloc = MeanReallocation { observation: i, weight, removed, added, prior: Vec::new() };
        realloc.prior = auxiliary_prior(points, &realloc.removed_distribution());
        menus.push(realloc);
    }
    let strict_observation =
        strict.ok_or_else(|| Error::Internal("witness without a strict menu".into()))?;
    let _ = dataset;
    Ok(MeanWitness { menus, strict_observation })
}

/// The pmf on `points` whose integrated CDF matches that of `f` at every point.
fn auxiliary_prior(points: &[Rational], f: &[PointMass]) -> Vec<PointMass> {
    let integral = |z: &Rational| -> Rational { f.iter().map(|a| &a.mass * positive_part(z - &a.point)).sum() };
    let mut cdf = Vec::with_capacity(points.len());
    for w in points.windows(2) {
        cdf.push((integral(&w[1]) - integral(&w[0])) / (&w[1] - &w[0]));
    }
    cdf.push(Rational::one());
    let mut out = Vec::new();
    let mut below = Rational::zero();
    for (z, c) in points.iter().zip(cdf) {
        let mass = &c - &below;
        below = c;
        if !mass.is_zero() {
            out.push(PointMass { point: z.clone(), mass });
        }
    }
    out
}

/// Replays every condition of a mean witness against the dataset.
pub fn verify_mean_witness(dataset: &MeanDataset, w: &MeanWitness) -> std::result::Result<(), String> {
    dataset.ensure_valid().map_err(|e| e.to_string())?;
    let world = &dataset.world;
    let (prior, z0) = common_prior_atoms(dataset).map_err(|e| e.to_string())?;
    if w.menus.is_empty() {
        return Err("empty reallocation".into());
    }
    let mut seen = BTreeSet::new();
    let mut balance: BTreeMap<usize, (Rational, Rational)> = BTreeMap::new();
    for m in &w.menus {
        let obs = dataset.observations.get(m.observation).ok_or("unknown observation")?;
        if !seen.insert(m.observation) {
            return Err(format!("observation {} listed twice", m.observation));
        }
        let total_removed: Rational = m.removed.iter().map(|a| &a.weight).sum();
        let total_added: Rational = m.added.iter().map(|a| &a.weight).sum();
        if !m.weight.is_positive() || total_removed != m.weight || total_added != m.weight {
            return Err(format!("menu {}: weights do not balance", m.observation));
        }
        if m.removed.iter().chain(&m.added).any(|a| !a.weight.is_positive()) {
            return Err(format!("menu {}: nonpositive weight", m.observation));
        }
        let signal = revealed_means(world, obs);
        for a in &m.removed {
            if !signal.atom(a.action).is_some_and(|t| t.mean == a.mean) {
                return Err(format!("menu {}: removed mass off the revealed atoms", m.observation));
            }
        }
        let sets = mean_candidate_set(world, &obs.menu, &z0);
        for a in &m.added {
            let ok = sets.iter().any(|s| s.action == a.action && s.points.contains(&a.mean));
            if !ok {
                return Err(format!("menu {}: added mass outside the candidate means", m.observation));
            }
        }
        let aux_total: Rational = m.prior.iter().map(|p| &p.mass).sum();
        if !aux_total.is_one()
            || m.prior.iter().any(|p| p.mass.is_negative() || !world.support.contains(&p.point))
        {
            return Err(format!("menu {}: auxiliary prior is not a pmf on the support", m.observation));
        }
        let f = m.removed_distribution();
        let g = m.added_distribution();
        if !mpc_check(&m.prior, &f).feasible || !mpc_check(&m.prior, &g).feasible {
            return Err(format!("menu {}: not a contraction of the auxiliary prior", m.observation));
        }
        let revealed = signal.distribution();
        for z in breakpoints(&[&prior, &revealed, &f, &m.prior]) {
            if integral_gap(&prior, &revealed, &z).is_zero() && !integral_gap(&m.prior, &f, &z).is_zero() {
                return Err(format!("menu {}: binding point {} not preserved", m.observation, render(&z)));
            }
        }
        for a in &m.removed {
            let e = balance.entry(a.action).or_insert_with(|| (Rational::zero(), Rational::zero()));
            e.0 += &a.weight;
            e.1 += &a.weight * &a.mean;
        }
        for a in &m.added {
            let e = balance.entry(a.action).or_insert_with(|| (Rational::zero(), Rational::zero()));
            e.0 -= &a.weight;
            e.1 -= &a.weight * &a.mean;
        }
    }
    if let Some((a, _)) = balance.iter().find(|(_, (m, z))| !m.is_zero() || !z.is_zero()) {
        return Err(format!("action `{}` is not balanced", world.actions[*a]));
    }
    let strict = w
        .menus
        .iter()
        .find(|m| m.observation == w.strict_observation)
        .ok_or("strict menu is not part of the reallocation")?;
    let obs = &dataset.observations[strict.observation];
    if !revealed_means(world, obs).is_informative(&z0) {
        return Err("strict menu is uninformative".into());
    }
    let g = strict.added_distribution();
    if !g.iter().any(|a| a.point == z0 && a.mass.is_positive()) {
        return Err("strict menu puts no mass on the prior mean".into());
    }
    let interior: Vec<Rational> = breakpoints(&[&g, &strict.prior])
        .into_iter()
        .filter(|z| z.is_positive() && *z < Rational::one())
        .collect();
    if interior.is_empty() || interior.iter().any(|z| !integral_gap(&strict.prior, &g, z).is_positive()) {
        return Err("strict menu's replacement touches the contraction boundary".into());
    }
    Ok(())
}

fn decode_mean_rationalizer(dataset: &MeanDataset, built: &NbpsmSystem, y: &[Rational]) -> MeanRationalizer {
    let world = &dataset.world;
    let n_obs = dataset.observations.len();
    let mut sender_utility = vec![Affine::constant(Rational::zero()); world.actions.len()];
    let mut level = vec![Rational::zero(); n_obs];
    let mut tail = vec![Rational::zero(); n_obs];
    let mut kinks: Vec<Vec<(Rational, Rational)>> = vec![Vec::new(); n_obs];
    for (row, v) in built.rows.iter().zip(y) {
        match row {
            MeanRow::Mass { observation } => level[*observation] = v.clone(),
            MeanRow::Tail { observation } => tail[*observation] = v.clone(),
            MeanRow::Kink { observation, point } => kinks[*observation].push((point.clone(), -v)),
            MeanRow::ActionMean { action } => sender_utility[*action].slope = -v,
            MeanRow::ActionMass { action } => sender_utility[*action].intercept = -v,
            MeanRow::Prior { .. } => {}
        }
    }
    let prices = (0..n_obs)
        .map(|i| {
            // level + tail (1 - z)
            let base = Affine::new(-tail[i].clone(), &level[i] + &tail[i]);
            PriceFunction::from_kinks(base, &kinks[i])
        })
        .collect();
    MeanRationalizer { sender_utility, prices }
}

/// Every way a proposed mean rationalizer fails; empty means valid.
pub fn mean_rationalizer_failures(dataset: &MeanDataset, r: &MeanRationalizer) -> Vec<String> {
    let world = &dataset.world;
    let mut out = Vec::new();
    if r.sender_utility.len() != world.actions.len() || r.prices.len() != dataset.observations.len() {
        return vec!["rationalizer has the wrong shape".into()];
    }
    let (prior, z0) = match common_prior_atoms(dataset) {
        Ok(p) => p,
        Err(e) => return vec![e.to_string()],
    };
    for (i, (obs, price)) in dataset.observations.iter().zip(&r.prices).enumerate() {
        if !price.is_convex() {
            out.push(format!("menu {i}: price function is not convex"));
            continue;
        }
        let signal = revealed_means(world, obs);
        let revealed = signal.distribution();
        for k in price.kinks() {
            if integral_gap(&prior, &revealed, &k).is_positive() {
                out.push(format!("menu {i}: price bends at {} where the contraction is slack", render(&k)));
            }
        }
        for atom in &signal.atoms {
            if price.eval(&atom.mean) != r.sender_utility[atom.action].eval(&atom.mean) {
                out.push(format!(
                    "menu {i}: price differs from the payoff of `{}` at its revealed mean",
                    world.actions[atom.action]
                ));
            }
        }
        for set in mean_candidate_set(world, &obs.menu, &z0) {
            for z in &set.points {
                if r.sender_utility[set.action].eval(z) > price.eval(z) {
                    out.push(format!(
                        "menu {i}: payoff of `{}` exceeds the price at {}",
                        world.actions[set.action],
                        render(z)
                    ));
                }
            }
        }
        if signal.is_informative(&z0) {
            let at_prior = world
                .receiver_best(&obs.menu, &z0)
                .into_iter()
                .map(|a| r.sender_utility[a].eval(&z0))
                .max()
                .expect("menu is nonempty");
            if price.is_affine() && price.eval(&z0) <= at_prior {
                out.push(format!("menu {i}: affine price touches the payoff at the prior mean"));
            }
        }
    }
    out
}

pub fn validate_mean_rationalizer(dataset: &MeanDataset, r: &MeanRationalizer) -> bool {
    mean_rationalizer_failures(dataset, r).is_empty()
}

/// Obedience first, then the balanced-improvement test over means.
pub fn check_mean(dataset: &MeanDataset) -> Result<CheckReport> {
    let nias = check_nias_mean(dataset)?;
    if !nias.is_consistent() {
        return Ok(CheckReport { nias, nbps: None });
    }
    let nbps = check_nbpsm(dataset)?;
    Ok(CheckReport { nias, nbps: Some(nbps) })
}

/// Re-checks a verdict produced by [`check_mean`].
pub fn replay_mean_verdict(dataset: &MeanDataset, verdict: &Verdict) -> std::result::Result<(), String> {
    match (&verdict.witness, &verdict.rationalizer) {
        (Some(Witness::Mean(w)), _) => verify_mean_witness(dataset, w),
        (Some(Witness::Nias(list)), _) => {
            let world = &dataset.world;
            for v in list {
                let obs = dataset.observations.get(v.observation).ok_or("unknown observation")?;
                let z = v.posterior.first().ok_or("violation without a mean")?;
                let ok = revealed_means(world, obs).atom(v.chosen).is_some_and(|a| a.mean == *z)
                    && obs.menu.contains(&v.better)
                    && world.receiver_utility[v.better].eval(z) > world.receiver_utility[v.chosen].eval(z);
                if !ok {
                    return Err(format!("observation {}: obedience violation does not hold", v.observation));
                }
            }
            if list.is_empty() { Err("empty violation list".into()) } else { Ok(()) }
        }
        (None, Some(Rationalizer::Mean(r))) => {
            let failures = mean_rationalizer_failures(dataset, r);
            if failures.is_empty() { Ok(()) } else { Err(failures.join("; ")) }
        }
        (None, None) if verdict.is_consistent() => check_nias_mean(dataset)
            .map_err(|e| e.to_string())
            .and_then(|v| if v.is_consistent() { Ok(()) } else { Err("obedience fails".into()) }),
        _ => Err("verdict carries no certificate of the right kind".into()),
    }
}

// ---------------------------------------------------------------------------
// The sender's problem over means

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeanProblem {
    pub world: MeanWorld,
    pub sender_utility: Vec<Affine>,
    pub menu: Vec<usize>,
    /// pmf on the world's support.
    pub prior: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OptimalMean {
    /// One atom per recommended action.
    pub atoms: Vec<MeanAtom>,
    pub value: Rational,
    pub price: PriceFunction,
    /// Sender payoff without information.
    pub prior_value: Rational,
}

impl OptimalMean {
    pub fn distribution(&self) -> Vec<PointMass> {
        MeanRevealedSignal { atoms: self.atoms.clone() }.distribution()
    }
}

impl MeanProblem {
    pub fn check(&self) -> Result<()> {
        if self.sender_utility.len() != self.world.actions.len() {
            return Err(Error::input("one sender payoff per action"));
        }
        if self.menu.is_empty() || self.menu.iter().any(|&a| a >= self.world.actions.len()) {
            return Err(Error::input("menu must list known actions"));
        }
        if self.prior.len() != self.world.support.len()
            || self.prior.iter().any(|p| p.is_negative())
            || !sum(&self.prior).is_one()
        {
            return Err(Error::input("prior must be a pmf on the support"));
        }
        Ok(())
    }

    pub fn prior_atoms(&self) -> Vec<PointMass> {
        prior_atoms(&self.world.support, &self.prior)
    }

    pub fn prior_mean(&self) -> Rational {
        mean_of(&self.prior_atoms())
    }

    /// Receiver best response at `z`, ties broken toward the sender, then by menu order.
    pub fn recommended(&self, z: &Rational) -> usize {
        let best = self.world.receiver_best(&self.menu, z);
        let mut pick = best[0];
        for &a in &best[1..] {
            if self.sender_utility[a].eval(z) > self.sender_utility[pick].eval(z) {
                pick = a;
            }
        }
        pick
    }

    pub fn payoff(&self, z: &Rational) -> Rational {
        self.sender_utility[self.recommended(z)].eval(z)
    }
}

/// Optimal distribution of means by linear programming over the candidate means.
///
/// Contraction is imposed at the interior support points; the price function comes from the
/// duals. Without a strict gain the uninformative outcome is returned.
pub fn mean_solve(problem: &MeanProblem) -> Result<OptimalMean> {
    problem.check()?;
    let world = &problem.world;
    let prior = problem.prior_atoms();
    let z0 = mean_of(&prior);
    let points: Vec<Rational> = mean_candidate_set(world, &problem.menu, &z0)
        .into_iter()
        .flat_map(|s| s.points)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let interior: Vec<Rational> =
        world.support.iter().filter(|z| z.is_positive() && **z < Rational::one()).cloned().collect();
    let n = points.len();
    let k = interior.len();
    let mut a = Vec::with_capacity(2 + k);
    let mut mass_row = vec![Rational::one(); n];
    mass_row.resize(n + k, Rational::zero());
    a.push(mass_row);
    let mut mean_row = points.clone();
    mean_row.resize(n + k, Rational::zero());
    a.push(mean_row);
    let mut b = vec![Rational::one(), z0.clone()];
    for (j, kink) in interior.iter().enumerate() {
        let mut row: Vec<Rational> = points.iter().map(|z| positive_part(kink - z)).collect();
        row.extend((0..k).map(|t| if t == j { Rational::one() } else { Rational::zero() }));
        a.push(row);
        b.push(prior.iter().map(|p| &p.mass * positive_part(kink - &p.point)).sum());
    }
    let mut c: Vec<Rational> = points.iter().map(|z| problem.payoff(z)).collect();
    c.resize(n + k, Rational::zero());
    let sol = match LinearProgram::new(a, b, c).solve() {
        LpOutcome::Optimal(s) => s,
        other => return Err(Error::Internal(format!("mean program ended as {other:?}"))),
    };
    let base = Affine::new(sol.duals[1].clone(), sol.duals[0].clone());
    let kinks: Vec<(Rational, Rational)> =
        interior.iter().cloned().zip(sol.duals[2..].iter().cloned()).collect();
    let price = PriceFunction::from_kinks(base, &kinks);
    let prior_value = problem.payoff(&z0);
    if sol.value <= prior_value {
        let atom = MeanAtom { action: problem.recommended(&z0), mean: z0, mass: Rational::one() };
        return Ok(OptimalMean { atoms: vec![atom], value: prior_value.clone(), price, prior_value });
    }
    let mut merged: BTreeMap<usize, (Rational, Rational)> = BTreeMap::new();
    for (z, w) in points.iter().zip(&sol.x) {
        if w.is_zero() {
            continue;
        }
        let e = merged.entry(problem.recommended(z)).or_insert_with(|| (Rational::zero(), Rational::zero()));
        e.0 += w;
        e.1 += w * z;
    }
    let atoms = problem
        .menu
        .iter()
        .filter_map(|a| merged.get(a).map(|(m, s)| MeanAtom { action: *a, mean: s / m, mass: m.clone() }))
        .collect();
    Ok(OptimalMean { atoms, value: sol.value, price, prior_value })
}

/// Strict gain from persuasion over the receiver acting on the prior mean.
pub fn mean_benefit(problem: &MeanProblem) -> Result<bool> {
    let s = mean_solve(problem)?;
    Ok(s.value > s.prior_value)
}

/// Choice columns `sigma[k][z]` that produce the given atoms from the prior, found as a
/// martingale coupling. Support points without prior mass go to the first atom.
pub fn coupling(support: &[Rational], prior: &[Rational], menu: &[usize], atoms: &[MeanAtom]) -> Result<Vec<Vec<Rational>>> {
    let live: Vec<usize> = (0..support.len()).filter(|&k| !prior[k].is_zero()).collect();
    let n_atoms = atoms.len();
    let var = |z: usize, t: usize| z * n_atoms + t;
    let n_vars = live.len() * n_atoms;
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (zi, &k) in live.iter().enumerate() {
        let mut row = vec![Rational::zero(); n_vars];
        for t in 0..n_atoms {
            row[var(zi, t)] = Rational::one();
        }
        a.push(row);
        b.push(prior[k].clone());
    }
    for (t, atom) in atoms.iter().enumerate() {
        let mut mass = vec![Rational::zero(); n_vars];
        let mut first = vec![Rational::zero(); n_vars];
        for (zi, &k) in live.iter().enumerate() {
            mass[var(zi, t)] = Rational::one();
            first[var(zi, t)] = support[k].clone();
        }
        a.push(mass);
        b.push(atom.mass.clone());
        a.push(first);
        b.push(&atom.mass * &atom.mean);
    }
    let sol = match LinearProgram::new(a, b, vec![Rational::zero(); n_vars]).solve() {
        LpOutcome::Optimal(s) => s,
        _ => return Err(Error::Internal("signal is not a contraction of the prior".into())),
    };
    let mut sigma = vec![vec![Rational::zero(); support.len()]; menu.len()];
    for (t, atom) in atoms.iter().enumerate() {
        let pos = menu.iter().position(|&a| a == atom.action).expect("atom action in menu");
        for (zi, &k) in live.iter().enumerate() {
            sigma[pos][k] = &sol.x[var(zi, t)] / &prior[k];
        }
    }
    if let Some(first) = atoms.first() {
        let pos = menu.iter().position(|&a| a == first.action).expect("atom action in menu");
        for k in (0..support.len()).filter(|k| prior[*k].is_zero()) {
            sigma[pos][k] = Rational::one();
        }
    }
    Ok(sigma)
}

/// Choice data of an optimising sender on each menu and prior.
pub fn mean_generate_dataset(
    world: &MeanWorld,
    sender_utility: &[Affine],
    problems: &[(Vec<usize>, Vec<Rational>)],
) -> Result<MeanDataset> {
    let mut observations = Vec::new();
    for (menu, prior) in problems {
        let problem = MeanProblem {
            world: world.clone(),
            sender_utility: sender_utility.to_vec(),
            menu: menu.clone(),
            prior: prior.clone(),
        };
        let best = mean_solve(&problem)?;
        let sigma = coupling(&world.support, prior, menu, &best.atoms)?;
        observations.push(MeanObservation { menu: menu.clone(), prior: prior.clone(), sigma });
    }
    Ok(MeanDataset { world: world.clone(), observations })
}

// ---------------------------------------------------------------------------
// JSON

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct RawAffine {
    intercept: RawQ,
    slope: RawQ,
}

impl RawAffine {
    fn parse(&self) -> Result<Affine> {
        Ok(Affine::new(self.slope.parse()?, self.intercept.parse()?))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMeanDataset {
    support: Vec<RawQ>,
    actions: Vec<String>,
    receiver_utility: BTreeMap<String, RawAffine>,
    observations: Vec<RawMeanObservation>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMeanObservation {
    menu: Vec<String>,
    prior: Vec<RawQ>,
    #[serde(default)]
    sigma: BTreeMap<String, Vec<RawQ>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMeanProblems {
    support: Vec<RawQ>,
    actions: Vec<String>,
    receiver_utility: BTreeMap<String, RawAffine>,
    sender_utility: BTreeMap<String, RawAffine>,
    problems: Vec<RawMeanProblem>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMeanProblem {
    menu: Vec<String>,
    prior: Vec<RawQ>,
}

fn parse_all(raw: &[RawQ]) -> Result<Vec<Rational>> {
    raw.iter().map(RawQ::parse).collect()
}

fn affine_map(actions: &[String], raw: &BTreeMap<String, RawAffine>, what: &str) -> Result<Vec<Affine>> {
    if let Some(extra) = raw.keys().find(|k| !actions.contains(k)) {
        return Err(Error::input(format!("{what}: unknown action `{extra}`")));
    }
    actions
        .iter()
        .map(|a| raw.get(a).ok_or_else(|| Error::input(format!("{what}: missing action `{a}`")))?.parse())
        .collect()
}

fn menu_indices(world: &MeanWorld, menu: &[String], i: usize) -> Result<Vec<usize>> {
    menu.iter()
        .map(|a| {
            world
                .action_index(a)
                .ok_or_else(|| Error::input(format!("observation {i}: unknown action `{a}` in menu")))
        })
        .collect()
}

pub fn mean_dataset_from_json(text: &str) -> Result<MeanDataset> {
    let raw: RawMeanDataset = serde_json::from_str(text)?;
    let utility = affine_map(&raw.actions, &raw.receiver_utility, "receiver_utility")?;
    let world = MeanWorld::new(parse_all(&raw.support)?, raw.actions, utility)?;
    let n = world.support.len();
    let mut observations = Vec::new();
    for (i, ro) in raw.observations.iter().enumerate() {
        let menu = menu_indices(&world, &ro.menu, i)?;
        let prior = parse_all(&ro.prior)?;
        if let Some(extra) = ro.sigma.keys().find(|k| !ro.menu.contains(k)) {
            return Err(Error::input(format!("observation {i}: sigma names `{extra}` outside the menu")));
        }
        let sigma = ro
            .menu
            .iter()
            .map(|a| match ro.sigma.get(a) {
                None => Ok(vec![Rational::zero(); n]),
                Some(col) => parse_all(col),
            })
            .collect::<Result<Vec<_>>>()?;
        observations.push(MeanObservation { menu, prior, sigma });
    }
    Ok(MeanDataset { world, observations })
}

fn affine_json(f: &Affine) -> serde_json::Value {
    serde_json::json!({ "intercept": render(&f.intercept), "slope": render(&f.slope) })
}

pub fn mean_dataset_to_json(dataset: &MeanDataset) -> String {
    let world = &dataset.world;
    let strings = |v: &[Rational]| v.iter().map(render).collect::<Vec<_>>();
    let receiver: serde_json::Map<String, serde_json::Value> =
        world.actions.iter().zip(&world.receiver_utility).map(|(a, f)| (a.clone(), affine_json(f))).collect();
    let observations: Vec<serde_json::Value> = dataset
        .observations
        .iter()
        .map(|o| {
            let sigma: serde_json::Map<String, serde_json::Value> = o
                .menu
                .iter()
                .zip(&o.sigma)
                .map(|(&a, col)| (world.actions[a].clone(), serde_json::json!(strings(col))))
                .collect();
            serde_json::json!({
                "menu": o.menu.iter().map(|&a| world.actions[a].clone()).collect::<Vec<_>>(),
                "prior": strings(&o.prior),
                "sigma": sigma,
            })
        })
        .collect();
    let out = serde_json::json!({
        "support": strings(&world.support),
        "actions": world.actions,
        "receiver_utility": receiver,
        "observations": observations,
    });
    serde_json::to_string_pretty(&out).expect("dataset serialises")
}

/// A mean world with a known sender and a list of (menu, prior) problems.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeanProblemSet {
    pub world: MeanWorld,
    pub sender_utility: Vec<Affine>,
    pub problems: Vec<(Vec<usize>, Vec<Rational>)>,
}

impl MeanProblemSet {
    pub fn problem(&self, k: usize) -> MeanProblem {
        let (menu, prior) = &self.problems[k];
        MeanProblem {
            world: self.world.clone(),
            sender_utility: self.sender_utility.clone(),
            menu: menu.clone(),
            prior: prior.clone(),
        }
    }
}

pub fn mean_problems_from_json(text: &str) -> Result<MeanProblemSet> {
    let raw: RawMeanProblems = serde_json::from_str(text)?;
    let receiver = affine_map(&raw.actions, &raw.receiver_utility, "receiver_utility")?;
    let sender = affine_map(&raw.actions, &raw.sender_utility, "sender_utility")?;
    let world = MeanWorld::new(parse_all(&raw.support)?, raw.actions, receiver)?;
    let mut problems = Vec::new();
    for (i, p) in raw.problems.iter().enumerate() {
        let menu = menu_indices(&world, &p.menu, i)?;
        let prior = parse_all(&p.prior)?;
        let problem = MeanProblem { world: world.clone(), sender_utility: sender.clone(), menu, prior };
        problem.check().map_err(|e| Error::input(format!("problem {i}: {e}")))?;
        problems.push((problem.menu, problem.prior));
    }
    Ok(MeanProblemSet { world, sender_utility: sender, problems })
}
