//! Revealed-preference tests for persuasion data: obedience (NIAS) and the
//! no-balanced-improvement family (NBPS and its variants).
//!
//! [`check_nbps`] builds a homogeneous system whose solutions are balanced reallocations of
//! revealed mass toward the prior. A solution is a violation witness; its absence yields
//! dual multipliers that decode into a sender utility and per-menu supporting hyperplanes.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};

use crate::dataset::{
    is_informative, revealed_signal, MenuObservation, RevealedSignal, SdscDataset, World,
};
use crate::error::{Error, Result};
use crate::feasibility::{decide, support_maximal_witness, Certificate, FeasibilitySystem, RowKind};
use crate::geometry::{candidate_set, optimality_region, CandidateSet};
use crate::numeric::{add_scaled, dot, render, render_vec, sub, zeros, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Axiom {
    Nias,
    Nbps,
    SiNbps,
    Unias,
    Unbps,
    NbpsExt,
    NiasMean,
    NbpsMean,
}

impl Axiom {
    pub fn name(self) -> &'static str {
        match self {
            Axiom::Nias => "NIAS",
            Axiom::Nbps => "NBPS",
            Axiom::SiNbps => "SINBPS",
            Axiom::Unias => "UNIAS",
            Axiom::Unbps => "UNBPS",
            Axiom::NbpsExt => "NBPS_EXT",
            Axiom::NiasMean => "NIAS_M",
            Axiom::NbpsMean => "NBPS_M",
        }
    }

    pub fn from_name(name: &str) -> Option<Axiom> {
        [
            Axiom::Nias,
            Axiom::Nbps,
            Axiom::SiNbps,
            Axiom::Unias,
            Axiom::Unbps,
            Axiom::NbpsExt,
            Axiom::NiasMean,
            Axiom::NbpsMean,
        ]
        .into_iter()
        .find(|a| a.name() == name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Consistent,
    Violated,
}

/// Which variant of the balanced-improvement system to build.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub enum NbpsMode {
    /// Sender utility may depend on the state; one common prior.
    #[default]
    StateDependent,
    /// Sender utility depends on the action only.
    Transparent,
    /// Each observation carries its own prior.
    VaryingPriors,
    /// Like `StateDependent`, plus caller-declared posteriors that must be strictly suboptimal.
    Extended(Exclusions),
}

impl NbpsMode {
    pub fn axiom(&self) -> Axiom {
        match self {
            NbpsMode::StateDependent => Axiom::Nbps,
            NbpsMode::Transparent => Axiom::SiNbps,
            NbpsMode::VaryingPriors => Axiom::Unbps,
            NbpsMode::Extended(_) => Axiom::NbpsExt,
        }
    }

    fn exclusions(&self, observation: usize, action: usize) -> &[Vec<Rational>] {
        match self {
            NbpsMode::Extended(ex) => ex.get(observation, action),
            _ => &[],
        }
    }

    fn transparent(&self) -> bool {
        matches!(self, NbpsMode::Transparent)
    }
}

/// Extra posteriors, per observation and action, at which the sender must strictly lose.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Exclusions {
    pub points: BTreeMap<(usize, usize), Vec<Vec<Rational>>>,
}

impl Exclusions {
    pub fn add(&mut self, observation: usize, action: usize, point: Vec<Rational>) {
        self.points.entry((observation, action)).or_default().push(point);
    }

    pub fn get(&self, observation: usize, action: usize) -> &[Vec<Rational>] {
        self.points.get(&(observation, action)).map_or(&[], |v| v.as_slice())
    }
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExclusions {
    exclusions: Vec<RawExclusion>,
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExclusion {
    observation: usize,
    action: String,
    posterior: BTreeMap<String, crate::dataset::RawQ>,
}

/// Reads `{"exclusions": [{"observation", "action", "posterior": {state: q}}]}` against `dataset`.
pub fn exclusions_from_json(text: &str, dataset: &SdscDataset) -> Result<Exclusions> {
    let raw: RawExclusions = serde_json::from_str(text)?;
    let world = &dataset.world;
    let mut out = Exclusions::default();
    for (k, e) in raw.exclusions.iter().enumerate() {
        let obs = dataset
            .observations
            .get(e.observation)
            .ok_or_else(|| Error::input(format!("exclusion {k}: no observation {}", e.observation)))?;
        let action = world
            .action_index(&e.action)
            .filter(|a| obs.menu.contains(a))
            .ok_or_else(|| Error::input(format!("exclusion {k}: `{}` is not in the menu", e.action)))?;
        let point = crate::dataset::state_map(&world.states, &e.posterior, &format!("exclusion {k}"))?;
        out.add(e.observation, action, point);
    }
    Ok(out)
}

/// An atom of a reallocation: some weight on an action-posterior pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessAtom {
    pub action: usize,
    pub posterior: Vec<Rational>,
    pub weight: Rational,
}

/// Mass taken from revealed atoms of one menu and moved to candidate posteriors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MenuReallocation {
    pub observation: usize,
    pub weight: Rational,
    pub removed: Vec<WitnessAtom>,
    pub added: Vec<WitnessAtom>,
    /// The revealed signal after moving `step` times the reallocation.
    pub perturbed: Vec<WitnessAtom>,
}

impl MenuReallocation {
    /// Removed mass as a distribution over revealed atoms.
    pub fn removed_distribution(&self) -> Vec<WitnessAtom> {
        normalise(&self.removed, &self.weight)
    }

    /// Added mass as a distribution over candidate posteriors.
    pub fn added_distribution(&self) -> Vec<WitnessAtom> {
        normalise(&self.added, &self.weight)
    }
}

fn normalise(atoms: &[WitnessAtom], total: &Rational) -> Vec<WitnessAtom> {
    atoms
        .iter()
        .map(|a| WitnessAtom { weight: &a.weight / total, ..a.clone() })
        .collect()
}

/// A balanced reallocation across menus that puts positive mass on the prior.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BalancedSignal {
    pub menus: Vec<MenuReallocation>,
    /// Scale applied to every weight when forming the perturbed signals.
    pub step: Rational,
}

impl BalancedSignal {
    pub fn weights(&self) -> Vec<Rational> {
        self.menus.iter().map(|m| m.weight.clone()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NiasViolation {
    pub observation: usize,
    pub chosen: usize,
    pub better: usize,
    pub posterior: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    Nias(Vec<NiasViolation>),
    /// An informative menu that also reveals the prior.
    PriorRevealed { observation: usize, action: usize },
    Reallocation(BalancedSignal),
    /// A revealed posterior of an action optimal at the prior can be pushed further from it.
    RaySplit {
        observation: usize,
        action: usize,
        posterior: Vec<Rational>,
        extended: Vec<Rational>,
        epsilon: Rational,
    },
    Mean(crate::mean::MeanWitness),
}

/// Sender utility `u[action][state]` and the supporting hyperplane of each observation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SenderRationalization {
    pub sender_utility: Vec<Vec<Rational>>,
    pub menu_values: Vec<Vec<Rational>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rationalizer {
    State(SenderRationalization),
    Mean(crate::mean::MeanRationalizer),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub axiom: Axiom,
    pub outcome: Outcome,
    pub witness: Option<Witness>,
    pub rationalizer: Option<Rationalizer>,
}

impl Verdict {
    pub fn consistent(axiom: Axiom, rationalizer: Option<Rationalizer>) -> Self {
        Verdict { axiom, outcome: Outcome::Consistent, witness: None, rationalizer }
    }

    pub fn violated(axiom: Axiom, witness: Witness) -> Self {
        Verdict { axiom, outcome: Outcome::Violated, witness: Some(witness), rationalizer: None }
    }

    pub fn is_consistent(&self) -> bool {
        self.outcome == Outcome::Consistent
    }

    pub fn state_rationalizer(&self) -> Option<&SenderRationalization> {
        match &self.rationalizer {
            Some(Rationalizer::State(r)) => Some(r),
            _ => None,
        }
    }

    pub fn reallocation(&self) -> Option<&BalancedSignal> {
        match &self.witness {
            Some(Witness::Reallocation(w)) => Some(w),
            _ => None,
        }
    }
}

// ---------------------------------------------------------------------------
// NIAS

/// Every revealed posterior must make its action a receiver best response.
pub fn check_nias(dataset: &SdscDataset) -> Result<Verdict> {
    dataset.ensure_valid()?;
    let axiom = if dataset.has_common_prior() { Axiom::Nias } else { Axiom::Unias };
    let world = &dataset.world;
    let mut found = Vec::new();
    for (i, obs) in dataset.observations.iter().enumerate() {
        for atom in revealed_signal(obs).atoms {
            let own = world.receiver_value(atom.action, &atom.posterior);
            for &b in &obs.menu {
                if world.receiver_value(b, &atom.posterior) > own {
                    found.push(NiasViolation {
                        observation: i,
                        chosen: atom.action,
                        better: b,
                        posterior: atom.posterior.clone(),
                    });
                }
            }
        }
    }
    Ok(if found.is_empty() {
        Verdict::consistent(axiom, None)
    } else {
        Verdict::violated(axiom, Witness::Nias(found))
    })
}

// ---------------------------------------------------------------------------
// The balanced-improvement system

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ColumnRole {
    Revealed,
    Candidate { at_prior: bool, excluded: bool },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NbpsColumn {
    pub observation: usize,
    pub action: usize,
    pub posterior: Vec<Rational>,
    pub role: ColumnRole,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NbpsRow {
    /// Bayes balance of a menu in one state.
    MenuState { observation: usize, state: usize },
    /// Per-action balance of a state-dependent utility.
    ActionState { action: usize, state: usize },
    /// Per-action mass balance of a state-independent utility.
    Action { action: usize },
}

#[derive(Clone, Debug)]
pub struct NbpsSystem {
    pub system: FeasibilitySystem,
    pub columns: Vec<NbpsColumn>,
    pub rows: Vec<NbpsRow>,
    pub mode: NbpsMode,
}

fn check_mode_priors(dataset: &SdscDataset, mode: &NbpsMode) -> Result<()> {
    if !matches!(mode, NbpsMode::VaryingPriors) && !dataset.has_common_prior() {
        return Err(Error::input(
            "observations carry different priors; use the varying-priors test",
        ));
    }
    Ok(())
}

/// The menu reveals the prior and some other posterior at once.
fn prior_among_informative(obs: &MenuObservation, signal: &RevealedSignal) -> Option<usize> {
    if !is_informative(signal, &obs.prior) {
        return None;
    }
    signal.atoms.iter().find(|a| a.posterior == obs.prior).map(|a| a.action)
}

/// Candidate sets for every action of every observation.
pub fn candidate_sets(dataset: &SdscDataset, mode: &NbpsMode) -> Result<Vec<Vec<CandidateSet>>> {
    dataset
        .observations
        .iter()
        .enumerate()
        .map(|(i, obs)| {
            obs.menu
                .iter()
                .map(|&a| candidate_set(&dataset.world, obs, a, mode.exclusions(i, a)))
                .collect()
        })
        .collect()
}

pub fn build_nbps_system(dataset: &SdscDataset, mode: &NbpsMode) -> Result<NbpsSystem> {
    dataset.ensure_valid()?;
    check_mode_priors(dataset, mode)?;
    let world = &dataset.world;
    let n = world.n_states();
    let sets = candidate_sets(dataset, mode)?;

    let mut columns = Vec::new();
    let mut objective = Vec::new();
    for (i, obs) in dataset.observations.iter().enumerate() {
        let signal = revealed_signal(obs);
        if let Some(a) = prior_among_informative(obs, &signal) {
            return Err(Error::input(format!(
                "observation {i} reveals the prior (action `{}`) alongside other posteriors and is inconsistent as given",
                world.actions[a]
            )));
        }
        for atom in &signal.atoms {
            columns.push(NbpsColumn {
                observation: i,
                action: atom.action,
                posterior: atom.posterior.clone(),
                role: ColumnRole::Revealed,
            });
            objective.push(Rational::zero());
        }
        let prior_revealed = signal.reveals(&obs.prior);
        for set in &sets[i] {
            for p in &set.points {
                let at_prior = !prior_revealed && *p == obs.prior;
                let excluded = set.excluded.contains(p);
                columns.push(NbpsColumn {
                    observation: i,
                    action: set.action,
                    posterior: p.clone(),
                    role: ColumnRole::Candidate { at_prior, excluded },
                });
                objective.push(if at_prior || excluded { -Rational::one() } else { Rational::zero() });
            }
        }
    }

    let offered: BTreeSet<usize> =
        dataset.observations.iter().flat_map(|o| o.menu.iter().copied()).collect();
    let mut rows = Vec::new();
    for i in 0..dataset.observations.len() {
        rows.extend((0..n).map(|state| NbpsRow::MenuState { observation: i, state }));
    }
    for &a in &offered {
        if mode.transparent() {
            rows.push(NbpsRow::Action { action: a });
        } else {
            rows.extend((0..n).map(|state| NbpsRow::ActionState { action: a, state }));
        }
    }

    let matrix: Vec<Vec<Rational>> = rows
        .iter()
        .map(|row| {
            columns
                .iter()
                .map(|col| {
                    let sign = if col.role == ColumnRole::Revealed { 1 } else { -1 };
                    let entry = match *row {
                        NbpsRow::MenuState { observation, state } if observation == col.observation => {
                            col.posterior[state].clone()
                        }
                        NbpsRow::ActionState { action, state } if action == col.action => {
                            -col.posterior[state].clone()
                        }
                        NbpsRow::Action { action } if action == col.action => -Rational::one(),
                        _ => return Rational::zero(),
                    };
                    if sign > 0 {
                        entry
                    } else {
                        -entry
                    }
                })
                .collect()
        })
        .collect();

    let row_labels = rows.iter().map(|r| row_label(world, r)).collect();
    let column_labels = columns.iter().map(|c| column_label(world, c)).collect();
    let row_kinds = vec![RowKind::Eq; rows.len()];
    Ok(NbpsSystem {
        system: FeasibilitySystem { matrix, row_kinds, objective, row_labels, column_labels },
        columns,
        rows,
        mode: mode.clone(),
    })
}

fn row_label(world: &World, row: &NbpsRow) -> String {
    match *row {
        NbpsRow::MenuState { observation, state } => {
            format!("menu[{observation}]/{}", world.states[state])
        }
        NbpsRow::ActionState { action, state } => {
            format!("action[{}]/{}", world.actions[action], world.states[state])
        }
        NbpsRow::Action { action } => format!("action[{}]", world.actions[action]),
    }
}

fn column_label(world: &World, col: &NbpsColumn) -> String {
    let kind = match col.role {
        ColumnRole::Revealed => "revealed",
        ColumnRole::Candidate { .. } => "candidate",
    };
    format!(
        "{kind}[{}]/{}@{}",
        col.observation,
        world.actions[col.action],
        render_vec(&col.posterior)
    )
}

/// Runs the balanced-improvement test in the given mode.
pub fn check_nbps(dataset: &SdscDataset, mode: &NbpsMode) -> Result<Verdict> {
    dataset.ensure_valid()?;
    check_mode_priors(dataset, mode)?;
    let axiom = mode.axiom();
    for (i, obs) in dataset.observations.iter().enumerate() {
        if let Some(action) = prior_among_informative(obs, &revealed_signal(obs)) {
            return Ok(Verdict::violated(axiom, Witness::PriorRevealed { observation: i, action }));
        }
    }
    let built = build_nbps_system(dataset, mode)?;
    match decide(&built.system)? {
        Certificate::PrimalWitness { x } => {
            let x = support_maximal_witness(&built.system)?.unwrap_or(x);
            let witness = decode_witness(dataset, &built, &x);
            if let Err(msg) = verify_reallocation(dataset, mode, &witness) {
                return Err(Error::Internal(format!("decoded witness does not replay: {msg}")));
            }
            Ok(Verdict::violated(axiom, Witness::Reallocation(witness)))
        }
        Certificate::DualRationalizer { y, .. } => {
            let r = decode_rationalizer(dataset, &built, &y);
            let failures = rationalizer_failures(dataset, &r, mode);
            if !failures.is_empty() {
                return Err(Error::Internal(format!(
                    "extracted rationalizer does not validate: {}",
                    failures.join("; ")
                )));
            }
            Ok(Verdict::consistent(axiom, Some(Rationalizer::State(r))))
        }
    }
}

fn decode_witness(dataset: &SdscDataset, built: &NbpsSystem, x: &[Rational]) -> BalancedSignal {
    let mut menus: Vec<MenuReallocation> = Vec::new();
    for (i, obs) in dataset.observations.iter().enumerate() {
        let mut removed = Vec::new();
        let mut added = Vec::new();
        for (col, w) in built.columns.iter().zip(x) {
            if col.observation != i || w.is_zero() {
                continue;
            }
            let atom = WitnessAtom { action: col.action, posterior: col.posterior.clone(), weight: w.clone() };
            match col.role {
                ColumnRole::Revealed => removed.push(atom),
                ColumnRole::Candidate { .. } => added.push(atom),
            }
        }
        let weight: Rational = removed.iter().map(|a| &a.weight).sum();
        if weight.is_zero() {
            continue;
        }
        let _ = obs;
        menus.push(MenuReallocation { observation: i, weight, removed, added, perturbed: Vec::new() });
    }
    let step = perturbation_step(dataset, &menus);
    for m in menus.iter_mut() {
        m.perturbed = perturb(&dataset.observations[m.observation], m, &step);
    }
    BalancedSignal { menus, step }
}

/// Largest step no bigger than `1 / max weight` that keeps every perturbed mass nonnegative.
fn perturbation_step(dataset: &SdscDataset, menus: &[MenuReallocation]) -> Rational {
    let mut step = menus
        .iter()
        .map(|m| m.weight.clone())
        .max()
        .map_or_else(Rational::one, |d| d.recip());
    for m in menus {
        let signal = revealed_signal(&dataset.observations[m.observation]);
        for r in &m.removed {
            if let Some(atom) = signal.atom(r.action) {
                let cap = &atom.mass / &r.weight;
                if cap < step {
                    step = cap;
                }
            }
        }
    }
    step
}

fn perturb(obs: &MenuObservation, m: &MenuReallocation, step: &Rational) -> Vec<WitnessAtom> {
    let mut mass: BTreeMap<(usize, Vec<Rational>), Rational> = BTreeMap::new();
    for atom in revealed_signal(obs).atoms {
        *mass.entry((atom.action, atom.posterior)).or_insert_with(Rational::zero) += atom.mass;
    }
    for r in &m.removed {
        *mass.entry((r.action, r.posterior.clone())).or_insert_with(Rational::zero) -= &r.weight * step;
    }
    for a in &m.added {
        *mass.entry((a.action, a.posterior.clone())).or_insert_with(Rational::zero) += &a.weight * step;
    }
    mass.into_iter()
        .filter(|(_, w)| !w.is_zero())
        .map(|((action, posterior), weight)| WitnessAtom { action, posterior, weight })
        .collect()
}

/// Checks a reallocation directly against the balance conditions it has to satisfy.
pub fn verify_reallocation(
    dataset: &SdscDataset,
    mode: &NbpsMode,
    w: &BalancedSignal,
) -> std::result::Result<(), String> {
    let world = &dataset.world;
    let n = world.n_states();
    let sets = candidate_sets(dataset, mode).map_err(|e| e.to_string())?;
    if w.menus.is_empty() {
        return Err("no menu carries weight".into());
    }
    if !w.step.is_positive() {
        return Err("step must be positive".into());
    }
    let mut per_action: BTreeMap<usize, Vec<Rational>> = BTreeMap::new();
    let mut seen = BTreeSet::new();
    let mut hits_prior = false;
    for m in &w.menus {
        let obs = dataset
            .observations
            .get(m.observation)
            .ok_or_else(|| format!("unknown observation {}", m.observation))?;
        if !seen.insert(m.observation) {
            return Err(format!("observation {} listed twice", m.observation));
        }
        let signal = revealed_signal(obs);
        let mut balance = zeros(n);
        let mut removed_total = Rational::zero();
        for r in &m.removed {
            if !r.weight.is_positive() {
                return Err("removed weights must be positive".into());
            }
            match signal.atom(r.action) {
                Some(atom) if atom.posterior == r.posterior => {}
                _ => return Err(format!("observation {}: removed atom is not revealed", m.observation)),
            }
            add_scaled(&mut balance, &r.posterior, &r.weight);
            removed_total += &r.weight;
            let slot = per_action.entry(r.action).or_insert_with(|| zeros(n));
            add_vector_or_mass(slot, &r.posterior, &r.weight, mode.transparent());
        }
        let mut added_total = Rational::zero();
        for a in &m.added {
            if !a.weight.is_positive() {
                return Err("added weights must be positive".into());
            }
            let k = obs
                .position(a.action)
                .ok_or_else(|| format!("observation {}: added action outside the menu", m.observation))?;
            let set = &sets[m.observation][k];
            if !set.points.contains(&a.posterior) {
                return Err(format!(
                    "observation {}: {} is not a candidate posterior of `{}`",
                    m.observation,
                    render_vec(&a.posterior),
                    world.actions[a.action]
                ));
            }
            if (a.posterior == obs.prior && !signal.reveals(&obs.prior)) || set.excluded.contains(&a.posterior) {
                hits_prior = true;
            }
            add_scaled(&mut balance, &a.posterior, &-a.weight.clone());
            added_total += &a.weight;
            let slot = per_action.entry(a.action).or_insert_with(|| zeros(n));
            add_vector_or_mass(slot, &a.posterior, &-a.weight.clone(), mode.transparent());
        }
        if removed_total != m.weight || added_total != m.weight {
            return Err(format!("observation {}: removed and added mass differ from the weight", m.observation));
        }
        if balance.iter().any(|v| !v.is_zero()) {
            return Err(format!("observation {}: reallocation moves the mean", m.observation));
        }
        let expected = perturb(obs, m, &w.step);
        if expected != m.perturbed {
            return Err(format!("observation {}: perturbed signal does not match", m.observation));
        }
        let mut total = Rational::zero();
        let mut mean = zeros(n);
        for atom in &m.perturbed {
            if atom.weight.is_negative() {
                return Err(format!("observation {}: perturbed signal has negative mass", m.observation));
            }
            total += &atom.weight;
            add_scaled(&mut mean, &atom.posterior, &atom.weight);
        }
        if !total.is_one() || mean != obs.prior {
            return Err(format!("observation {}: perturbed signal is not Bayes plausible", m.observation));
        }
    }
    if let Some((a, _)) = per_action.iter().find(|(_, v)| v.iter().any(|x| !x.is_zero())) {
        return Err(format!("action `{}` is not balanced across menus", world.actions[*a]));
    }
    if !hits_prior {
        return Err("no mass reaches the prior".into());
    }
    Ok(())
}

fn add_vector_or_mass(slot: &mut [Rational], p: &[Rational], w: &Rational, mass_only: bool) {
    if mass_only {
        slot[0] += w;
    } else {
        add_scaled(slot, p, w);
    }
}

fn decode_rationalizer(dataset: &SdscDataset, built: &NbpsSystem, y: &[Rational]) -> SenderRationalization {
    let world = &dataset.world;
    let n = world.n_states();
    let mut sender_utility = vec![zeros(n); world.actions.len()];
    let mut menu_values = vec![zeros(n); dataset.observations.len()];
    for (row, v) in built.rows.iter().zip(y) {
        match *row {
            NbpsRow::MenuState { observation, state } => menu_values[observation][state] = v.clone(),
            NbpsRow::ActionState { action, state } => sender_utility[action][state] = v.clone(),
            NbpsRow::Action { action } => sender_utility[action] = vec![v.clone(); n],
        }
    }
    SenderRationalization { sender_utility, menu_values }
}

/// Every way a proposed rationalizer fails the optimality conditions; empty means valid.
pub fn rationalizer_failures(
    dataset: &SdscDataset,
    r: &SenderRationalization,
    mode: &NbpsMode,
) -> Vec<String> {
    let world = &dataset.world;
    let n = world.n_states();
    let mut out = Vec::new();
    if r.sender_utility.len() != world.actions.len()
        || r.sender_utility.iter().any(|u| u.len() != n)
        || r.menu_values.len() != dataset.observations.len()
        || r.menu_values.iter().any(|l| l.len() != n)
    {
        return vec!["rationalizer has the wrong shape".into()];
    }
    let sets = match candidate_sets(dataset, mode) {
        Ok(s) => s,
        Err(e) => return vec![e.to_string()],
    };
    let u = |a: usize, p: &[Rational]| dot(&r.sender_utility[a], p);
    for (i, obs) in dataset.observations.iter().enumerate() {
        let lambda = &r.menu_values[i];
        let signal = revealed_signal(obs);
        for atom in &signal.atoms {
            if u(atom.action, &atom.posterior) != dot(lambda, &atom.posterior) {
                out.push(format!(
                    "observation {i}: `{}` at {} is off the supporting hyperplane",
                    world.actions[atom.action],
                    render_vec(&atom.posterior)
                ));
            }
        }
        for set in &sets[i] {
            for p in &set.points {
                let gap = dot(lambda, p) - u(set.action, p);
                let strict = set.excluded.contains(p);
                if gap.is_negative() || (strict && gap.is_zero()) {
                    out.push(format!(
                        "observation {i}: `{}` at {} beats the hyperplane by {}",
                        world.actions[set.action],
                        render_vec(p),
                        render(&-gap)
                    ));
                }
            }
        }
        if is_informative(&signal, &obs.prior) {
            let value = dot(lambda, &obs.prior);
            for a in world.receiver_best(&obs.menu, &obs.prior) {
                if u(a, &obs.prior) >= value {
                    out.push(format!(
                        "observation {i}: no strict gain from persuasion over `{}` at the prior",
                        world.actions[a]
                    ));
                }
            }
        }
    }
    if mode.transparent() {
        for (a, row) in r.sender_utility.iter().enumerate() {
            if row.windows(2).any(|w| w[0] != w[1]) {
                out.push(format!("utility of `{}` depends on the state", world.actions[a]));
            }
        }
    }
    out
}

/// True when `r` rationalizes the data with a state-dependent sender utility.
pub fn validate_rationalizer(dataset: &SdscDataset, r: &SenderRationalization) -> bool {
    let mode = if dataset.has_common_prior() { NbpsMode::StateDependent } else { NbpsMode::VaryingPriors };
    rationalizer_failures(dataset, r, &mode).is_empty()
}

// ---------------------------------------------------------------------------
// Single menu

/// Direct geometric test for one menu: data is inconsistent exactly when it is informative
/// and a revealed posterior of an action optimal at the prior can be pushed further away from
/// the prior without leaving that action's region.
pub fn check_single_menu(world: &World, obs: &MenuObservation) -> Result<Verdict> {
    let dataset = SdscDataset { world: world.clone(), observations: vec![obs.clone()] };
    dataset.ensure_valid()?;
    let signal = revealed_signal(obs);
    let axiom = Axiom::Nbps;
    if !is_informative(&signal, &obs.prior) {
        return Ok(Verdict::consistent(axiom, None));
    }
    if let Some(action) = prior_among_informative(obs, &signal) {
        return Ok(Verdict::violated(axiom, Witness::PriorRevealed { observation: 0, action }));
    }
    for a in world.receiver_best(&obs.menu, &obs.prior) {
        let Some(atom) = signal.atom(a) else { continue };
        if let Some(epsilon) = ray_room(world, &obs.menu, a, &atom.posterior, &obs.prior) {
            let dir = sub(&atom.posterior, &obs.prior);
            let mut extended = atom.posterior.clone();
            add_scaled(&mut extended, &dir, &epsilon);
            return Ok(Verdict::violated(
                axiom,
                Witness::RaySplit {
                    observation: 0,
                    action: a,
                    posterior: atom.posterior.clone(),
                    extended,
                    epsilon,
                },
            ));
        }
    }
    Ok(Verdict::consistent(axiom, None))
}

/// Some `e > 0` with `p + e (p - prior)` still in the region of `action`, if one exists.
fn ray_room(
    world: &World,
    menu: &[usize],
    action: usize,
    p: &[Rational],
    prior: &[Rational],
) -> Option<Rational> {
    let region = optimality_region(world, menu, action);
    let dir = sub(p, prior);
    // each constraint g(p) >= 0 is linear; collect (level, slope along dir)
    let mut limits: Vec<(Rational, Rational)> =
        region.halfspaces.iter().map(|h| (dot(&h.normal, p), dot(&h.normal, &dir))).collect();
    limits.extend(p.iter().zip(&dir).map(|(pk, dk)| (pk.clone(), dk.clone())));
    let mut eps = Rational::one();
    for (level, slope) in limits {
        if level.is_negative() {
            return None;
        }
        if !slope.is_negative() {
            continue;
        }
        if level.is_zero() {
            return None;
        }
        let cap = &level / -slope;
        if cap < eps {
            eps = cap;
        }
    }
    Some(eps)
}

/// Replays the single-menu geometric witness.
pub fn verify_ray_split(
    world: &World,
    obs: &MenuObservation,
    action: usize,
    posterior: &[Rational],
    extended: &[Rational],
    epsilon: &Rational,
) -> bool {
    let signal = revealed_signal(obs);
    let revealed = signal.atom(action).is_some_and(|a| a.posterior == posterior);
    let mut expect = posterior.to_vec();
    add_scaled(&mut expect, &sub(posterior, &obs.prior), epsilon);
    revealed
        && epsilon.is_positive()
        && expect == extended
        && is_informative(&signal, &obs.prior)
        && world.receiver_best(&obs.menu, &obs.prior).contains(&action)
        && optimality_region(world, &obs.menu, action).contains(extended)
}

/// Re-checks any state-space verdict against the dataset.
pub fn replay_verdict(dataset: &SdscDataset, verdict: &Verdict, mode: &NbpsMode) -> std::result::Result<(), String> {
    match (&verdict.outcome, &verdict.witness, &verdict.rationalizer) {
        (Outcome::Violated, Some(Witness::Nias(list)), _) => {
            let world = &dataset.world;
            for v in list {
                let obs = dataset.observations.get(v.observation).ok_or("unknown observation")?;
                let ok = revealed_signal(obs).atom(v.chosen).is_some_and(|a| a.posterior == v.posterior)
                    && obs.menu.contains(&v.better)
                    && world.receiver_value(v.better, &v.posterior) > world.receiver_value(v.chosen, &v.posterior);
                if !ok {
                    return Err(format!("observation {}: obedience violation does not hold", v.observation));
                }
            }
            if list.is_empty() { Err("empty violation list".into()) } else { Ok(()) }
        }
        (Outcome::Violated, Some(Witness::PriorRevealed { observation, action }), _) => {
            let obs = dataset.observations.get(*observation).ok_or("unknown observation")?;
            let signal = revealed_signal(obs);
            if prior_among_informative(obs, &signal) == Some(*action) {
                Ok(())
            } else {
                Err("menu does not reveal the prior alongside other posteriors".into())
            }
        }
        (Outcome::Violated, Some(Witness::Reallocation(w)), _) => verify_reallocation(dataset, mode, w),
        (Outcome::Violated, Some(Witness::RaySplit { observation, action, posterior, extended, epsilon }), _) => {
            let obs = dataset.observations.get(*observation).ok_or("unknown observation")?;
            if verify_ray_split(&dataset.world, obs, *action, posterior, extended, epsilon) {
                Ok(())
            } else {
                Err("ray split does not hold".into())
            }
        }
        (Outcome::Consistent, _, Some(Rationalizer::State(r))) => {
            let failures = rationalizer_failures(dataset, r, mode);
            if failures.is_empty() { Ok(()) } else { Err(failures.join("; ")) }
        }
        (Outcome::Consistent, _, None) => check_nias(dataset)
            .map_err(|e| e.to_string())
            .and_then(|v| if v.is_consistent() { Ok(()) } else { Err("obedience fails".into()) }),
        _ => Err("verdict carries no certificate of the right kind".into()),
    }
}

/// Full pipeline: obedience first, then the balanced-improvement test in `mode`.
#[derive(Clone, Debug)]
pub struct CheckReport {
    pub nias: Verdict,
    pub nbps: Option<Verdict>,
}

impl CheckReport {
    pub fn outcome(&self) -> Outcome {
        match &self.nbps {
            Some(v) if self.nias.is_consistent() => v.outcome,
            _ => self.nias.outcome,
        }
    }

    /// The verdict that decided the outcome.
    pub fn decisive(&self) -> &Verdict {
        match &self.nbps {
            Some(v) if self.nias.is_consistent() => v,
            _ => &self.nias,
        }
    }
}

pub fn check(dataset: &SdscDataset, mode: &NbpsMode) -> Result<CheckReport> {
    let nias = check_nias(dataset)?;
    if !nias.is_consistent() {
        return Ok(CheckReport { nias, nbps: None });
    }
    let nbps = check_nbps(dataset, mode)?;
    Ok(CheckReport { nias, nbps: Some(nbps) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;
    use crate::numeric::{int, q};

    #[test]
    fn nias_on_examples() {
        assert!(check_nias(&examples::example3()).unwrap().is_consistent());
        assert!(check_nias(&examples::example4()).unwrap().is_consistent());
        let mut d = examples::example4();
        d.observations[0].sigma.swap(1, 2);
        let v = check_nias(&d).unwrap();
        assert_eq!(v.outcome, Outcome::Violated);
        let Some(Witness::Nias(list)) = &v.witness else { panic!() };
        assert!(list.iter().any(|x| x.chosen == 1 && x.better == 2));
        replay_verdict(&d, &v, &NbpsMode::StateDependent).unwrap();
    }

    #[test]
    fn example1_split() {
        let v = check_nbps(&examples::example1(), &NbpsMode::StateDependent).unwrap();
        let w = v.reallocation().expect("violation");
        assert_eq!(w.menus.len(), 1);
        let added = w.menus[0].added_distribution();
        let pairs: Vec<(Rational, Rational)> =
            added.iter().map(|a| (a.posterior[1].clone(), a.weight.clone())).collect();
        assert!(pairs.contains(&(q(1, 5), q(1, 3))));
        assert!(pairs.contains(&(q(1, 2), q(2, 3))));
        assert!(check_nbps(&examples::example1_consistent(), &NbpsMode::StateDependent)
            .unwrap()
            .is_consistent());
    }

    #[test]
    fn system_shape() {
        let s = build_nbps_system(&examples::example1(), &NbpsMode::StateDependent).unwrap();
        // 2 menu rows + 4 actions x 2 states
        assert_eq!(s.rows.len(), 10);
        let prior_cols = s.system.objective.iter().filter(|c| c.is_negative()).count();
        assert_eq!(prior_cols, 1);
        let t = build_nbps_system(&examples::example1(), &NbpsMode::Transparent).unwrap();
        assert_eq!(t.rows.len(), 6);
        // a revealed column in an action row carries -1
        let row = t.rows.iter().position(|r| *r == NbpsRow::Action { action: 1 }).unwrap();
        let col = t.columns.iter().position(|c| c.role == ColumnRole::Revealed && c.action == 1).unwrap();
        assert_eq!(t.system.matrix[row][col], int(-1));
    }

    #[test]
    fn prior_and_other_posterior_in_one_menu() {
        let mut d = examples::example1();
        // b at the prior with mass 1/2, c at 4/5 and a at 1/5 with mass 1/4 each
        d.observations[0].sigma = vec![
            vec![q(2, 5), q(1, 10)],
            vec![q(1, 2), q(1, 2)],
            vec![q(1, 10), q(2, 5)],
            vec![int(0), int(0)],
        ];
        assert!(build_nbps_system(&d, &NbpsMode::StateDependent).is_err());
        let v = check_nbps(&d, &NbpsMode::StateDependent).unwrap();
        assert!(matches!(v.witness, Some(Witness::PriorRevealed { action: 1, .. })));
        let s = check_single_menu(&d.world, &d.observations[0]).unwrap();
        assert_eq!(s.outcome, Outcome::Violated);
    }

    #[test]
    fn zero_utility_is_not_a_rationalizer() {
        let d = examples::example1_consistent();
        let r = SenderRationalization { sender_utility: vec![zeros(2); 4], menu_values: vec![zeros(2)] };
        assert!(!validate_rationalizer(&d, &r));
    }

    #[test]
    fn varying_priors_required_when_priors_differ() {
        let mut d = examples::example3();
        d.observations[1].prior = vec![q(2, 5), q(3, 5)];
        d.observations[1].sigma = vec![vec![int(1), int(0)], vec![int(0), int(1)]];
        assert!(check_nbps(&d, &NbpsMode::StateDependent).is_err());
        let v = check_nbps(&d, &NbpsMode::VaryingPriors).unwrap();
        assert_eq!(v.axiom, Axiom::Unbps);
        assert_eq!(check_nias(&d).unwrap().axiom, Axiom::Unias);
    }

    #[test]
    fn single_menu_examples() {
        let d = examples::example1();
        let v = check_single_menu(&d.world, &d.observations[0]).unwrap();
        assert_eq!(v.outcome, Outcome::Violated);
        replay_verdict(&d, &v, &NbpsMode::StateDependent).unwrap();
        let d = examples::example1_consistent();
        assert!(check_single_menu(&d.world, &d.observations[0]).unwrap().is_consistent());
    }

    #[test]
    fn exclusions_tighten_the_test() {
        let d = examples::example1_consistent();
        let mut ex = Exclusions::default();
        ex.add(0, 1, examples::binary_belief(q(2, 5)));
        let v = check_nbps(&d, &NbpsMode::Extended(ex.clone())).unwrap();
        assert_eq!(v.axiom, Axiom::NbpsExt);
        // b sits at the end of its region, so no split can reach 2/5
        assert!(v.is_consistent());
        let r = v.state_rationalizer().unwrap();
        assert!(rationalizer_failures(&d, r, &NbpsMode::Extended(ex)).is_empty());
    }
}
