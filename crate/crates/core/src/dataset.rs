//! Stochastic choice data: a receiver world, menus, priors and choice columns.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{dot, is_distribution, rational_from_string, render, render_vec, sum, Rational};

/// States, actions and the receiver's state-contingent utility `v[action][state]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct World {
    pub states: Vec<String>,
    pub actions: Vec<String>,
    pub receiver_utility: Vec<Vec<Rational>>,
}

impl World {
    pub fn new(
        states: Vec<String>,
        actions: Vec<String>,
        receiver_utility: Vec<Vec<Rational>>,
    ) -> Result<Self> {
        if states.len() < 2 {
            return Err(Error::input("a world needs at least two states"));
        }
        if actions.is_empty() {
            return Err(Error::input("a world needs at least one action"));
        }
        if let Some(d) = first_duplicate(&states) {
            return Err(Error::input(format!("duplicate state `{d}`")));
        }
        if let Some(d) = first_duplicate(&actions) {
            return Err(Error::input(format!("duplicate action `{d}`")));
        }
        if receiver_utility.len() != actions.len()
            || receiver_utility.iter().any(|row| row.len() != states.len())
        {
            return Err(Error::input("receiver utility must be |actions| x |states|"));
        }
        Ok(World { states, actions, receiver_utility })
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn action_index(&self, label: &str) -> Option<usize> {
        self.actions.iter().position(|a| a == label)
    }

    pub fn state_index(&self, label: &str) -> Option<usize> {
        self.states.iter().position(|s| s == label)
    }

    /// Expected receiver payoff of `action` at belief `belief`.
    pub fn receiver_value(&self, action: usize, belief: &[Rational]) -> Rational {
        dot(&self.receiver_utility[action], belief)
    }

    /// Menu actions that maximise the receiver's expected payoff at `belief`, in menu order.
    pub fn receiver_best(&self, menu: &[usize], belief: &[Rational]) -> Vec<usize> {
        let values: Vec<Rational> = menu.iter().map(|&a| self.receiver_value(a, belief)).collect();
        let best = values.iter().max().cloned().unwrap_or_else(Rational::zero);
        menu.iter().zip(&values).filter(|(_, v)| **v == best).map(|(a, _)| *a).collect()
    }
}

fn first_duplicate(labels: &[String]) -> Option<&str> {
    let mut seen = BTreeSet::new();
    labels.iter().find(|l| !seen.insert(l.as_str())).map(|s| s.as_str())
}

/// One menu with its prior and the choice probabilities `sigma[k][state]` of `menu[k]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MenuObservation {
    pub menu: Vec<usize>,
    pub prior: Vec<Rational>,
    pub sigma: Vec<Vec<Rational>>,
}

impl MenuObservation {
    pub fn position(&self, action: usize) -> Option<usize> {
        self.menu.iter().position(|&a| a == action)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SdscDataset {
    pub world: World,
    pub observations: Vec<MenuObservation>,
}

impl SdscDataset {
    /// True when every observation carries the same prior.
    pub fn has_common_prior(&self) -> bool {
        self.observations.windows(2).all(|w| w[0].prior == w[1].prior)
    }

    /// Fails with [`Error::Validation`] unless [`validate`] reports nothing.
    pub fn ensure_valid(&self) -> Result<()> {
        let violations = validate(self);
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(violations))
        }
    }
}

/// One way a dataset fails to be well formed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    EmptyMenu { observation: usize },
    RepeatedMenuAction { observation: usize, action: String },
    UnknownAction { observation: usize, action: usize },
    DimensionMismatch { observation: usize, what: &'static str },
    PriorNotPositive { observation: usize, state: String },
    PriorNotNormalized { observation: usize, total: Rational },
    NegativePrior { observation: usize, state: String },
    NegativeChoice { observation: usize, action: String, state: String },
    ColumnNotNormalized { observation: usize, state: String, total: Rational },
    RepeatedObservation { first: usize, second: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            EmptyMenu { observation } => write!(f, "observation {observation}: empty menu"),
            RepeatedMenuAction { observation, action } => {
                write!(f, "observation {observation}: action `{action}` listed twice")
            }
            UnknownAction { observation, action } => {
                write!(f, "observation {observation}: action index {action} out of range")
            }
            DimensionMismatch { observation, what } => {
                write!(f, "observation {observation}: {what} has the wrong shape")
            }
            PriorNotPositive { observation, state } => write!(
                f,
                "observation {observation}: prior must have full support, state `{state}` is not positive"
            ),
            NegativePrior { observation, state } => {
                write!(f, "observation {observation}: negative prior mass at `{state}`")
            }
            PriorNotNormalized { observation, total } => {
                write!(f, "observation {observation}: prior sums to {}", render(total))
            }
            NegativeChoice { observation, action, state } => write!(
                f,
                "observation {observation}: negative choice probability for `{action}` in state `{state}`"
            ),
            ColumnNotNormalized { observation, state, total } => write!(
                f,
                "observation {observation}: choice column for state `{state}` sums to {}",
                render(total)
            ),
            RepeatedObservation { first, second } => write!(
                f,
                "observations {first} and {second} repeat the same menu and prior; aggregate them first"
            ),
        }
    }
}

/// Lists every structural problem with the dataset. An empty list means the data is usable.
pub fn validate(dataset: &SdscDataset) -> Vec<Violation> {
    let world = &dataset.world;
    let n = world.n_states();
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
                out.push(Violation::RepeatedMenuAction {
                    observation: i,
                    action: world.actions[a].clone(),
                });
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
        for (w, p) in obs.prior.iter().enumerate() {
            if !p.is_positive() {
                out.push(Violation::PriorNotPositive {
                    observation: i,
                    state: world.states[w].clone(),
                });
            }
        }
        let total = sum(&obs.prior);
        if !total.is_one() {
            out.push(Violation::PriorNotNormalized { observation: i, total });
        }
        for (k, row) in obs.sigma.iter().enumerate() {
            for (w, s) in row.iter().enumerate() {
                if s.is_negative() {
                    let action = obs.menu.get(k).and_then(|&a| world.actions.get(a));
                    out.push(Violation::NegativeChoice {
                        observation: i,
                        action: action.cloned().unwrap_or_default(),
                        state: world.states[w].clone(),
                    });
                }
            }
        }
        for w in 0..n {
            let total: Rational = obs.sigma.iter().map(|row| &row[w]).sum();
            if !total.is_one() {
                out.push(Violation::ColumnNotNormalized {
                    observation: i,
                    state: world.states[w].clone(),
                    total,
                });
            }
        }
    }
    for (i, a) in dataset.observations.iter().enumerate() {
        for (j, b) in dataset.observations.iter().enumerate().skip(i + 1) {
            let same_menu = a.menu.iter().collect::<BTreeSet<_>>() == b.menu.iter().collect();
            if same_menu && a.prior == b.prior {
                out.push(Violation::RepeatedObservation { first: i, second: j });
            }
        }
    }
    out
}

/// `sigma(a) = sum_w sigma(a|w) p0(w)`.
pub fn marginal_choice_prob(obs: &MenuObservation, action: usize) -> Result<Rational> {
    let k = obs
        .position(action)
        .ok_or_else(|| Error::input(format!("action index {action} is not in the menu")))?;
    Ok(dot(&obs.sigma[k], &obs.prior))
}

/// A chosen action together with the posterior it reveals and its probability.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RevealedAtom {
    pub action: usize,
    pub posterior: Vec<Rational>,
    pub mass: Rational,
}

/// The signal induced by a menu's choice data, one atom per chosen action.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RevealedSignal {
    pub atoms: Vec<RevealedAtom>,
}

impl RevealedSignal {
    pub fn atom(&self, action: usize) -> Option<&RevealedAtom> {
        self.atoms.iter().find(|a| a.action == action)
    }

    pub fn reveals(&self, belief: &[Rational]) -> bool {
        self.atoms.iter().any(|a| a.posterior == belief)
    }

    /// Atoms average back to this belief.
    pub fn mean(&self) -> Vec<Rational> {
        let n = self.atoms.first().map_or(0, |a| a.posterior.len());
        let mut out = vec![Rational::zero(); n];
        for atom in &self.atoms {
            crate::numeric::add_scaled(&mut out, &atom.posterior, &atom.mass);
        }
        out
    }
}

/// Bayes' rule applied to each chosen action; actions with zero probability produce no atom.
pub fn revealed_signal(obs: &MenuObservation) -> RevealedSignal {
    let mut atoms = Vec::new();
    for (k, &action) in obs.menu.iter().enumerate() {
        let mass = dot(&obs.sigma[k], &obs.prior);
        if mass.is_zero() {
            continue;
        }
        let posterior = obs.sigma[k].iter().zip(&obs.prior).map(|(s, p)| s * p / &mass).collect();
        atoms.push(RevealedAtom { action, posterior, mass });
    }
    RevealedSignal { atoms }
}

/// Informative means some revealed posterior differs from the prior.
pub fn is_informative(signal: &RevealedSignal, prior: &[Rational]) -> bool {
    signal.atoms.iter().any(|a| a.posterior != prior)
}

impl fmt::Display for RevealedSignal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for atom in &self.atoms {
            writeln!(f, "  action #{} at {} with mass {}", atom.action, render_vec(&atom.posterior), render(&atom.mass))?;
        }
        Ok(())
    }
}

/// Checks that a vector is a probability distribution with full support.
pub fn is_full_support_distribution(p: &[Rational]) -> bool {
    is_distribution(p) && p.iter().all(|x| x.is_positive())
}

// ---------------------------------------------------------------------------
// JSON

/// A rational written either as a string (`"1/3"`, `"0.4"`) or a bare JSON number.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub(crate) enum RawQ {
    Text(String),
    Number(serde_json::Number),
}

impl RawQ {
    pub(crate) fn parse(&self) -> Result<Rational> {
        match self {
            RawQ::Text(s) => Ok(rational_from_string(s)?),
            RawQ::Number(n) => Ok(rational_from_string(&n.to_string())?),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDataset {
    states: Vec<String>,
    actions: Vec<String>,
    receiver_utility: BTreeMap<String, BTreeMap<String, RawQ>>,
    observations: Vec<RawObservation>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawObservation {
    menu: Vec<String>,
    prior: BTreeMap<String, RawQ>,
    #[serde(default)]
    sigma: BTreeMap<String, BTreeMap<String, RawQ>>,
}

#[derive(Serialize)]
struct OutDataset<'a> {
    states: &'a [String],
    actions: &'a [String],
    receiver_utility: BTreeMap<&'a str, BTreeMap<&'a str, String>>,
    observations: Vec<OutObservation<'a>>,
}

#[derive(Serialize)]
struct OutObservation<'a> {
    menu: Vec<&'a str>,
    prior: BTreeMap<&'a str, String>,
    sigma: BTreeMap<&'a str, BTreeMap<&'a str, String>>,
}

pub(crate) fn state_map(
    world_states: &[String],
    raw: &BTreeMap<String, RawQ>,
    what: &str,
) -> Result<Vec<Rational>> {
    if let Some(extra) = raw.keys().find(|k| !world_states.contains(k)) {
        return Err(Error::input(format!("{what}: unknown state `{extra}`")));
    }
    world_states
        .iter()
        .map(|s| {
            raw.get(s)
                .ok_or_else(|| Error::input(format!("{what}: missing state `{s}`")))?
                .parse()
        })
        .collect()
}

/// Reads the dataset JSON schema. Missing choice entries count as zero.
pub fn dataset_from_json(text: &str) -> Result<SdscDataset> {
    let raw: RawDataset = serde_json::from_str(text)?;
    let mut utility = Vec::with_capacity(raw.actions.len());
    for a in &raw.actions {
        let row = raw
            .receiver_utility
            .get(a)
            .ok_or_else(|| Error::input(format!("receiver_utility: missing action `{a}`")))?;
        utility.push(state_map(&raw.states, row, &format!("receiver_utility[{a}]"))?);
    }
    if let Some(extra) = raw.receiver_utility.keys().find(|k| !raw.actions.contains(k)) {
        return Err(Error::input(format!("receiver_utility: unknown action `{extra}`")));
    }
    let world = World::new(raw.states, raw.actions, utility)?;
    let mut observations = Vec::new();
    for (i, ro) in raw.observations.iter().enumerate() {
        let menu = ro
            .menu
            .iter()
            .map(|a| {
                world.action_index(a).ok_or_else(|| {
                    Error::input(format!("observation {i}: unknown action `{a}` in menu"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let prior = state_map(&world.states, &ro.prior, &format!("observation {i} prior"))?;
        if let Some(extra) = ro.sigma.keys().find(|k| !ro.menu.contains(k)) {
            return Err(Error::input(format!("observation {i}: sigma names `{extra}` outside the menu")));
        }
        let mut sigma = Vec::new();
        for a in &ro.menu {
            let column = match ro.sigma.get(a) {
                None => vec![Rational::zero(); world.n_states()],
                Some(row) => {
                    if let Some(extra) = row.keys().find(|k| !world.states.contains(k)) {
                        return Err(Error::input(format!("observation {i}: unknown state `{extra}`")));
                    }
                    world
                        .states
                        .iter()
                        .map(|s| row.get(s).map_or(Ok(Rational::zero()), RawQ::parse))
                        .collect::<Result<Vec<_>>>()?
                }
            };
            sigma.push(column);
        }
        observations.push(MenuObservation { menu, prior, sigma });
    }
    Ok(SdscDataset { world, observations })
}

/// Writes the dataset JSON schema with every number as an exact string.
pub fn dataset_to_json(dataset: &SdscDataset) -> String {
    let world = &dataset.world;
    let by_state = |values: &[Rational]| -> BTreeMap<&str, String> {
        world.states.iter().map(|s| s.as_str()).zip(values.iter().map(render)).collect()
    };
    let out = OutDataset {
        states: &world.states,
        actions: &world.actions,
        receiver_utility: world
            .actions
            .iter()
            .zip(&world.receiver_utility)
            .map(|(a, row)| (a.as_str(), by_state(row)))
            .collect(),
        observations: dataset
            .observations
            .iter()
            .map(|o| OutObservation {
                menu: o.menu.iter().map(|&a| world.actions[a].as_str()).collect(),
                prior: by_state(&o.prior),
                sigma: o
                    .menu
                    .iter()
                    .zip(&o.sigma)
                    .map(|(&a, col)| (world.actions[a].as_str(), by_state(col)))
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&out).expect("dataset serialises")
}
