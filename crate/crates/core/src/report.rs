//! JSON verdict reports with exact rational strings, and a plain-text rendering for terminals.
//!
//! Actions and states are written by label. [`from_json`] resolves labels against the same
//! world and rebuilds the [`Verdict`] so it can be replayed.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dataset::World;
use crate::error::{Error, Result};
use crate::mean::{
    MeanRationalizer, MeanReallocation, MeanWeight, MeanWitness, MeanWorld, PointMass, PriceFunction,
};
use crate::numeric::{approx, rational_from_string, render, Affine, Rational};
use crate::persuasion::{
    Axiom, BalancedSignal, MenuReallocation, NiasViolation, Outcome, Rationalizer, SenderRationalization,
    Verdict, Witness, WitnessAtom,
};

/// Label tables used to name actions and belief coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Labels {
    pub states: Vec<String>,
    pub actions: Vec<String>,
}

impl Labels {
    pub fn of_world(world: &World) -> Self {
        Labels { states: world.states.clone(), actions: world.actions.clone() }
    }

    /// Mean-model beliefs have a single coordinate, the posterior mean.
    pub fn of_mean(world: &MeanWorld) -> Self {
        Labels { states: vec!["mean".into()], actions: world.actions.clone() }
    }

    fn action(&self, k: usize) -> String {
        self.actions[k].clone()
    }

    fn action_index(&self, label: &str) -> Result<usize> {
        self.actions
            .iter()
            .position(|a| a == label)
            .ok_or_else(|| Error::input(format!("unknown action `{label}` in certificate")))
    }

    fn belief(&self, p: &[Rational]) -> Belief {
        self.states.iter().cloned().zip(p.iter().map(render)).collect()
    }

    fn parse_belief(&self, b: &Belief) -> Result<Vec<Rational>> {
        if let Some(extra) = b.keys().find(|k| !self.states.contains(k)) {
            return Err(Error::input(format!("unknown state `{extra}` in certificate")));
        }
        self.states
            .iter()
            .map(|s| {
                let text = b.get(s).ok_or_else(|| Error::input(format!("belief is missing state `{s}`")))?;
                parse(text)
            })
            .collect()
    }
}

type Belief = BTreeMap<String, String>;

fn parse(text: &str) -> Result<Rational> {
    Ok(rational_from_string(text)?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub axiom: String,
    pub outcome: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rationalizer: Option<RationalizerReport>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WitnessReport {
    Obedience {
        violations: Vec<ObedienceReport>,
    },
    PriorRevealed {
        observation: usize,
        action: String,
    },
    Reallocation {
        step: String,
        menus: Vec<MenuReport>,
    },
    RaySplit {
        observation: usize,
        action: String,
        posterior: Belief,
        extended: Belief,
        epsilon: String,
    },
    Mean {
        strict_observation: usize,
        menus: Vec<MeanMenuReport>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObedienceReport {
    pub observation: usize,
    pub chosen: String,
    pub better: String,
    pub posterior: Belief,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomReport {
    pub action: String,
    pub posterior: Belief,
    pub weight: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MenuReport {
    pub observation: usize,
    pub weight: String,
    pub removed: Vec<AtomReport>,
    pub added: Vec<AtomReport>,
    pub perturbed: Vec<AtomReport>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeanWeightReport {
    pub action: String,
    pub mean: String,
    pub weight: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointReport {
    pub point: String,
    pub mass: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeanMenuReport {
    pub observation: usize,
    pub weight: String,
    pub removed: Vec<MeanWeightReport>,
    pub added: Vec<MeanWeightReport>,
    pub prior: Vec<PointReport>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineReport {
    pub intercept: String,
    pub slope: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PriceReport {
    pub breakpoints: Vec<String>,
    pub pieces: Vec<AffineReport>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RationalizerReport {
    State {
        sender_utility: BTreeMap<String, Belief>,
        menu_values: Vec<Belief>,
    },
    Mean {
        sender_utility: BTreeMap<String, AffineReport>,
        prices: Vec<PriceReport>,
    },
}

fn outcome_name(o: Outcome) -> &'static str {
    match o {
        Outcome::Consistent => "consistent",
        Outcome::Violated => "violated",
    }
}

fn affine_report(f: &Affine) -> AffineReport {
    AffineReport { intercept: render(&f.intercept), slope: render(&f.slope) }
}

fn parse_affine(r: &AffineReport) -> Result<Affine> {
    Ok(Affine::new(parse(&r.slope)?, parse(&r.intercept)?))
}

pub fn to_report(verdict: &Verdict, labels: &Labels) -> VerdictReport {
    let atoms = |list: &[WitnessAtom]| -> Vec<AtomReport> {
        list.iter()
            .map(|a| AtomReport {
                action: labels.action(a.action),
                posterior: labels.belief(&a.posterior),
                weight: render(&a.weight),
            })
            .collect()
    };
    let mean_weights = |list: &[MeanWeight]| -> Vec<MeanWeightReport> {
        list.iter()
            .map(|w| MeanWeightReport { action: labels.action(w.action), mean: render(&w.mean), weight: render(&w.weight) })
            .collect()
    };
    let witness = verdict.witness.as_ref().map(|w| match w {
        Witness::Nias(list) => WitnessReport::Obedience {
            violations: list
                .iter()
                .map(|v| ObedienceReport {
                    observation: v.observation,
                    chosen: labels.action(v.chosen),
                    better: labels.action(v.better),
                    posterior: labels.belief(&v.posterior),
                })
                .collect(),
        },
        Witness::PriorRevealed { observation, action } => {
            WitnessReport::PriorRevealed { observation: *observation, action: labels.action(*action) }
        }
        Witness::Reallocation(signal) => WitnessReport::Reallocation {
            step: render(&signal.step),
            menus: signal
                .menus
                .iter()
                .map(|m| MenuReport {
                    observation: m.observation,
                    weight: render(&m.weight),
                    removed: atoms(&m.removed),
                    added: atoms(&m.added),
                    perturbed: atoms(&m.perturbed),
                })
                .collect(),
        },
        Witness::RaySplit { observation, action, posterior, extended, epsilon } => WitnessReport::RaySplit {
            observation: *observation,
            action: labels.action(*action),
            posterior: labels.belief(posterior),
            extended: labels.belief(extended),
            epsilon: render(epsilon),
        },
        Witness::Mean(w) => WitnessReport::Mean {
            strict_observation: w.strict_observation,
            menus: w
                .menus
                .iter()
                .map(|m| MeanMenuReport {
                    observation: m.observation,
                    weight: render(&m.weight),
                    removed: mean_weights(&m.removed),
                    added: mean_weights(&m.added),
                    prior: m.prior.iter().map(|p| PointReport { point: render(&p.point), mass: render(&p.mass) }).collect(),
                })
                .collect(),
        },
    });
    let rationalizer = verdict.rationalizer.as_ref().map(|r| match r {
        Rationalizer::State(r) => RationalizerReport::State {
            sender_utility: r
                .sender_utility
                .iter()
                .enumerate()
                .map(|(a, row)| (labels.action(a), labels.belief(row)))
                .collect(),
            menu_values: r.menu_values.iter().map(|l| labels.belief(l)).collect(),
        },
        Rationalizer::Mean(r) => RationalizerReport::Mean {
            sender_utility: r
                .sender_utility
                .iter()
                .enumerate()
                .map(|(a, f)| (labels.action(a), affine_report(f)))
                .collect(),
            prices: r
                .prices
                .iter()
                .map(|p| PriceReport {
                    breakpoints: p.breakpoints.iter().map(render).collect(),
                    pieces: p.pieces.iter().map(affine_report).collect(),
                })
                .collect(),
        },
    });
    VerdictReport {
        axiom: verdict.axiom.name().into(),
        outcome: outcome_name(verdict.outcome).into(),
        witness,
        rationalizer,
    }
}

pub fn from_report(report: &VerdictReport, labels: &Labels) -> Result<Verdict> {
    let axiom = Axiom::from_name(&report.axiom)
        .ok_or_else(|| Error::input(format!("unknown axiom `{}`", report.axiom)))?;
    let outcome = match report.outcome.as_str() {
        "consistent" => Outcome::Consistent,
        "violated" => Outcome::Violated,
        other => return Err(Error::input(format!("unknown outcome `{other}`"))),
    };
    let atoms = |list: &[AtomReport]| -> Result<Vec<WitnessAtom>> {
        list.iter()
            .map(|a| {
                Ok(WitnessAtom {
                    action: labels.action_index(&a.action)?,
                    posterior: labels.parse_belief(&a.posterior)?,
                    weight: parse(&a.weight)?,
                })
            })
            .collect()
    };
    let mean_weights = |list: &[MeanWeightReport]| -> Result<Vec<MeanWeight>> {
        list.iter()
            .map(|w| {
                Ok(MeanWeight { action: labels.action_index(&w.action)?, mean: parse(&w.mean)?, weight: parse(&w.weight)? })
            })
            .collect()
    };
    let witness = match &report.witness {
        None => None,
        Some(WitnessReport::Obedience { violations }) => Some(Witness::Nias(
            violations
                .iter()
                .map(|v| {
                    Ok(NiasViolation {
                        observation: v.observation,
                        chosen: labels.action_index(&v.chosen)?,
                        better: labels.action_index(&v.better)?,
                        posterior: labels.parse_belief(&v.posterior)?,
                    })
                })
                .collect::<Result<_>>()?,
        )),
        Some(WitnessReport::PriorRevealed { observation, action }) => {
            Some(Witness::PriorRevealed { observation: *observation, action: labels.action_index(action)? })
        }
        Some(WitnessReport::Reallocation { step, menus }) => Some(Witness::Reallocation(BalancedSignal {
            step: parse(step)?,
            menus: menus
                .iter()
                .map(|m| {
                    Ok(MenuReallocation {
                        observation: m.observation,
                        weight: parse(&m.weight)?,
                        removed: atoms(&m.removed)?,
                        added: atoms(&m.added)?,
                        perturbed: atoms(&m.perturbed)?,
                    })
                })
                .collect::<Result<_>>()?,
        })),
        Some(WitnessReport::RaySplit { observation, action, posterior, extended, epsilon }) => Some(Witness::RaySplit {
            observation: *observation,
            action: labels.action_index(action)?,
            posterior: labels.parse_belief(posterior)?,
            extended: labels.parse_belief(extended)?,
            epsilon: parse(epsilon)?,
        }),
        Some(WitnessReport::Mean { strict_observation, menus }) => Some(Witness::Mean(MeanWitness {
            strict_observation: *strict_observation,
            menus: menus
                .iter()
                .map(|m| {
                    Ok(MeanReallocation {
                        observation: m.observation,
                        weight: parse(&m.weight)?,
                        removed: mean_weights(&m.removed)?,
                        added: mean_weights(&m.added)?,
                        prior: m
                            .prior
                            .iter()
                            .map(|p| Ok(PointMass { point: parse(&p.point)?, mass: parse(&p.mass)? }))
                            .collect::<Result<_>>()?,
                    })
                })
                .collect::<Result<_>>()?,
        })),
    };
    let per_action = |n: usize| -> Result<()> {
        if n == labels.actions.len() {
            Ok(())
        } else {
            Err(Error::input("sender utility must list every action"))
        }
    };
    let rationalizer = match &report.rationalizer {
        None => None,
        Some(RationalizerReport::State { sender_utility, menu_values }) => {
            per_action(sender_utility.len())?;
            let sender_utility = labels
                .actions
                .iter()
                .map(|a| {
                    let row = sender_utility.get(a).ok_or_else(|| Error::input(format!("no utility for `{a}`")))?;
                    labels.parse_belief(row)
                })
                .collect::<Result<_>>()?;
            let menu_values = menu_values.iter().map(|l| labels.parse_belief(l)).collect::<Result<_>>()?;
            Some(Rationalizer::State(SenderRationalization { sender_utility, menu_values }))
        }
        Some(RationalizerReport::Mean { sender_utility, prices }) => {
            per_action(sender_utility.len())?;
            let sender_utility = labels
                .actions
                .iter()
                .map(|a| {
                    let f = sender_utility.get(a).ok_or_else(|| Error::input(format!("no utility for `{a}`")))?;
                    parse_affine(f)
                })
                .collect::<Result<_>>()?;
            let prices = prices
                .iter()
                .map(|p| {
                    let breakpoints: Vec<Rational> = p.breakpoints.iter().map(|b| parse(b)).collect::<Result<_>>()?;
                    let pieces: Vec<Affine> = p.pieces.iter().map(parse_affine).collect::<Result<_>>()?;
                    if pieces.len() != breakpoints.len() + 1 {
                        return Err(Error::input("a price function needs one more piece than breakpoints"));
                    }
                    Ok(PriceFunction { breakpoints, pieces })
                })
                .collect::<Result<_>>()?;
            Some(Rationalizer::Mean(MeanRationalizer { sender_utility, prices }))
        }
    };
    Ok(Verdict { axiom, outcome, witness, rationalizer })
}

pub fn to_json(verdict: &Verdict, labels: &Labels) -> String {
    serde_json::to_string_pretty(&to_report(verdict, labels)).expect("report serializes")
}

pub fn from_json(text: &str, labels: &Labels) -> Result<Verdict> {
    let report: VerdictReport = serde_json::from_str(text)?;
    from_report(&report, labels)
}

/// Exact value followed by a decimal approximation, e.g. `1/3 (~0.3333)`.
fn show(value: &Rational) -> String {
    if value.is_integer() {
        render(value)
    } else {
        format!("{} (~{:.4})", render(value), approx(value))
    }
}

fn show_belief(labels: &Labels, p: &[Rational]) -> String {
    let parts: Vec<String> = labels.states.iter().zip(p).map(|(s, v)| format!("{s}={}", show(v))).collect();
    format!("[{}]", parts.join(", "))
}

/// Multi-line plain-text summary. Decimals in parentheses are approximations for reading only.
pub fn human(verdict: &Verdict, labels: &Labels) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}: {}", verdict.axiom.name(), outcome_name(verdict.outcome));
    match &verdict.witness {
        Some(Witness::Nias(list)) => {
            for v in list {
                let _ = writeln!(
                    out,
                    "  observation {}: at posterior {} the receiver prefers {} to the chosen {}",
                    v.observation,
                    show_belief(labels, &v.posterior),
                    labels.actions[v.better],
                    labels.actions[v.chosen],
                );
            }
        }
        Some(Witness::PriorRevealed { observation, action }) => {
            let _ = writeln!(
                out,
                "  observation {observation}: informative signal also reveals the prior with {}",
                labels.actions[*action]
            );
        }
        Some(Witness::Reallocation(signal)) => {
            let _ = writeln!(out, "  balanced reallocation, step {}", show(&signal.step));
            for m in &signal.menus {
                let _ = writeln!(out, "  observation {} weight {}", m.observation, show(&m.weight));
                for a in m.removed_distribution() {
                    let _ = writeln!(
                        out,
                        "    take {} from {} at {}",
                        show(&a.weight),
                        labels.actions[a.action],
                        show_belief(labels, &a.posterior)
                    );
                }
                for a in m.added_distribution() {
                    let _ = writeln!(
                        out,
                        "    move {} to {} at {}",
                        show(&a.weight),
                        labels.actions[a.action],
                        show_belief(labels, &a.posterior)
                    );
                }
            }
        }
        Some(Witness::RaySplit { observation, action, posterior, extended, epsilon }) => {
            let _ = writeln!(
                out,
                "  observation {observation}: {} at {} extends to {} (epsilon {})",
                labels.actions[*action],
                show_belief(labels, posterior),
                show_belief(labels, extended),
                show(epsilon)
            );
        }
        Some(Witness::Mean(w)) => {
            let _ = writeln!(out, "  balanced reallocation of means, strict at observation {}", w.strict_observation);
            for m in &w.menus {
                let _ = writeln!(out, "  observation {} weight {}", m.observation, show(&m.weight));
                for x in &m.removed {
                    let share = &x.weight / &m.weight;
                    let _ = writeln!(out, "    take {} from {} at mean {}", show(&share), labels.actions[x.action], show(&x.mean));
                }
                for x in &m.added {
                    let share = &x.weight / &m.weight;
                    let _ = writeln!(out, "    move {} to {} at mean {}", show(&share), labels.actions[x.action], show(&x.mean));
                }
            }
        }
        None => {}
    }
    match &verdict.rationalizer {
        Some(Rationalizer::State(r)) => {
            let _ = writeln!(out, "  sender utility:");
            for (a, row) in r.sender_utility.iter().enumerate() {
                let _ = writeln!(out, "    {} {}", labels.actions[a], show_belief(labels, row));
            }
            for (i, l) in r.menu_values.iter().enumerate() {
                let _ = writeln!(out, "  observation {i} value hyperplane {}", show_belief(labels, l));
            }
        }
        Some(Rationalizer::Mean(r)) => {
            let _ = writeln!(out, "  sender utility:");
            for (a, f) in r.sender_utility.iter().enumerate() {
                let _ = writeln!(out, "    {} {f}", labels.actions[a]);
            }
            for (i, p) in r.prices.iter().enumerate() {
                let kinks: Vec<String> = p.kinks().iter().map(show).collect();
                let _ = writeln!(out, "  observation {i} price kinks [{}]", kinks.join(", "));
            }
        }
        None => {}
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;
    use crate::mean::{check_mean, replay_mean_verdict};
    use crate::persuasion::{check, replay_verdict, NbpsMode};

    #[test]
    fn state_reports_round_trip_and_replay() {
        for data in [examples::example1(), examples::example1_consistent(), examples::example3(), examples::example4()] {
            for mode in [NbpsMode::StateDependent, NbpsMode::Transparent] {
                let verdict = check(&data, &mode).unwrap().decisive().clone();
                let labels = Labels::of_world(&data.world);
                let back = from_json(&to_json(&verdict, &labels), &labels).unwrap();
                assert_eq!(back, verdict);
                assert_eq!(replay_verdict(&data, &back, &mode), Ok(()));
            }
        }
    }

    #[test]
    fn mean_reports_round_trip() {
        let data = examples::mean_interior_split();
        let verdict = check_mean(&data).unwrap().decisive().clone();
        let labels = Labels::of_mean(&data.world);
        let back = from_json(&to_json(&verdict, &labels), &labels).unwrap();
        assert_eq!(back, verdict);
        assert_eq!(replay_mean_verdict(&data, &back), Ok(()));
    }

    #[test]
    fn unknown_labels_are_input_errors() {
        let data = examples::example1();
        let labels = Labels::of_world(&data.world);
        let verdict = check(&data, &NbpsMode::StateDependent).unwrap().decisive().clone();
        let text = to_json(&verdict, &labels).replace("\"b\"", "\"zz\"");
        assert!(matches!(from_json(&text, &labels), Err(Error::Input(_))));
    }

    #[test]
    fn human_output_marks_approximations() {
        let data = examples::example1();
        let verdict = check(&data, &NbpsMode::StateDependent).unwrap().decisive().clone();
        let text = human(&verdict, &Labels::of_world(&data.world));
        assert!(text.starts_with("NBPS: violated"));
        assert!(text.contains("1/3 (~0.3333)"));
    }
}
