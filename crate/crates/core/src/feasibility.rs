//! Homogeneous feasibility systems and their Farkas certificates.
//!
//! A system asks for `x >= 0` with `M x = 0` on equality rows, `M x <= 0` on inequality
//! rows and `c . x < 0`. Exactly one of two things exists: such an `x`, or a `y` with
//! `M^T y <= c` and `y <= 0` on the inequality rows. [`decide`] returns whichever holds and
//! [`replay`] re-checks either one without trusting how it was produced.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpOutcome};
use crate::numeric::{dot, render, serde_q, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowKind {
    /// `row . x = 0`
    Eq,
    /// `row . x <= 0`
    Le,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeasibilitySystem {
    #[serde(with = "serde_q::matrix")]
    pub matrix: Vec<Vec<Rational>>,
    pub row_kinds: Vec<RowKind>,
    #[serde(with = "serde_q::vec")]
    pub objective: Vec<Rational>,
    pub row_labels: Vec<String>,
    pub column_labels: Vec<String>,
}

impl FeasibilitySystem {
    pub fn n_rows(&self) -> usize {
        self.matrix.len()
    }

    pub fn n_cols(&self) -> usize {
        self.objective.len()
    }

    pub fn check_shape(&self) -> Result<()> {
        let n = self.n_cols();
        if self.matrix.iter().any(|r| r.len() != n)
            || self.row_kinds.len() != self.n_rows()
            || self.row_labels.len() != self.n_rows()
            || self.column_labels.len() != n
        {
            return Err(Error::input("feasibility system has inconsistent dimensions"));
        }
        Ok(())
    }

    /// `M^T y` as a column vector.
    pub fn transpose_times(&self, y: &[Rational]) -> Vec<Rational> {
        (0..self.n_cols())
            .map(|j| self.matrix.iter().zip(y).map(|(row, yi)| &row[j] * yi).sum())
            .collect()
    }

    pub fn times(&self, x: &[Rational]) -> Vec<Rational> {
        self.matrix.iter().map(|row| dot(row, x)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// `x >= 0`, rows respected, `c . x < 0`; normalised to `sum x = 1`.
    PrimalWitness {
        #[serde(with = "serde_q::vec")]
        x: Vec<Rational>,
    },
    /// `M^T y <= c`, nonpositive on inequality rows. `shift` is the slack the normalised
    /// problem needed and is zero whenever no witness exists.
    DualRationalizer {
        #[serde(with = "serde_q::vec")]
        y: Vec<Rational>,
        #[serde(with = "serde_q")]
        shift: Rational,
    },
}

impl Certificate {
    pub fn is_witness(&self) -> bool {
        matches!(self, Certificate::PrimalWitness { .. })
    }
}

/// Optimum of `max -c . x` over the cone cut by `sum x <= 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Maximum {
    pub value: Rational,
    pub argmax: Vec<Rational>,
    /// Row multipliers in certificate sign convention.
    pub y: Vec<Rational>,
    pub pivots: usize,
}

/// Maximises `-c . x` over the cone intersected with `sum x <= 1`.
///
/// The value is zero exactly when no witness exists; a trivial cone also gives zero.
pub fn maximize(system: &FeasibilitySystem) -> Result<Maximum> {
    system.check_shape()?;
    let m = system.n_rows();
    let n = system.n_cols();
    let slacks: Vec<usize> = (0..m).filter(|&r| system.row_kinds[r] == RowKind::Le).collect();
    let width = n + slacks.len() + 1;
    let mut a = Vec::with_capacity(m + 1);
    for (r, row) in system.matrix.iter().enumerate() {
        let mut full = row.clone();
        full.extend(slacks.iter().map(|&s| if s == r { Rational::one() } else { Rational::zero() }));
        full.push(Rational::zero());
        a.push(full);
    }
    let mut norm = vec![Rational::one(); n];
    norm.extend((0..=slacks.len()).map(|_| Rational::zero()));
    norm[width - 1] = Rational::one();
    a.push(norm);
    let mut b = vec![Rational::zero(); m];
    b.push(Rational::one());
    let mut c: Vec<Rational> = system.objective.iter().map(|v| -v).collect();
    c.extend((0..=slacks.len()).map(|_| Rational::zero()));

    match LinearProgram::new(a, b, c).solve() {
        LpOutcome::Optimal(s) => Ok(Maximum {
            value: s.value,
            argmax: s.x[..n].to_vec(),
            y: s.duals[..m].iter().map(|v| -v).collect(),
            pivots: s.pivots,
        }),
        other => Err(Error::Internal(format!("normalised cone program ended as {other:?}"))),
    }
}

/// Returns a witness when one exists and a dual rationalizer otherwise.
pub fn decide(system: &FeasibilitySystem) -> Result<Certificate> {
    let best = maximize(system)?;
    let cert = if best.value.is_positive() {
        let total: Rational = best.argmax.iter().sum();
        let x = best.argmax.iter().map(|v| v / &total).collect();
        Certificate::PrimalWitness { x }
    } else {
        Certificate::DualRationalizer { y: best.y, shift: best.value }
    };
    if !replay(system, &cert)? {
        return Err(Error::Internal("certificate failed replay".into()));
    }
    Ok(cert)
}

/// A witness with the largest possible support among those attaining the optimum of
/// [`maximize`]. It is the average of one optimal vertex per reachable column, so the
/// result is deterministic and lies in the relative interior of the optimal face.
pub fn support_maximal_witness(system: &FeasibilitySystem) -> Result<Option<Vec<Rational>>> {
    let best = maximize(system)?;
    if !best.value.is_positive() {
        return Ok(None);
    }
    let m = system.n_rows();
    let n = system.n_cols();
    let slacks: Vec<usize> = (0..m).filter(|&r| system.row_kinds[r] == RowKind::Le).collect();
    let width = n + slacks.len();
    let mut a = Vec::with_capacity(m + 2);
    for (r, row) in system.matrix.iter().enumerate() {
        let mut full = row.clone();
        full.extend(slacks.iter().map(|&s| if s == r { Rational::one() } else { Rational::zero() }));
        a.push(full);
    }
    let mut norm = vec![Rational::one(); n];
    norm.resize(width, Rational::zero());
    a.push(norm);
    let mut level: Vec<Rational> = system.objective.iter().map(|v| -v).collect();
    level.resize(width, Rational::zero());
    a.push(level);
    let mut b = vec![Rational::zero(); m];
    b.push(Rational::one());
    b.push(best.value.clone());

    let total: Rational = best.argmax.iter().sum();
    let first: Vec<Rational> = best.argmax.iter().map(|v| v / &total).collect();
    let mut covered: Vec<bool> = first.iter().map(|v| v.is_positive()).collect();
    let mut vertices = vec![first];
    for j in 0..n {
        if covered[j] {
            continue;
        }
        let mut c = vec![Rational::zero(); width];
        c[j] = Rational::one();
        match LinearProgram::new(a.clone(), b.clone(), c).solve() {
            LpOutcome::Optimal(s) if s.value.is_positive() => {
                let x = s.x[..n].to_vec();
                for (flag, v) in covered.iter_mut().zip(&x) {
                    *flag |= v.is_positive();
                }
                vertices.push(x);
            }
            LpOutcome::Optimal(_) => {}
            other => return Err(Error::Internal(format!("optimal face program ended as {other:?}"))),
        }
    }
    let count = Rational::from_integer(vertices.len().into());
    let mut avg = vec![Rational::zero(); n];
    for x in &vertices {
        for (acc, v) in avg.iter_mut().zip(x) {
            *acc += v;
        }
    }
    Ok(Some(avg.into_iter().map(|v| v / &count).collect()))
}

/// Exact re-check of a certificate against a system.
pub fn replay(system: &FeasibilitySystem, cert: &Certificate) -> Result<bool> {
    system.check_shape()?;
    match cert {
        Certificate::PrimalWitness { x } => {
            if x.len() != system.n_cols() {
                return Err(Error::input("witness length does not match the system"));
            }
            if x.iter().any(|v| v.is_negative()) {
                return Ok(false);
            }
            let rows_ok = system.times(x).iter().zip(&system.row_kinds).all(|(v, k)| match k {
                RowKind::Eq => v.is_zero(),
                RowKind::Le => !v.is_positive(),
            });
            Ok(rows_ok && dot(&system.objective, x).is_negative())
        }
        Certificate::DualRationalizer { y, .. } => {
            if y.len() != system.n_rows() {
                return Err(Error::input("rationalizer length does not match the system"));
            }
            let signs_ok = y
                .iter()
                .zip(&system.row_kinds)
                .all(|(v, k)| *k == RowKind::Eq || !v.is_positive());
            let mty = system.transpose_times(y);
            Ok(signs_ok && mty.iter().zip(&system.objective).all(|(l, r)| l <= r))
        }
    }
}

/// One line per row describing how far a certificate is from failing; used by the CLI.
pub fn describe(system: &FeasibilitySystem, cert: &Certificate) -> Vec<String> {
    match cert {
        Certificate::PrimalWitness { x } => system
            .column_labels
            .iter()
            .zip(x)
            .filter(|(_, v)| !v.is_zero())
            .map(|(l, v)| format!("{l} = {}", render(v)))
            .collect(),
        Certificate::DualRationalizer { y, .. } => system
            .row_labels
            .iter()
            .zip(y)
            .filter(|(_, v)| !v.is_zero())
            .map(|(l, v)| format!("{l} = {}", render(v)))
            .collect(),
    }
}
