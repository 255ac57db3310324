//! Dense two-phase simplex over exact rationals with Bland's anti-cycling rule.
//!
//! Solves `max c.x  s.t.  A x = b, x >= 0` and returns dual prices alongside the primal
//! optimum, so callers can read supporting hyperplanes and Farkas multipliers directly.

use num_traits::{Signed, Zero};

use crate::numeric::{dot, Rational};

#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub a: Vec<Vec<Rational>>,
    pub b: Vec<Rational>,
    pub c: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpSolution {
    pub x: Vec<Rational>,
    pub value: Rational,
    /// Row prices `y` with `A^T y >= c` and `b . y = value`.
    pub duals: Vec<Rational>,
    pub pivots: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    pivots: usize,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let inv = self.rows[row][col].recip();
        for v in self.rows[row].iter_mut() {
            *v *= &inv;
        }
        self.rhs[row] *= &inv;
        let pivot_row = self.rows[row].clone();
        let pivot_rhs = self.rhs[row].clone();
        for r in 0..self.rows.len() {
            if r == row || self.rows[r][col].is_zero() {
                continue;
            }
            let f = self.rows[r][col].clone();
            for (v, p) in self.rows[r].iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &f * p;
                }
            }
            self.rhs[r] -= &f * &pivot_rhs;
        }
        self.basis[row] = col;
        self.pivots += 1;
    }

    /// `c_j - c_B B^{-1} A_j` for every column.
    fn reduced_costs(&self, cost: &[Rational]) -> Vec<Rational> {
        let mut d = cost.to_vec();
        for (r, &bcol) in self.basis.iter().enumerate() {
            let cb = &cost[bcol];
            if cb.is_zero() {
                continue;
            }
            for (dj, a) in d.iter_mut().zip(&self.rows[r]) {
                if !a.is_zero() {
                    *dj -= cb * a;
                }
            }
        }
        d
    }

    /// Runs Bland pivots on `cost` until optimal. Columns at or beyond `allowed` never enter.
    /// Returns `false` when the objective is unbounded.
    fn optimise(&mut self, cost: &[Rational], allowed: usize) -> bool {
        loop {
            let d = self.reduced_costs(cost);
            let Some(enter) = (0..allowed).find(|&j| d[j].is_positive()) else {
                return true;
            };
            let mut leave: Option<(usize, Rational)> = None;
            for r in 0..self.rows.len() {
                let a = &self.rows[r][enter];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[r] / a;
                let better = match &leave {
                    None => true,
                    Some((lr, best)) => {
                        ratio < *best || (ratio == *best && self.basis[r] < self.basis[*lr])
                    }
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, enter),
                None => return false,
            }
        }
    }
}

impl LinearProgram {
    pub fn new(a: Vec<Vec<Rational>>, b: Vec<Rational>, c: Vec<Rational>) -> Self {
        LinearProgram { a, b, c }
    }

    pub fn n_vars(&self) -> usize {
        self.c.len()
    }

    pub fn solve(&self) -> LpOutcome {
        let m = self.b.len();
        let n = self.n_vars();
        assert!(self.a.len() == m && self.a.iter().all(|r| r.len() == n), "ragged LP");
        // Flip rows so every right-hand side is nonnegative, then append one artificial per row.
        let flipped: Vec<bool> = self.b.iter().map(|v| v.is_negative()).collect();
        let mut rows = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        for (i, (a_row, b_i)) in self.a.iter().zip(&self.b).enumerate() {
            let neg = flipped[i];
            let mut row: Vec<Rational> = a_row.iter().map(|v| if neg { -v } else { v.clone() }).collect();
            row.extend((0..m).map(|k| if k == i { Rational::from_integer(1.into()) } else { Rational::zero() }));
            rows.push(row);
            rhs.push(if neg { -b_i } else { b_i.clone() });
        }
        let mut t = Tableau { rows, rhs, basis: (n..n + m).collect(), pivots: 0 };

        let mut phase1 = vec![Rational::zero(); n + m];
        for c in phase1.iter_mut().skip(n) {
            *c = Rational::from_integer((-1).into());
        }
        t.optimise(&phase1, n + m);
        if t.basis.iter().zip(&t.rhs).any(|(&bc, v)| bc >= n && v.is_positive()) {
            return LpOutcome::Infeasible;
        }
        // Drive zero-level artificials out where a structural column can replace them.
        for r in 0..m {
            if t.basis[r] >= n {
                if let Some(j) = (0..n).find(|&j| !t.rows[r][j].is_zero()) {
                    t.pivot(r, j);
                }
            }
        }

        let mut phase2 = self.c.clone();
        phase2.extend((0..m).map(|_| Rational::zero()));
        if !t.optimise(&phase2, n) {
            return LpOutcome::Unbounded;
        }

        let mut x = vec![Rational::zero(); n];
        for (r, &bc) in t.basis.iter().enumerate() {
            if bc < n {
                x[bc] = t.rhs[r].clone();
            }
        }
        // B^{-1} sits in the artificial columns; y = c_B B^{-1}.
        let mut duals = vec![Rational::zero(); m];
        for (r, &bc) in t.basis.iter().enumerate() {
            let cb = &phase2[bc];
            if cb.is_zero() {
                continue;
            }
            for (i, y) in duals.iter_mut().enumerate() {
                *y += cb * &t.rows[r][n + i];
            }
        }
        for (y, f) in duals.iter_mut().zip(&flipped) {
            if *f {
                *y = -&*y;
            }
        }
        let value = dot(&self.c, &x);
        LpOutcome::Optimal(LpSolution { x, value, duals, pivots: t.pivots })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{int, q};
    use proptest::prelude::*;

    fn check_duality(lp: &LinearProgram, s: &LpSolution) {
        for (j, cj) in lp.c.iter().enumerate() {
            let col: Rational = lp.a.iter().zip(&s.duals).map(|(row, y)| &row[j] * y).sum();
            assert!(col >= *cj, "dual infeasible at column {j}");
        }
        assert_eq!(dot(&lp.b, &s.duals), s.value);
        for (row, bi) in lp.a.iter().zip(&lp.b) {
            assert_eq!(dot(row, &s.x), *bi);
        }
    }

    #[test]
    fn small_optimum() {
        // max x + y, x + 2y + s = 4, 3x + y + t = 6
        let lp = LinearProgram::new(
            vec![vec![int(1), int(2), int(1), int(0)], vec![int(3), int(1), int(0), int(1)]],
            vec![int(4), int(6)],
            vec![int(1), int(1), int(0), int(0)],
        );
        let LpOutcome::Optimal(s) = lp.solve() else { panic!() };
        assert_eq!(s.value, q(14, 5));
        assert_eq!(&s.x[..2], &[q(8, 5), q(6, 5)]);
        check_duality(&lp, &s);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let lp = LinearProgram::new(vec![vec![int(1), int(1)]], vec![int(-1)], vec![int(0), int(0)]);
        assert_eq!(lp.solve(), LpOutcome::Infeasible);
        let lp = LinearProgram::new(vec![vec![int(1), int(-1)]], vec![int(0)], vec![int(1), int(0)]);
        assert_eq!(lp.solve(), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_rows() {
        let lp = LinearProgram::new(
            vec![vec![int(1), int(1)], vec![int(2), int(2)]],
            vec![int(1), int(2)],
            vec![int(3), int(1)],
        );
        let LpOutcome::Optimal(s) = lp.solve() else { panic!() };
        assert_eq!(s.value, int(3));
        check_duality(&lp, &s);
    }

    fn random_lp() -> impl Strategy<Value = LinearProgram> {
        (1usize..4, 2usize..6).prop_flat_map(|(m, n)| {
            (
                proptest::collection::vec(proptest::collection::vec(-4i64..5, n), m),
                proptest::collection::vec(0i64..5, m),
                proptest::collection::vec(-4i64..5, n),
            )
                .prop_map(|(a, b, c)| {
                    // add a box row so the problem stays bounded
                    let n = c.len();
                    let mut a: Vec<Vec<Rational>> =
                        a.into_iter().map(|r| r.into_iter().map(int).collect()).collect();
                    let mut b: Vec<Rational> = b.into_iter().map(int).collect();
                    for row in a.iter_mut() {
                        row.push(int(0));
                    }
                    let mut bound = vec![int(1); n];
                    bound.push(int(1));
                    a.push(bound);
                    b.push(int(10));
                    let mut c: Vec<Rational> = c.into_iter().map(int).collect();
                    c.push(int(0));
                    LinearProgram::new(a, b, c)
                })
        })
    }

    proptest! {
        #[test]
        fn strong_duality_and_termination(lp in random_lp()) {
            match lp.solve() {
                LpOutcome::Optimal(s) => {
                    check_duality(&lp, &s);
                    prop_assert!(s.x.iter().all(|v| !v.is_negative()));
                    prop_assert!(s.pivots < 500);
                }
                LpOutcome::Infeasible => {}
                LpOutcome::Unbounded => prop_assert!(false, "box constraint keeps it bounded"),
            }
        }
    }
}
