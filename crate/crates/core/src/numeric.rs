//! Exact rational scalars, dense vectors over them and 1-D affine maps.
//!
//! Every probability, utility and multiplier in the crate is a [`Rational`].
//! Floating point only appears when a value is formatted for humans.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Arbitrary precision rational, always kept in lowest terms with a positive denominator.
pub type Rational = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseRationalError {
    #[error("empty rational literal")]
    Empty,
    #[error("malformed rational literal `{0}`")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NumericError {
    #[error("weights sum to {0}, expected 1")]
    WeightsNotNormalized(String),
    #[error("negative weight {0}")]
    NegativeWeight(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{points} points but {weights} weights")]
    CountMismatch { points: usize, weights: usize },
    #[error("no points given")]
    Empty,
}

/// Shorthand for `numer/denom`. Panics on a zero denominator.
pub fn q(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `p/q`, `-p/q`, an integer, or a finite decimal such as `0.4` or `1.5e-2`.
pub fn rational_from_string(text: &str) -> Result<Rational, ParseRationalError> {
    let s = text.trim();
    if s.is_empty() {
        return Err(ParseRationalError::Empty);
    }
    let malformed = || ParseRationalError::Malformed(s.to_string());
    if let Some((n, d)) = s.split_once('/') {
        let numer = parse_integer(n.trim()).ok_or_else(malformed)?;
        let denom = parse_integer(d.trim()).ok_or_else(malformed)?;
        if denom.is_zero() {
            return Err(ParseRationalError::ZeroDenominator(s.to_string()));
        }
        return Ok(Rational::new(numer, denom));
    }
    parse_decimal(s).ok_or_else(malformed)
}

fn parse_integer(s: &str) -> Option<BigInt> {
    let digits = s.strip_prefix(['-', '+']).unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    BigInt::from_str(s.strip_prefix('+').unwrap_or(s)).ok()
}

fn parse_decimal(s: &str) -> Option<Rational> {
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, body) = match mantissa.as_bytes().first()? {
        b'-' => (true, &mantissa[1..]),
        b'+' => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
    if whole.is_empty() && frac.is_empty() {
        return None;
    }
    if !whole.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{whole}{frac}");
    let mut value = Rational::from_integer(BigInt::from_str(&digits).ok()?);
    let shift = exponent - frac.len() as i32;
    let ten = Rational::from_integer(BigInt::from(10));
    let scale = num_traits::pow(ten, shift.unsigned_abs() as usize);
    if shift >= 0 {
        value *= scale;
    } else {
        value /= scale;
    }
    Some(if negative { -value } else { value })
}

/// Canonical text form: `p` for integers, `p/q` otherwise.
pub fn render(value: &Rational) -> String {
    if value.is_integer() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// Approximate decimal for display only.
pub fn approx(value: &Rational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// Renders a vector as `(a, b, c)` with exact entries.
pub fn render_vec(values: &[Rational]) -> String {
    let parts: Vec<String> = values.iter().map(render).collect();
    format!("({})", parts.join(", "))
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn sum(values: &[Rational]) -> Rational {
    values.iter().sum()
}

pub fn scale(values: &[Rational], factor: &Rational) -> Vec<Rational> {
    values.iter().map(|v| v * factor).collect()
}

pub fn add_scaled(acc: &mut [Rational], values: &[Rational], factor: &Rational) {
    for (a, v) in acc.iter_mut().zip(values) {
        *a += v * factor;
    }
}

pub fn sub(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn zeros(n: usize) -> Vec<Rational> {
    vec![Rational::zero(); n]
}

/// `e_k` in dimension `n`.
pub fn unit(n: usize, k: usize) -> Vec<Rational> {
    let mut v = zeros(n);
    v[k] = Rational::one();
    v
}

/// True when every entry is non-negative and the entries sum to one.
pub fn is_distribution(values: &[Rational]) -> bool {
    values.iter().all(|v| !v.is_negative()) && sum(values).is_one()
}

/// `sum_i w_i x_i` for weights on the simplex.
pub fn convex_combination(
    points: &[Vec<Rational>],
    weights: &[Rational],
) -> Result<Vec<Rational>, NumericError> {
    if points.len() != weights.len() {
        return Err(NumericError::CountMismatch { points: points.len(), weights: weights.len() });
    }
    let dim = points.first().ok_or(NumericError::Empty)?.len();
    if let Some(bad) = points.iter().find(|p| p.len() != dim) {
        return Err(NumericError::DimensionMismatch { expected: dim, found: bad.len() });
    }
    if let Some(w) = weights.iter().find(|w| w.is_negative()) {
        return Err(NumericError::NegativeWeight(render(w)));
    }
    let total = sum(weights);
    if !total.is_one() {
        return Err(NumericError::WeightsNotNormalized(render(&total)));
    }
    let mut out = zeros(dim);
    for (p, w) in points.iter().zip(weights) {
        add_scaled(&mut out, p, w);
    }
    Ok(out)
}

/// Solves the square system `a x = b` by exact elimination. `None` when singular.
pub fn solve_square(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = a[col][col].recip();
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] * &inv;
            let pivot_row = a[col].clone();
            for (x, p) in a[r].iter_mut().zip(&pivot_row).skip(col) {
                *x -= &f * p;
            }
            let delta = &f * &b[col];
            b[r] -= delta;
        }
    }
    Some((0..n).map(|i| &b[i] / &a[i][i]).collect())
}

/// `z -> slope * z + intercept` on the real line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Affine {
    pub slope: Rational,
    pub intercept: Rational,
}

impl Affine {
    pub fn new(slope: Rational, intercept: Rational) -> Self {
        Affine { slope, intercept }
    }

    pub fn constant(value: Rational) -> Self {
        Affine { slope: Rational::zero(), intercept: value }
    }

    pub fn eval(&self, z: &Rational) -> Rational {
        &self.slope * z + &self.intercept
    }

    /// Values at 0 and 1, i.e. the state-utility pair of a binary-state payoff.
    pub fn endpoints(&self) -> (Rational, Rational) {
        (self.intercept.clone(), &self.intercept + &self.slope)
    }
}

impl fmt::Display for Affine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.intercept.is_negative() { '-' } else { '+' };
        write!(f, "{} z {sign} {}", render(&self.slope), render(&self.intercept.abs()))
    }
}

/// Serde adapters that write rationals as strings.
pub mod serde_q {
    use super::{rational_from_string, render, Rational};
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(value: &Rational, s: S) -> Result<S::Ok, S::Error> {
        render(value).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        rational_from_string(&text).map_err(D::Error::custom)
    }

    pub mod vec {
        use super::*;

        pub fn serialize<S: Serializer>(values: &[Rational], s: S) -> Result<S::Ok, S::Error> {
            values.iter().map(render).collect::<Vec<_>>().serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
            let texts = Vec::<String>::deserialize(d)?;
            texts
                .iter()
                .map(|t| rational_from_string(t).map_err(D::Error::custom))
                .collect()
        }
    }

    pub mod matrix {
        use super::*;

        pub fn serialize<S: Serializer>(rows: &[Vec<Rational>], s: S) -> Result<S::Ok, S::Error> {
            rows.iter()
                .map(|r| r.iter().map(render).collect::<Vec<_>>())
                .collect::<Vec<_>>()
                .serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> Result<Vec<Vec<Rational>>, D::Error> {
            let rows = Vec::<Vec<String>>::deserialize(d)?;
            rows.iter()
                .map(|r| {
                    r.iter()
                        .map(|t| rational_from_string(t).map_err(D::Error::custom))
                        .collect()
                })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(rational_from_string("1/3").unwrap(), q(1, 3));
        assert_eq!(rational_from_string("0.4").unwrap(), q(2, 5));
        assert_eq!(rational_from_string("6/10").unwrap(), q(3, 5));
        assert_eq!(rational_from_string("-2/4").unwrap(), q(-1, 2));
        assert_eq!(rational_from_string(" 7 ").unwrap(), int(7));
        assert_eq!(rational_from_string(".25").unwrap(), q(1, 4));
        assert_eq!(rational_from_string("-1.5e-1").unwrap(), q(-3, 20));
        assert_eq!(rational_from_string("2E2").unwrap(), int(200));
    }

    #[test]
    fn rejects_bad_literals() {
        assert_eq!(rational_from_string(""), Err(ParseRationalError::Empty));
        assert!(matches!(rational_from_string("1/0"), Err(ParseRationalError::ZeroDenominator(_))));
        for bad in ["abc", "1/", "/2", "1.2.3", "--1", "1/2/3", ".", "0x10", "1/-"] {
            assert!(rational_from_string(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn convex_combinations() {
        let pts = vec![vec![int(1), int(0)], vec![int(0), int(1)]];
        assert_eq!(convex_combination(&pts, &[q(1, 2), q(1, 2)]).unwrap(), vec![q(1, 2), q(1, 2)]);
        let pts = vec![vec![q(1, 5), q(4, 5)], vec![q(1, 2), q(1, 2)]];
        assert_eq!(convex_combination(&pts, &[q(1, 3), q(2, 3)]).unwrap(), vec![q(2, 5), q(3, 5)]);
        let single = vec![vec![q(1, 7), q(6, 7)]];
        assert_eq!(convex_combination(&single, &[int(1)]).unwrap(), single[0]);
    }

    #[test]
    fn convex_combination_errors() {
        let pts = vec![vec![int(1), int(0)], vec![int(0), int(1)]];
        assert!(matches!(
            convex_combination(&pts, &[q(1, 2), q(1, 3)]),
            Err(NumericError::WeightsNotNormalized(_))
        ));
        let ragged = vec![vec![int(1), int(0)], vec![int(1)]];
        assert!(matches!(
            convex_combination(&ragged, &[q(1, 2), q(1, 2)]),
            Err(NumericError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            convex_combination(&pts, &[int(2), int(-1)]),
            Err(NumericError::NegativeWeight(_))
        ));
    }

    #[test]
    fn square_solve() {
        let a = vec![vec![int(2), int(1)], vec![int(1), int(3)]];
        assert_eq!(solve_square(a, vec![int(3), int(5)]).unwrap(), vec![q(4, 5), q(7, 5)]);
        let singular = vec![vec![int(1), int(2)], vec![int(2), int(4)]];
        assert!(solve_square(singular, vec![int(1), int(2)]).is_none());
    }

    #[test]
    fn affine_eval() {
        let f = Affine::new(q(-1, 3), q(1, 10));
        assert_eq!(f.eval(&q(3, 10)), int(0));
        assert_eq!(f.endpoints(), (q(1, 10), q(-7, 30)));
    }

    fn small() -> impl Strategy<Value = Rational> {
        (-50i64..50, 1i64..30).prop_map(|(n, d)| q(n, d))
    }

    proptest! {
        #[test]
        fn render_parse_round_trip(x in small()) {
            prop_assert_eq!(rational_from_string(&render(&x)).unwrap(), x);
        }

        #[test]
        fn field_laws(a in small(), b in small(), c in small()) {
            prop_assert_eq!((&a + &b) + &c, &a + (&b + &c));
            prop_assert_eq!((&a * &b) * &c, &a * (&b * &c));
            prop_assert_eq!(&a * (&b + &c), &a * &b + &a * &c);
        }

        #[test]
        fn lowest_terms(n in -1000i64..1000, d in 1i64..1000) {
            let x = q(n, d);
            prop_assert!(x.denom() > &BigInt::from(0));
            prop_assert_eq!(num_integer_gcd(x.numer(), x.denom()), BigInt::from(1));
        }
    }

    fn num_integer_gcd(a: &BigInt, b: &BigInt) -> BigInt {
        use num_traits::Signed;
        let (mut x, mut y) = (a.abs(), b.abs());
        while !y.is_zero() {
            let r = &x % &y;
            x = y;
            y = r;
        }
        if x.is_zero() { BigInt::from(1) } else { x }
    }
}
