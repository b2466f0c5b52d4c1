//! Numeric back-ends for probabilities.
//!
//! Every computation in the crate is generic over [`Prob`]. Two
//! implementations are provided: [`Exact`] (arbitrary-precision rationals,
//! used by the oracle and the acceptance checks) and `f64`. The float path
//! evaluates hypergeometric terms and mixtures in log space so that tiny
//! terms neither underflow nor lose relative precision.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use statrs::function::factorial::ln_binomial;

use crate::combinat::Histogram;

/// Exact rational probability.
pub type Exact = BigRational;

/// Relative slack used when comparing float-mode quantities that are equal in
/// exact arithmetic.
pub const FLOAT_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NumericMode {
    Rational,
    Float,
}

impl fmt::Display for NumericMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NumericMode::Rational => f.write_str("rational"),
            NumericMode::Float => f.write_str("float"),
        }
    }
}

pub trait Prob:
    num_traits::Num + Signed + Clone + PartialOrd + fmt::Debug + fmt::Display + Send + Sync + 'static
{
    const MODE: NumericMode;

    fn from_rational(r: &BigRational) -> Self;

    fn from_ratio(num: u64, den: u64) -> Self {
        Self::from_rational(&BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    fn to_f64(&self) -> f64;

    /// `a <= b`, exact for rationals and within [`FLOAT_SLACK`] for floats.
    fn le_tol(a: &Self, b: &Self) -> bool;

    /// `a == b`, exact for rationals and within [`FLOAT_SLACK`] for floats.
    fn eq_tol(a: &Self, b: &Self) -> bool {
        Self::le_tol(a, b) && Self::le_tol(b, a)
    }

    /// `a == b`, exact for rationals and within absolute `tol` for floats.
    fn near(a: &Self, b: &Self, tol: f64) -> bool;

    /// Multivariate hypergeometric probability of drawing `h` from the urn
    /// `u`. Assumes matching dimensions and `h.total() <= u.total()`.
    fn hypergeometric(h: &Histogram, u: &Histogram) -> Self;

    /// `sum_r H(h; u_r) * w_r` over the given atoms.
    fn hypergeometric_mixture<'a, I>(h: &Histogram, atoms: I) -> Self
    where
        I: IntoIterator<Item = (&'a Histogram, &'a Self)>,
        Self: 'a;

    /// Multinomial PMF `M_h * prod_j p_j^{h_j}`.
    fn multinomial_pmf(h: &Histogram, p: &[Self]) -> Self;

    /// `1 / C(n+k-1, k-1)`, the probability of any single n-histogram under
    /// uniform simplex weights.
    fn uniform_histogram_prob(n: u64, k: usize) -> Self;
}

fn binom_u(n: u64, r: u64) -> BigUint {
    binomial(BigUint::from(n), BigUint::from(r))
}

fn dominated(h: &Histogram, u: &Histogram) -> bool {
    h.counts().iter().zip(u.counts()).all(|(a, b)| a <= b)
}

/// Integer numerator `prod_j C(u_j, h_j)`; the hypergeometric probability is
/// this over `C(m, n)`.
fn hypergeometric_numerator(h: &Histogram, u: &Histogram) -> BigUint {
    h.counts()
        .iter()
        .zip(u.counts())
        .filter(|(a, b)| **a > 0 && a != b)
        .map(|(a, b)| binom_u(*b, *a))
        .product()
}

fn ln_hypergeometric(h: &Histogram, u: &Histogram) -> f64 {
    let ln_num: f64 = h
        .counts()
        .iter()
        .zip(u.counts())
        .map(|(a, b)| ln_binomial(*b, *a))
        .sum();
    ln_num - ln_binomial(u.total(), h.total())
}

fn ln_multinomial(h: &Histogram) -> f64 {
    let mut remaining = h.total();
    let mut acc = 0.0;
    for &c in h.counts() {
        acc += ln_binomial(remaining, c);
        remaining -= c;
    }
    acc
}

fn biguint_to_int(v: BigUint) -> BigInt {
    BigInt::from(v)
}

impl Prob for BigRational {
    const MODE: NumericMode = NumericMode::Rational;

    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn le_tol(a: &Self, b: &Self) -> bool {
        a <= b
    }

    fn near(a: &Self, b: &Self, _tol: f64) -> bool {
        a == b
    }

    fn hypergeometric(h: &Histogram, u: &Histogram) -> Self {
        if !dominated(h, u) {
            return Self::zero();
        }
        BigRational::new(
            biguint_to_int(hypergeometric_numerator(h, u)),
            biguint_to_int(binom_u(u.total(), h.total())),
        )
    }

    fn hypergeometric_mixture<'a, I>(h: &Histogram, atoms: I) -> Self
    where
        I: IntoIterator<Item = (&'a Histogram, &'a Self)>,
    {
        // All atoms share the same m, so the common denominator C(m, n) is
        // applied once at the end.
        let mut acc = Self::zero();
        let mut m = None;
        for (u, w) in atoms {
            m.get_or_insert(u.total());
            if w.is_zero() || !dominated(h, u) {
                continue;
            }
            let num = BigInt::from(hypergeometric_numerator(h, u));
            acc += w * BigRational::from_integer(num);
        }
        match m {
            Some(m) => acc / BigRational::from_integer(biguint_to_int(binom_u(m, h.total()))),
            None => acc,
        }
    }

    fn multinomial_pmf(h: &Histogram, p: &[Self]) -> Self {
        let mut acc = BigRational::from_integer(biguint_to_int(crate::combinat::multinomial_coeff(h)));
        for (&c, pj) in h.counts().iter().zip(p) {
            if c > 0 {
                acc *= num_traits::pow(pj.clone(), c as usize);
            }
        }
        acc
    }

    fn uniform_histogram_prob(n: u64, k: usize) -> Self {
        let c = crate::combinat::histogram_space_size(n, k);
        BigRational::new(BigInt::one(), biguint_to_int(c))
    }
}

impl Prob for f64 {
    const MODE: NumericMode = NumericMode::Float;

    fn from_rational(r: &BigRational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn le_tol(a: &Self, b: &Self) -> bool {
        *a <= *b + FLOAT_SLACK * a.abs().max(b.abs()).max(1.0)
    }

    fn near(a: &Self, b: &Self, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn hypergeometric(h: &Histogram, u: &Histogram) -> Self {
        if !dominated(h, u) {
            return 0.0;
        }
        ln_hypergeometric(h, u).exp()
    }

    fn hypergeometric_mixture<'a, I>(h: &Histogram, atoms: I) -> Self
    where
        I: IntoIterator<Item = (&'a Histogram, &'a Self)>,
    {
        let logs: Vec<f64> = atoms
            .into_iter()
            .filter(|(u, w)| **w > 0.0 && dominated(h, u))
            .map(|(u, w)| ln_hypergeometric(h, u) + w.ln())
            .collect();
        log_sum_exp(&logs).exp()
    }

    fn multinomial_pmf(h: &Histogram, p: &[Self]) -> Self {
        let mut ln = ln_multinomial(h);
        for (&c, &pj) in h.counts().iter().zip(p) {
            if c > 0 {
                if pj <= 0.0 {
                    return 0.0;
                }
                ln += c as f64 * pj.ln();
            }
        }
        ln.exp()
    }

    fn uniform_histogram_prob(n: u64, k: usize) -> Self {
        (-ln_binomial(n + k as u64 - 1, k as u64 - 1)).exp()
    }
}

/// Numerically stable `ln(sum_i exp(x_i))`; `-inf` for an empty slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Parses `"p/q"`, an integer, or a plain decimal (optionally with an
/// exponent) into an exact rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int}{frac}").parse().ok()?;
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10u8);
    let mut r = if scale >= 0 {
        BigRational::from_integer(digits * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(digits, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        r = -r;
    }
    Some(r)
}

/// Formats an exact rational as `"p/q"` in lowest terms.
pub fn format_fraction(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}
