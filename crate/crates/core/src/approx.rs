//! Closed-form approximations to the predictive distribution and their
//! certified error bounds.
//!
//! The HT (add-one) approximation `(h_j + 1) / (n + k)` is within `β/2` in
//! total variation of the exact predictive distribution, where `1 + β` is the
//! max/min ratio of `f_H^{n+1}` over the k histograms adjacent to the sample.
//! The modified ML approximation `(h_j ∨ 1) / (n + v)` is within `γ/2`, with
//! γ the same spread after reweighting by `(h_j + 1) / (h_j ∨ 1)`. Both β
//! and γ are reported as excess ratios (ratio minus one).

use std::fmt;

use serde::Serialize;

use crate::combinat::Histogram;
use crate::error::{Error, Result};
use crate::model::{predictive_from_adjacent, HistogramMarginals, LabelDistribution};
use crate::prob::Prob;

/// A nonnegative quantity that may be infinite.
#[derive(Debug, Clone, PartialEq)]
pub enum Extended<P> {
    Finite(P),
    Infinite,
}

impl<P: Prob> Extended<P> {
    pub fn finite(&self) -> Option<&P> {
        match self {
            Extended::Finite(p) => Some(p),
            Extended::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Extended::Infinite)
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Extended::Finite(p) => p.to_f64(),
            Extended::Infinite => f64::INFINITY,
        }
    }
}

impl<P: fmt::Display> fmt::Display for Extended<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(p) => p.fmt(f),
            Extended::Infinite => f.write_str("inf"),
        }
    }
}

/// Outcome of checking one certified inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundCheck {
    Holds,
    Violated,
    /// The bound is infinite, so it holds because TV ≤ 1.
    Trivial,
}

impl BoundCheck {
    pub fn passed(self) -> bool {
        !matches!(self, BoundCheck::Violated)
    }

    fn from_bool(ok: bool) -> Self {
        if ok {
            BoundCheck::Holds
        } else {
            BoundCheck::Violated
        }
    }
}

/// Add-one smoothing `(h_j + 1) / (n + k)`.
pub fn ht_approx<P: Prob>(h: &Histogram) -> LabelDistribution<P> {
    let denom = h.total() + h.k() as u64;
    let probs = h.counts().iter().map(|&c| P::from_ratio(c + 1, denom)).collect();
    LabelDistribution::new(probs).expect("add-one smoothing is a distribution")
}

/// Empirical frequencies `h_j / n`.
pub fn ml_approx<P: Prob>(h: &Histogram) -> Result<LabelDistribution<P>> {
    if h.total() == 0 {
        return Err(Error::EmptySample("the ML approximation needs n >= 1"));
    }
    let probs = h.counts().iter().map(|&c| P::from_ratio(c, h.total())).collect();
    LabelDistribution::new(probs)
}

/// `(h_j ∨ 1) / (n + v)` with v the number of empty labels.
pub fn ml_modified<P: Prob>(h: &Histogram) -> LabelDistribution<P> {
    let empty = h.counts().iter().filter(|&&c| c == 0).count() as u64;
    let denom = h.total() + empty;
    let probs = h.counts().iter().map(|&c| P::from_ratio(c.max(1), denom)).collect();
    LabelDistribution::new(probs).expect("modified ML is a distribution")
}

/// Half the L1 distance.
pub fn tv_distance<P: Prob>(f: &LabelDistribution<P>, g: &LabelDistribution<P>) -> Result<P> {
    if f.k() != g.k() {
        return Err(Error::DimensionMismatch {
            expected: f.k(),
            found: g.k(),
        });
    }
    let l1 = f
        .probs()
        .iter()
        .zip(g.probs())
        .fold(P::zero(), |acc, (a, b)| acc + (a.clone() - b.clone()).abs());
    Ok(l1 / P::from_ratio(2, 1))
}

/// `max / min - 1`, infinite when the minimum is zero.
fn excess_spread<P: Prob>(values: &[P]) -> Extended<P> {
    let mut lo = &values[0];
    let mut hi = &values[0];
    for v in values {
        if v < lo {
            lo = v;
        }
        if v > hi {
            hi = v;
        }
    }
    if lo.is_zero() {
        Extended::Infinite
    } else {
        Extended::Finite(hi.clone() / lo.clone() - P::one())
    }
}

fn gamma_terms<P: Prob>(adjacent: &[P], h: &Histogram) -> Vec<P> {
    adjacent
        .iter()
        .zip(h.counts())
        .map(|(a, &c)| a.clone() * P::from_ratio(c + 1, c.max(1)))
        .collect()
}

fn checked_adjacent<P: Prob, M: HistogramMarginals<P> + ?Sized>(model: &M, h: &Histogram) -> Result<Vec<P>> {
    let adjacent = model.add_one_marginals(h)?;
    // f_H^n(h) = sum_j a_j (h_j + 1) / (n + 1)
    if adjacent.iter().all(|a| a.is_zero()) {
        return Err(Error::ZeroProbabilitySample);
    }
    Ok(adjacent)
}

/// β: spread of `f_H^{n+1}` over the add-one histograms `h + e_j`.
pub fn beta<P: Prob, M: HistogramMarginals<P> + ?Sized>(model: &M, h: &Histogram) -> Result<Extended<P>> {
    Ok(excess_spread(&checked_adjacent(model, h)?))
}

/// γ: spread of `f_H^{n+1}(h + e_j) (h_j + 1) / (h_j ∨ 1)`.
pub fn gamma<P: Prob, M: HistogramMarginals<P> + ?Sized>(model: &M, h: &Histogram) -> Result<Extended<P>> {
    let adjacent = checked_adjacent(model, h)?;
    Ok(excess_spread(&gamma_terms(&adjacent, h)))
}

/// `β (h_min + 1)/(h_min ∨ 1) / ((h_max + 1)/h_max)`, the crude γ bound in
/// terms of the extreme counts. Informational: it does not bound γ in
/// general (uniform weights give 0 against γ > 0).
pub fn gamma_crude_bound<P: Prob>(beta: &Extended<P>, h: &Histogram) -> Result<Extended<P>> {
    let hi = h.max_count();
    if hi == 0 {
        return Err(Error::EmptySample("the crude gamma bound needs n >= 1"));
    }
    let lo = h.min_count();
    Ok(match beta {
        Extended::Infinite => Extended::Infinite,
        Extended::Finite(b) => {
            let low_factor = P::from_ratio(lo + 1, lo.max(1));
            let high_factor = P::from_ratio(hi + 1, hi);
            Extended::Finite(b.clone() * low_factor / high_factor)
        }
    })
}

/// Everything known about the approximations for one model and sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproxReport<P> {
    pub histogram: Histogram,
    pub fstar: LabelDistribution<P>,
    pub ftilde: LabelDistribution<P>,
    /// Undefined for an empty sample.
    pub fhat: Option<LabelDistribution<P>>,
    pub fhatprime: LabelDistribution<P>,
    /// `f_H^{n+1}(h + e_j)` per label.
    pub adjacent: Vec<P>,
    /// `u_j = a_j / a_1` (or `/ max a` when `a_1 = 0`).
    pub u: Vec<P>,
    /// `v_j = (h_j + 1) / (h_1 + 1)`.
    pub v: Vec<P>,
    pub beta: Extended<P>,
    pub gamma: Extended<P>,
    pub gamma_crude: Option<Extended<P>>,
    pub tv_star_tilde: P,
    pub tv_star_hatprime: P,
    pub tv_tilde_hat: Option<P>,
    /// `TV(f*, f~) <= β/2`.
    pub beta_bound: BoundCheck,
    /// `1/(1+β) <= f*_j / f~_j <= 1+β` for each label.
    pub ratio_bounds: Vec<BoundCheck>,
    /// `TV(f*, f^') <= γ/2`.
    pub gamma_bound: BoundCheck,
    /// Whether `γ <= crude bound` happened to hold; never asserted.
    pub gamma_crude_held: Option<bool>,
    /// `TV(f~, f^) = k/(n+k) TV(f^, uniform)`.
    pub shrinkage_identity: Option<BoundCheck>,
}

impl<P: Prob> ApproxReport<P> {
    /// True when every asserted certificate holds.
    pub fn certified(&self) -> bool {
        self.beta_bound.passed()
            && self.gamma_bound.passed()
            && self.ratio_bounds.iter().all(|c| c.passed())
            && self.shrinkage_identity.is_none_or(|c| c.passed())
    }
}

fn half<P: Prob>(x: &P) -> P {
    x.clone() / P::from_ratio(2, 1)
}

fn tv_check<P: Prob>(tv: &P, bound: &Extended<P>) -> BoundCheck {
    match bound {
        Extended::Infinite => BoundCheck::Trivial,
        Extended::Finite(b) => BoundCheck::from_bool(P::le_tol(tv, &half(b))),
    }
}

/// Shrinkage identity `TV(f~, f^) = k/(n+k) TV(f^, 1/k)`, returning both sides.
pub fn shrinkage_sides<P: Prob>(h: &Histogram) -> Result<(P, P)> {
    let fhat = ml_approx::<P>(h)?;
    let ftilde = ht_approx::<P>(h);
    let lhs = tv_distance(&ftilde, &fhat)?;
    let k = h.k() as u64;
    let rhs = P::from_ratio(k, h.total() + k) * tv_distance(&fhat, &LabelDistribution::uniform(h.k()))?;
    Ok((lhs, rhs))
}

/// Computes the exact predictive distribution, all approximations, β, γ
/// and every certificate for one sample.
pub fn ht_report<P: Prob, M: HistogramMarginals<P> + ?Sized>(model: &M, h: &Histogram) -> Result<ApproxReport<P>> {
    let adjacent = checked_adjacent(model, h)?;
    let fstar = predictive_from_adjacent(&adjacent, h)?;
    let ftilde = ht_approx::<P>(h);
    let fhat = if h.total() > 0 { Some(ml_approx::<P>(h)?) } else { None };
    let fhatprime = ml_modified::<P>(h);

    let beta = excess_spread(&adjacent);
    let gamma = excess_spread(&gamma_terms(&adjacent, h));
    let gamma_crude = if h.total() > 0 {
        Some(gamma_crude_bound(&beta, h)?)
    } else {
        None
    };

    let norm = if adjacent[0].is_zero() {
        adjacent
            .iter()
            .fold(P::zero(), |a, b| if *b > a { b.clone() } else { a })
    } else {
        adjacent[0].clone()
    };
    let u = adjacent.iter().map(|a| a.clone() / norm.clone()).collect();
    let first = h.counts()[0] + 1;
    let v = h.counts().iter().map(|&c| P::from_ratio(c + 1, first)).collect();

    let tv_star_tilde = tv_distance(&fstar, &ftilde)?;
    let tv_star_hatprime = tv_distance(&fstar, &fhatprime)?;
    let tv_tilde_hat = fhat.as_ref().map(|f| tv_distance(&ftilde, f)).transpose()?;

    let beta_bound = tv_check(&tv_star_tilde, &beta);
    let gamma_bound = tv_check(&tv_star_hatprime, &gamma);
    let ratio_bounds = fstar
        .probs()
        .iter()
        .zip(ftilde.probs())
        .map(|(s, t)| match &beta {
            Extended::Infinite => BoundCheck::Trivial,
            Extended::Finite(b) => {
                let ratio = s.clone() / t.clone();
                let upper = P::one() + b.clone();
                let lower = P::one() / upper.clone();
                BoundCheck::from_bool(P::le_tol(&lower, &ratio) && P::le_tol(&ratio, &upper))
            }
        })
        .collect();
    let gamma_crude_held = match (&gamma, &gamma_crude) {
        (_, None) => None,
        (_, Some(Extended::Infinite)) => Some(true),
        (Extended::Infinite, Some(Extended::Finite(_))) => Some(false),
        (Extended::Finite(g), Some(Extended::Finite(c))) => Some(P::le_tol(g, c)),
    };
    let shrinkage_identity = if h.total() > 0 {
        let (lhs, rhs) = shrinkage_sides::<P>(h)?;
        Some(BoundCheck::from_bool(P::eq_tol(&lhs, &rhs)))
    } else {
        None
    };

    Ok(ApproxReport {
        histogram: h.clone(),
        fstar,
        ftilde,
        fhat,
        fhatprime,
        adjacent,
        u,
        v,
        beta,
        gamma,
        gamma_crude,
        tv_star_tilde,
        tv_star_hatprime,
        tv_tilde_hat,
        beta_bound,
        ratio_bounds,
        gamma_bound,
        gamma_crude_held,
        shrinkage_identity,
    })
}
