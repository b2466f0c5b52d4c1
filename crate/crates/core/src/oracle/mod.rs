//! Brute-force reference computations in exact rationals.
//!
//! Everything here works from the full table of `k^m` sequence
//! probabilities, so it is only usable on small instances. It shares
//! nothing with the production paths beyond the histogram helpers, which is
//! what makes it useful as a cross-check.

mod extend;
pub mod suite;

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::combinat::{self, histogram_of, multinomial_coeff, Histogram, LabelMerge};
use crate::error::{Error, Result};
use crate::model::{ExchangeableModel, LabelDistribution};
use crate::prob::Exact;

pub use extend::{is_extendable, Extendability, EXTENDABILITY_CAP};

/// Default bound on the number of table entries.
pub const TABLE_CAP: u64 = 10_000_000;

/// Pass/fail with the first counterexample found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub passed: bool,
    pub checks: usize,
    pub counterexample: Option<String>,
}

impl Verdict {
    fn pass(checks: usize) -> Self {
        Self {
            passed: true,
            checks,
            counterexample: None,
        }
    }

    fn fail(checks: usize, why: String) -> Self {
        Self {
            passed: false,
            checks,
            counterexample: Some(why),
        }
    }
}

fn q(n: u64, d: u64) -> Exact {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn int(v: num_bigint::BigUint) -> Exact {
    BigRational::from_integer(BigInt::from(v))
}

/// Probability of every full sequence of length m over k labels.
///
/// Sequences are indexed in base k with the first item most significant, so
/// all extensions of a prefix occupy one contiguous block.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceTable {
    m: u64,
    k: usize,
    probs: Vec<Exact>,
}

impl SequenceTable {
    fn size(m: u64, k: usize, cap: u64) -> Result<usize> {
        (k as u64)
            .checked_pow(m as u32)
            .filter(|&s| s <= cap)
            .map(|s| s as usize)
            .ok_or_else(|| Error::cap(format!("{k}^{m}"), cap))
    }

    pub fn new(m: u64, k: usize, probs: Vec<Exact>) -> Result<Self> {
        let size = Self::size(m, k, TABLE_CAP)?;
        if probs.len() != size {
            return Err(Error::InvalidArgument(format!(
                "table has {} entries, expected {k}^{m} = {size}",
                probs.len()
            )));
        }
        if probs.iter().any(|p| p.is_negative()) {
            return Err(Error::InvalidArgument("negative sequence probability".into()));
        }
        if probs.iter().sum::<Exact>() != Exact::one() {
            return Err(Error::InvalidArgument("sequence probabilities do not sum to 1".into()));
        }
        Ok(Self { m, k, probs })
    }

    /// Expands a model into sequence probabilities `w(h(x)) / M_h(x)`.
    pub fn from_model(model: &ExchangeableModel<Exact>) -> Result<Self> {
        let (m, k) = (model.m(), model.k());
        let size = Self::size(m, k, TABLE_CAP)?;
        let weights: HashMap<Histogram, Exact> = model.weights().atoms()?.into_iter().collect();
        let mut per_hist: HashMap<Histogram, Exact> = HashMap::new();
        let mut probs = Vec::with_capacity(size);
        for idx in 0..size {
            let x = Self::decode(idx, m as usize, k);
            let h = histogram_of(&x, k)?;
            let p = per_hist
                .entry(h.clone())
                .or_insert_with(|| match weights.get(&h) {
                    Some(w) => w / int(multinomial_coeff(&h)),
                    None => Exact::zero(),
                })
                .clone();
            probs.push(p);
        }
        Ok(Self { m, k, probs })
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn probs(&self) -> &[Exact] {
        &self.probs
    }

    fn decode(mut idx: usize, len: usize, k: usize) -> Vec<usize> {
        let mut x = vec![0; len];
        for slot in x.iter_mut().rev() {
            *slot = idx % k;
            idx /= k;
        }
        x
    }

    fn encode(x: &[usize], k: usize) -> usize {
        x.iter().fold(0, |acc, &j| acc * k + j)
    }

    /// Probability that the first `x.len()` items equal `x`.
    pub fn prefix_prob(&self, x: &[usize]) -> Result<Exact> {
        if x.len() as u64 > self.m {
            return Err(Error::SampleTooLarge {
                n: x.len() as u64,
                m: self.m,
            });
        }
        if let Some(&bad) = x.iter().find(|&&j| j >= self.k) {
            return Err(Error::LabelOutOfRange { index: bad, k: self.k });
        }
        let block = self.k.pow((self.m as usize - x.len()) as u32);
        let start = Self::encode(x, self.k) * block;
        Ok(self.probs[start..start + block].iter().sum())
    }

    /// Total probability of each m-histogram.
    pub fn histogram_weights(&self) -> Result<Vec<(Histogram, Exact)>> {
        let mut w: HashMap<Histogram, Exact> = HashMap::new();
        for (idx, p) in self.probs.iter().enumerate() {
            let h = histogram_of(&Self::decode(idx, self.m as usize, self.k), self.k)?;
            *w.entry(h).or_insert_with(Exact::zero) += p;
        }
        let mut out: Vec<_> = w.into_iter().collect();
        out.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(out)
    }

    /// Brute-force `f_H^n(h)`: summed prefix probability of every n-sequence
    /// with histogram `h`.
    pub fn histogram_marginal(&self, h: &Histogram) -> Result<Exact> {
        let n = h.total() as usize;
        let mut acc = Exact::zero();
        for idx in 0..self.k.pow(n as u32) {
            let x = Self::decode(idx, n, self.k);
            if histogram_of(&x, self.k)? == *h {
                acc += self.prefix_prob(&x)?;
            }
        }
        Ok(acc)
    }
}

/// Predictive distribution of the next item by summing table extensions.
pub fn brute_force_predictive(model: &ExchangeableModel<Exact>, x: &[usize]) -> Result<LabelDistribution<Exact>> {
    let table = SequenceTable::from_model(model)?;
    brute_force_predictive_table(&table, x)
}

pub fn brute_force_predictive_table(table: &SequenceTable, x: &[usize]) -> Result<LabelDistribution<Exact>> {
    if x.len() as u64 >= table.m() {
        return Err(Error::SampleTooLarge {
            n: x.len() as u64,
            m: table.m(),
        });
    }
    let denom = table.prefix_prob(x)?;
    if denom.is_zero() {
        return Err(Error::ZeroProbabilitySample);
    }
    let mut ext = x.to_vec();
    ext.push(0);
    let mut probs = Vec::with_capacity(table.k());
    for j in 0..table.k() {
        *ext.last_mut().expect("nonempty") = j;
        probs.push(table.prefix_prob(&ext)? / &denom);
    }
    LabelDistribution::new(probs)
}

/// Pass iff sequences sharing a histogram have equal probability.
pub fn verify_exchangeable(table: &SequenceTable) -> Verdict {
    let mut seen: HashMap<Histogram, (Vec<usize>, &Exact)> = HashMap::new();
    for (idx, p) in table.probs.iter().enumerate() {
        let x = SequenceTable::decode(idx, table.m as usize, table.k);
        let h = histogram_of(&x, table.k).expect("decoded labels are in range");
        match seen.get(&h) {
            Some((first, q)) if *q != p => {
                return Verdict::fail(
                    idx + 1,
                    format!("{first:?} has probability {q} but {x:?} has {p}"),
                )
            }
            Some(_) => {}
            None => {
                seen.insert(h, (x, p));
            }
        }
    }
    Verdict::pass(table.probs.len())
}

/// Compares the table's n-marginal at every n-sequence against the
/// hypergeometric mixture `sum_r H^n(h; u_r) / M_h * w_r`.
fn check_frt(table: &SequenceTable, weights: &[(Histogram, Exact)], n: u64) -> Result<Verdict> {
    if n > table.m() {
        return Err(Error::SampleTooLarge { n, m: table.m() });
    }
    let k = table.k();
    let mut cache: HashMap<Histogram, Exact> = HashMap::new();
    let count = k.pow(n as u32);
    for idx in 0..count {
        let x = SequenceTable::decode(idx, n as usize, k);
        let h = histogram_of(&x, k)?;
        let mixture = match cache.get(&h) {
            Some(v) => v.clone(),
            None => {
                let mut acc = Exact::zero();
                for (u, w) in weights {
                    acc += combinat::hypergeometric_pmf::<Exact>(&h, u)? * w;
                }
                let v = acc / int(multinomial_coeff(&h));
                cache.insert(h.clone(), v.clone());
                v
            }
        };
        let brute = table.prefix_prob(&x)?;
        if brute != mixture {
            return Ok(Verdict::fail(
                idx + 1,
                format!("sequence {x:?}: marginal {brute} but mixture {mixture}"),
            ));
        }
    }
    Ok(Verdict::pass(count))
}

/// FRT check for a model: its sequence table's n-marginals against the
/// mixture over the model's own weights.
pub fn verify_frt(model: &ExchangeableModel<Exact>, n: u64) -> Result<Verdict> {
    let table = SequenceTable::from_model(model)?;
    check_frt(&table, &model.weights().atoms()?, n)
}

/// FRT check for an arbitrary table, with weights read off the table's own
/// histogram totals. Order-dependent tables fail.
pub fn verify_frt_table(table: &SequenceTable, n: u64) -> Result<Verdict> {
    let weights = table.histogram_weights()?;
    check_frt(table, &weights, n)
}

/// Independent recomputation of the approximation certificates.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsVerdict {
    pub fstar: LabelDistribution<Exact>,
    pub tv_star_tilde: Exact,
    pub tv_star_hatprime: Exact,
    /// `None` when infinite.
    pub beta: Option<Exact>,
    pub gamma: Option<Exact>,
    pub beta_bound_ok: bool,
    pub ratio_bounds_ok: bool,
    pub gamma_bound_ok: bool,
    /// Crude `γ <= β (h_min+1)/(h_min∨1) / ((h_max+1)/h_max)`; recorded only.
    pub crude_gamma_held: Option<bool>,
}

impl BoundsVerdict {
    pub fn passed(&self) -> bool {
        self.beta_bound_ok && self.ratio_bounds_ok && self.gamma_bound_ok
    }
}

fn spread(values: &[Exact]) -> Option<Exact> {
    let lo = values.iter().min().expect("k >= 1");
    let hi = values.iter().max().expect("k >= 1");
    if lo.is_zero() {
        None
    } else {
        Some(hi / lo - Exact::one())
    }
}

fn tv(a: &[Exact], b: &[Exact]) -> Exact {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<Exact>() / q(2, 1)
}

/// Recomputes f*, f~, f^', β and γ from the sequence table and checks
/// `TV(f*, f~) <= β/2`, the per-label ratio bounds and `TV(f*, f^') <= γ/2`.
pub fn verify_ht_bounds(model: &ExchangeableModel<Exact>, h: &Histogram) -> Result<BoundsVerdict> {
    let table = SequenceTable::from_model(model)?;
    let k = table.k();
    h.check_k(k)?;
    let n = h.total();
    let x: Vec<usize> = h
        .counts()
        .iter()
        .enumerate()
        .flat_map(|(j, &c)| std::iter::repeat_n(j, c as usize))
        .collect();
    let fstar = brute_force_predictive_table(&table, &x)?;
    let adjacent: Vec<Exact> = (0..k)
        .map(|j| table.histogram_marginal(&h.add_one(j)?))
        .collect::<Result<_>>()?;

    let ftilde: Vec<Exact> = h.counts().iter().map(|&c| q(c + 1, n + k as u64)).collect();
    let empty = h.counts().iter().filter(|&&c| c == 0).count() as u64;
    let fhatprime: Vec<Exact> = h.counts().iter().map(|&c| q(c.max(1), n + empty)).collect();
    let gamma_terms: Vec<Exact> = adjacent
        .iter()
        .zip(h.counts())
        .map(|(a, &c)| a * q(c + 1, c.max(1)))
        .collect();

    let beta = spread(&adjacent);
    let gamma = spread(&gamma_terms);
    let tv_star_tilde = tv(fstar.probs(), &ftilde);
    let tv_star_hatprime = tv(fstar.probs(), &fhatprime);

    let beta_bound_ok = beta.as_ref().is_none_or(|b| tv_star_tilde <= b / q(2, 1));
    let gamma_bound_ok = gamma.as_ref().is_none_or(|g| tv_star_hatprime <= g / q(2, 1));
    let ratio_bounds_ok = beta.as_ref().is_none_or(|b| {
        let upper = Exact::one() + b;
        let lower = upper.recip();
        fstar
            .probs()
            .iter()
            .zip(&ftilde)
            .all(|(s, t)| {
                let r = s / t;
                lower <= r && r <= upper
            })
    });
    let crude_gamma_held = if n == 0 {
        None
    } else {
        let (lo, hi) = (h.min_count(), h.max_count());
        Some(match (&beta, &gamma) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(b), Some(g)) => *g <= b * q(lo + 1, lo.max(1)) / q(hi + 1, hi),
        })
    };

    Ok(BoundsVerdict {
        fstar,
        tv_star_tilde,
        tv_star_hatprime,
        beta,
        gamma,
        beta_bound_ok,
        ratio_bounds_ok,
        gamma_bound_ok,
        crude_gamma_held,
    })
}

/// Pass iff summing the exact predictive over merge groups equals the exact
/// predictive of the merged model on the merged sample.
pub fn verify_merge_commutes(
    model: &ExchangeableModel<Exact>,
    merge: &LabelMerge,
    h: &Histogram,
) -> Result<Verdict> {
    let summed = merge.sum_vector(model.predictive_exact(h)?.probs())?;
    let merged_h = combinat::merge_histogram(h, merge)?;
    let direct = model.merge_model(merge)?.predictive_exact(&merged_h)?;
    for (j, (a, b)) in summed.iter().zip(direct.probs()).enumerate() {
        if a != b {
            return Ok(Verdict::fail(
                j + 1,
                format!("merged label {}: predict-then-sum {a} vs merge-then-predict {b}", j + 1),
            ));
        }
    }
    Ok(Verdict::pass(summed.len()))
}

/// Pass iff predicting from the original model given only the merged
/// sample, then summing, equals the merged model's predictive. The first
/// route is summed over every original sequence consistent with one merged
/// sequence of histogram `merged_h`.
pub fn verify_merge_coarse(
    model: &ExchangeableModel<Exact>,
    merge: &LabelMerge,
    merged_h: &Histogram,
) -> Result<Verdict> {
    merged_h.check_k(merge.merged_k())?;
    let table = SequenceTable::from_model(model)?;
    let (k, n) = (table.k(), merged_h.total() as usize);
    if n as u64 >= table.m() {
        return Err(Error::SampleTooLarge {
            n: n as u64,
            m: table.m(),
        });
    }
    let z: Vec<usize> = merged_h
        .counts()
        .iter()
        .enumerate()
        .flat_map(|(g, &c)| std::iter::repeat_n(g, c as usize))
        .collect();
    let mut joint = vec![Exact::zero(); merge.merged_k()];
    for idx in 0..k.pow(n as u32 + 1) {
        let x = SequenceTable::decode(idx, n + 1, k);
        if x[..n].iter().map(|&j| merge.target(j)).eq(z.iter().copied()) {
            joint[merge.target(x[n])] += table.prefix_prob(&x)?;
        }
    }
    let total: Exact = joint.iter().sum();
    if total.is_zero() {
        return Err(Error::ZeroProbabilitySample);
    }
    let direct = model.merge_model(merge)?.predictive_exact(merged_h)?;
    for (g, (a, b)) in joint.iter().zip(direct.probs()).enumerate() {
        let a = a / &total;
        if &a != b {
            return Ok(Verdict::fail(
                g + 1,
                format!("merged label {}: coarse predict-then-sum {a} vs merge-then-predict {b}", g + 1),
            ));
        }
    }
    Ok(Verdict::pass(joint.len()))
}

/// Largest relative deviation of `float` from `exact`, treating an exact
/// zero as requiring an exact float zero.
pub fn relative_error(exact: &Exact, float: f64) -> f64 {
    let e = exact.to_f64().unwrap_or(f64::NAN);
    if e == 0.0 {
        if float == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        ((float - e) / e).abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinat::histograms;
    use crate::model::{iid_weights, uniform_weights, weights_from_atoms, SimplexWeights};

    fn h(v: &[u64]) -> Histogram {
        Histogram::new(v.to_vec())
    }

    fn r(n: i64, d: i64) -> Exact {
        BigRational::new(n.into(), d.into())
    }

    fn dist(v: &[(i64, i64)]) -> LabelDistribution {
        LabelDistribution::new(v.iter().map(|&(n, d)| r(n, d)).collect()).unwrap()
    }

    fn goldstein(m: u64) -> ExchangeableModel {
        ExchangeableModel::numbered(
            weights_from_atoms(m, 2, vec![(h(&[m, 0]), r(1, 2)), (h(&[0, m]), r(1, 2))], false).unwrap(),
        )
    }

    fn uniform(m: u64, k: usize) -> ExchangeableModel {
        ExchangeableModel::numbered(uniform_weights(m, k).unwrap())
    }

    #[test]
    fn brute_force_predictive_examples() {
        assert_eq!(brute_force_predictive(&uniform(4, 2), &[0, 0]).unwrap(), dist(&[(3, 4), (1, 4)]));
        let p = dist(&[(3, 10), (7, 10)]);
        let iid = ExchangeableModel::numbered(iid_weights(4, &p).unwrap());
        for x in [vec![], vec![1], vec![0, 1, 1]] {
            assert_eq!(brute_force_predictive(&iid, &x).unwrap(), p);
        }
        assert_eq!(brute_force_predictive(&goldstein(5), &[0, 0]).unwrap(), dist(&[(1, 1), (0, 1)]));
        assert_eq!(brute_force_predictive(&goldstein(5), &[0, 1]).unwrap_err(), Error::ZeroProbabilitySample);
    }

    #[test]
    fn frt_examples() {
        assert!(verify_frt(&uniform(3, 2), 2).unwrap().passed);
        let iid = ExchangeableModel::numbered(iid_weights(4, &dist(&[(3, 10), (7, 10)])).unwrap());
        for n in 1..=3 {
            assert!(verify_frt(&iid, n).unwrap().passed);
        }
        // order-dependent: (1,2) more likely than (2,1)
        let table = SequenceTable::new(2, 2, vec![r(1, 4), r(1, 2), r(0, 1), r(1, 4)]).unwrap();
        let v = verify_frt_table(&table, 2).unwrap();
        assert!(!v.passed);
        assert!(v.counterexample.unwrap().contains("[0, 1]"));
        assert!(!verify_exchangeable(&table).passed);
    }

    #[test]
    fn exchangeability_examples() {
        let table = SequenceTable::from_model(&goldstein(3)).unwrap();
        assert!(verify_exchangeable(&table).passed);
        let sym = SequenceTable::new(2, 2, vec![r(1, 4), r(1, 4), r(1, 4), r(1, 4)]).unwrap();
        assert!(verify_exchangeable(&sym).passed);
        assert!(verify_frt_table(&sym, 1).unwrap().passed);
        assert!(SequenceTable::new(2, 2, vec![r(1, 2), r(1, 4)]).is_err());
        assert!(SequenceTable::new(1, 2, vec![r(1, 2), r(1, 4)]).is_err());
    }

    #[test]
    fn table_matches_sequence_pmf() {
        let m = ExchangeableModel::numbered(
            weights_from_atoms(4, 3, vec![(h(&[2, 1, 1]), r(1, 3)), (h(&[0, 4, 0]), r(2, 3))], false).unwrap(),
        );
        let table = SequenceTable::from_model(&m).unwrap();
        for n in 0..=4usize {
            for idx in 0..3usize.pow(n as u32) {
                let x = SequenceTable::decode(idx, n, 3);
                assert_eq!(table.prefix_prob(&x).unwrap(), m.sequence_pmf(&x).unwrap());
            }
        }
    }

    #[test]
    fn bounds_examples() {
        let v = verify_ht_bounds(&uniform(5, 3), &h(&[2, 0, 1])).unwrap();
        assert_eq!(v.tv_star_tilde, r(0, 1));
        assert_eq!(v.beta, Some(r(0, 1)));
        assert!(v.passed());

        let iid = ExchangeableModel::numbered(iid_weights(3, &dist(&[(1, 2), (1, 2)])).unwrap());
        let v = verify_ht_bounds(&iid, &h(&[1, 0])).unwrap();
        assert_eq!(v.fstar, dist(&[(1, 2), (1, 2)]));
        assert_eq!(v.tv_star_tilde, r(1, 6));
        assert_eq!(v.beta, Some(r(1, 1)));
        assert!(v.passed());

        let v = verify_ht_bounds(&goldstein(5), &h(&[2, 0])).unwrap();
        assert_eq!(v.beta, None);
        assert_eq!(v.tv_star_tilde, r(1, 4));
        assert!(v.passed());
    }

    #[test]
    fn bounds_oracle_matches_report() {
        let m = ExchangeableModel::numbered(
            weights_from_atoms(
                5,
                3,
                vec![(h(&[2, 2, 1]), r(1, 2)), (h(&[0, 1, 4]), r(1, 3)), (h(&[5, 0, 0]), r(1, 6))],
                false,
            )
            .unwrap(),
        );
        for n in 0..5 {
            for s in histograms(n, 3) {
                match crate::approx::ht_report(&m, &s) {
                    Ok(rep) => {
                        let v = verify_ht_bounds(&m, &s).unwrap();
                        assert_eq!(rep.fstar, v.fstar);
                        assert_eq!(rep.tv_star_tilde, v.tv_star_tilde);
                        assert_eq!(rep.beta.finite().cloned(), v.beta);
                        assert_eq!(rep.gamma.finite().cloned(), v.gamma);
                        assert_eq!(rep.gamma_crude_held, v.crude_gamma_held);
                        assert!(v.passed() && rep.certified());
                    }
                    Err(e) => {
                        assert_eq!(e, Error::ZeroProbabilitySample);
                        assert!(verify_ht_bounds(&m, &s).is_err());
                    }
                }
            }
        }
    }

    #[test]
    fn merge_commutes_examples() {
        let u = uniform(4, 3);
        assert!(verify_merge_commutes(&u, &LabelMerge::identity(3), &h(&[1, 1, 0])).unwrap().passed);
        let merge = LabelMerge::new(vec![0, 1, 1]).unwrap();
        assert!(verify_merge_commutes(&u, &merge, &h(&[1, 1, 0])).unwrap().passed);
        let iid = ExchangeableModel::numbered(iid_weights(4, &dist(&[(1, 6), (1, 3), (1, 2)])).unwrap());
        assert!(verify_merge_commutes(&iid, &merge, &h(&[0, 2, 1])).unwrap().passed);
    }

    #[test]
    fn fine_sample_breaks_commutation() {
        let model = ExchangeableModel::numbered(
            weights_from_atoms(
                5,
                3,
                vec![(h(&[3, 1, 1]), r(1, 2)), (h(&[0, 0, 5]), r(1, 4)), (h(&[2, 3, 0]), r(1, 4))],
                false,
            )
            .unwrap(),
        );
        let merge = LabelMerge::new(vec![0, 1, 1]).unwrap();
        let v = verify_merge_commutes(&model, &merge, &h(&[1, 0, 1])).unwrap();
        assert!(!v.passed);
        assert!(v.counterexample.unwrap().contains("2/3"));
        // conditioning both routes on the merged sample restores equality
        assert!(verify_merge_coarse(&model, &merge, &h(&[1, 1])).unwrap().passed);
        for s in histograms(3, 2) {
            assert!(verify_merge_coarse(&model, &merge, &s).unwrap().passed);
        }
    }

    #[test]
    fn table_cap() {
        let big = ExchangeableModel::numbered(SimplexWeights::<Exact>::uniform(30, 4).unwrap());
        assert!(matches!(SequenceTable::from_model(&big), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn relative_error_handles_zero() {
        assert_eq!(relative_error(&r(0, 1), 0.0), 0.0);
        assert_eq!(relative_error(&r(0, 1), 1e-300), f64::INFINITY);
        assert!(relative_error(&r(1, 3), 1.0 / 3.0) < 1e-15);
    }
}
