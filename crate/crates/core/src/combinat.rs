//! Histograms over a finite label set and their exact combinatorics.
//!
//! Label indices are zero-based in this API. Histograms order
//! lexicographically on their count vectors, ascending, and that order fixes
//! the index of each population histogram.

use std::fmt;

use num_bigint::BigUint;
use num_integer::binomial;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::Prob;

/// Default bound on the number of histograms materialized by enumeration.
pub const DEFAULT_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSet {
    names: Vec<String>,
}

impl LabelSet {
    pub fn new(names: Vec<String>) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::InvalidArgument("label set must contain at least one label".into()));
        }
        let mut sorted: Vec<&String> = names.iter().collect();
        sorted.sort();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument(format!("duplicate label {:?}", w[0])));
        }
        Ok(Self { names })
    }

    /// Labels `"1"` through `"k"`.
    pub fn numbered(k: usize) -> Result<Self> {
        Self::new((1..=k).map(|i| i.to_string()).collect())
    }

    pub fn k(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "Vec<u64>", into = "Vec<u64>")]
pub struct Histogram {
    counts: Vec<u64>,
    total: u64,
}

impl From<Vec<u64>> for Histogram {
    fn from(counts: Vec<u64>) -> Self {
        let total = counts.iter().sum();
        Self { counts, total }
    }
}

impl From<Histogram> for Vec<u64> {
    fn from(h: Histogram) -> Self {
        h.counts
    }
}

impl fmt::Display for Histogram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.counts.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

impl Histogram {
    pub fn new(counts: Vec<u64>) -> Self {
        counts.into()
    }

    pub fn zeros(k: usize) -> Self {
        vec![0; k].into()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn k(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Copy of `self` with label `j` incremented.
    pub fn add_one(&self, j: usize) -> Result<Histogram> {
        if j >= self.k() {
            return Err(Error::LabelOutOfRange { index: j, k: self.k() });
        }
        let mut counts = self.counts.clone();
        counts[j] += 1;
        Ok(Histogram {
            counts,
            total: self.total + 1,
        })
    }

    /// Copy of `self` with label `j` decremented, or `None` if it is zero.
    pub fn remove_one(&self, j: usize) -> Option<Histogram> {
        let c = *self.counts.get(j)?;
        if c == 0 {
            return None;
        }
        let mut counts = self.counts.clone();
        counts[j] -= 1;
        Some(Histogram {
            counts,
            total: self.total - 1,
        })
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &Histogram) -> bool {
        self.k() == other.k() && self.counts.iter().zip(&other.counts).all(|(a, b)| a <= b)
    }

    pub fn min_count(&self) -> u64 {
        self.counts.iter().copied().min().unwrap_or(0)
    }

    pub fn max_count(&self) -> u64 {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    pub(crate) fn check_k(&self, k: usize) -> Result<()> {
        if self.k() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: self.k(),
            });
        }
        Ok(())
    }
}

/// Surjective relabelling of `k` labels onto `k'` merged labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelMerge {
    map: Vec<usize>,
    merged_k: usize,
}

impl LabelMerge {
    /// `map[j]` is the merged label of label `j`. The targets must cover
    /// `0..k'` without gaps.
    pub fn new(map: Vec<usize>) -> Result<Self> {
        if map.is_empty() {
            return Err(Error::InvalidMerge("empty map".into()));
        }
        let merged_k = map.iter().max().map_or(0, |m| m + 1);
        let mut hit = vec![false; merged_k];
        for &t in &map {
            hit[t] = true;
        }
        if let Some(missing) = hit.iter().position(|h| !h) {
            return Err(Error::InvalidMerge(format!(
                "merged label {} has no source label",
                missing + 1
            )));
        }
        Ok(Self { map, merged_k })
    }

    pub fn identity(k: usize) -> Self {
        Self {
            map: (0..k).collect(),
            merged_k: k,
        }
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn source_k(&self) -> usize {
        self.map.len()
    }

    pub fn merged_k(&self) -> usize {
        self.merged_k
    }

    pub fn target(&self, j: usize) -> usize {
        self.map[j]
    }

    /// Source labels of each merged label, in ascending order.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.merged_k];
        for (j, &t) in self.map.iter().enumerate() {
            groups[t].push(j);
        }
        groups
    }

    pub(crate) fn check_source(&self, k: usize) -> Result<()> {
        if self.map.len() != k {
            return Err(Error::InvalidMerge(format!(
                "map covers {} labels but the histogram has {k}",
                self.map.len()
            )));
        }
        Ok(())
    }

    /// Sums a per-label vector over merge groups.
    pub fn sum_vector<P: Prob>(&self, values: &[P]) -> Result<Vec<P>> {
        self.check_source(values.len())?;
        let mut out = vec![P::zero(); self.merged_k];
        for (v, &t) in values.iter().zip(&self.map) {
            out[t] = out[t].clone() + v.clone();
        }
        Ok(out)
    }
}

/// Number of distinct m-histograms over k labels, `C(m+k-1, k-1)`.
pub fn histogram_space_size(m: u64, k: usize) -> BigUint {
    assert!(k >= 1, "label count must be positive");
    binomial(BigUint::from(m + k as u64 - 1), BigUint::from(k as u64 - 1))
}

/// Lazy ascending-lexicographic iterator over all m-histograms on k labels.
#[derive(Debug, Clone)]
pub struct Histograms {
    next: Option<Vec<u64>>,
}

impl Iterator for Histograms {
    type Item = Histogram;

    fn next(&mut self) -> Option<Histogram> {
        let current = self.next.take()?;
        let k = current.len();
        // Rightmost position with mass to its right gets incremented; that
        // mass minus one moves to the last slot.
        let mut suffix = current[k - 1];
        let mut succ = None;
        for i in (0..k.saturating_sub(1)).rev() {
            if suffix > 0 {
                let mut s = current.clone();
                s[i] += 1;
                for c in &mut s[i + 1..] {
                    *c = 0;
                }
                s[k - 1] = suffix - 1;
                succ = Some(s);
                break;
            }
            suffix += current[i];
        }
        self.next = succ;
        Some(current.into())
    }
}

/// All m-histograms over k labels without a size check.
pub fn histograms(m: u64, k: usize) -> Histograms {
    assert!(k >= 1, "label count must be positive");
    let mut first = vec![0; k];
    first[k - 1] = m;
    Histograms { next: Some(first) }
}

/// Ascending-lexicographic list of every m-histogram over k labels, refusing
/// to materialize more than `cap` of them.
pub fn enumerate_histograms_capped(m: u64, k: usize, cap: u64) -> Result<Vec<Histogram>> {
    if k == 0 {
        return Err(Error::InvalidArgument("label count must be positive".into()));
    }
    let c = histogram_space_size(m, k);
    match c.to_u64() {
        Some(n) if n <= cap => Ok(histograms(m, k).collect()),
        _ => Err(Error::cap(c, cap)),
    }
}

pub fn enumerate_histograms(m: u64, k: usize) -> Result<Vec<Histogram>> {
    enumerate_histograms_capped(m, k, DEFAULT_CAP)
}

/// Fails with [`Error::CapExceeded`] unless `C(m+k-1,k-1) <= cap`.
pub fn check_space(m: u64, k: usize, cap: u64) -> Result<u64> {
    let c = histogram_space_size(m, k);
    match c.to_u64() {
        Some(n) if n <= cap => Ok(n),
        _ => Err(Error::cap(c, cap)),
    }
}

/// Number of sequences with histogram `h`: `n! / (h_1! ... h_k!)`.
pub fn multinomial_coeff(h: &Histogram) -> BigUint {
    let mut remaining = h.total();
    let mut acc = BigUint::one();
    for &c in h.counts() {
        acc *= binomial(BigUint::from(remaining), BigUint::from(c));
        remaining -= c;
    }
    acc
}

/// Multivariate hypergeometric probability of drawing `h` from the urn `u`;
/// exactly zero unless `h <= u` componentwise.
pub fn hypergeometric_pmf<P: Prob>(h: &Histogram, u: &Histogram) -> Result<P> {
    h.check_k(u.k())?;
    if h.total() > u.total() {
        return Err(Error::SampleTooLarge {
            n: h.total(),
            m: u.total(),
        });
    }
    Ok(P::hypergeometric(h, u))
}

/// Histogram of a sequence of zero-based label indices.
pub fn histogram_of(seq: &[usize], k: usize) -> Result<Histogram> {
    let mut counts = vec![0u64; k];
    for &x in seq {
        *counts
            .get_mut(x)
            .ok_or(Error::LabelOutOfRange { index: x, k })? += 1;
    }
    Ok(counts.into())
}

pub fn merge_histogram(h: &Histogram, merge: &LabelMerge) -> Result<Histogram> {
    merge.check_source(h.k())?;
    let mut counts = vec![0u64; merge.merged_k()];
    for (c, &t) in h.counts().iter().zip(merge.map()) {
        counts[t] += c;
    }
    Ok(counts.into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn h(v: &[u64]) -> Histogram {
        Histogram::new(v.to_vec())
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn space_size_examples() {
        assert_eq!(histogram_space_size(10, 5), BigUint::from(1001u32));
        assert_eq!(histogram_space_size(7, 1), BigUint::from(1u32));
        assert_eq!(histogram_space_size(1, 6), BigUint::from(6u32));
        assert_eq!(histogram_space_size(0, 3), BigUint::from(1u32));
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(enumerate_histograms(2, 2).unwrap(), vec![h(&[0, 2]), h(&[1, 1]), h(&[2, 0])]);
        assert_eq!(
            enumerate_histograms(1, 3).unwrap(),
            vec![h(&[0, 0, 1]), h(&[0, 1, 0]), h(&[1, 0, 0])]
        );
        assert_eq!(enumerate_histograms(10, 5).unwrap().len(), 1001);
        assert_eq!(enumerate_histograms(0, 2).unwrap(), vec![h(&[0, 0])]);
        assert_eq!(enumerate_histograms(4, 1).unwrap(), vec![h(&[4])]);
    }

    #[test]
    fn enumeration_cap_names_count() {
        let err = enumerate_histograms_capped(10, 5, 1000).unwrap_err();
        assert_eq!(err, Error::CapExceeded { count: "1001".into(), cap: 1000 });
        assert!(enumerate_histograms(1000, 10).is_err());
    }

    #[test]
    fn enumeration_properties_small() {
        for m in 0..=12u64 {
            for k in 1..=5usize {
                let all = enumerate_histograms(m, k).unwrap();
                assert_eq!(BigUint::from(all.len()), histogram_space_size(m, k));
                assert!(all.iter().all(|x| x.total() == m && x.k() == k));
                assert!(all.windows(2).all(|w| w[0] < w[1]), "strictly ascending at m={m} k={k}");
            }
        }
    }

    #[test]
    fn multinomial_examples() {
        assert_eq!(multinomial_coeff(&h(&[3, 2, 0, 5, 0])), BigUint::from(2520u32));
        assert_eq!(multinomial_coeff(&h(&[0, 0, 0])), BigUint::from(1u32));
        assert_eq!(multinomial_coeff(&h(&[2, 1])), BigUint::from(3u32));
    }

    #[test]
    fn multinomials_sum_to_k_pow_n() {
        for n in 0..=8u64 {
            for k in 1..=4usize {
                let total: BigUint = histograms(n, k).map(|x| multinomial_coeff(&x)).sum();
                assert_eq!(total, BigUint::from(k).pow(n as u32));
            }
        }
    }

    #[test]
    fn hypergeometric_examples() {
        let p: BigRational = hypergeometric_pmf(&h(&[1, 1]), &h(&[2, 2])).unwrap();
        assert_eq!(p, q(2, 3));
        let p: BigRational = hypergeometric_pmf(&h(&[1, 3]), &h(&[1, 3])).unwrap();
        assert_eq!(p, q(1, 1));
        let p: BigRational = hypergeometric_pmf(&h(&[2, 0]), &h(&[1, 3])).unwrap();
        assert_eq!(p, q(0, 1));
        let p: f64 = hypergeometric_pmf(&h(&[2, 0]), &h(&[1, 3])).unwrap();
        assert_eq!(p, 0.0);
        assert!(matches!(
            hypergeometric_pmf::<f64>(&h(&[1, 1, 0]), &h(&[2, 2])),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            hypergeometric_pmf::<f64>(&h(&[3, 3]), &h(&[2, 2])),
            Err(Error::SampleTooLarge { .. })
        ));
    }

    #[test]
    fn hypergeometric_sums_to_one() {
        for m in 0..=10u64 {
            for k in 1..=4usize {
                for u in histograms(m, k) {
                    for n in 0..=m {
                        let s: BigRational = histograms(n, k)
                            .map(|x| hypergeometric_pmf::<BigRational>(&x, &u).unwrap())
                            .sum();
                        assert_eq!(s, q(1, 1), "u={u} n={n}");
                    }
                }
            }
        }
    }

    #[test]
    fn float_hypergeometric_tracks_rational() {
        for m in [5u64, 12, 40, 150] {
            for u in histograms(m, 3).step_by(7) {
                for n in [1, m / 3, m / 2, m - 1] {
                    for x in histograms(n, 3).step_by(5) {
                        let exact: BigRational = hypergeometric_pmf(&x, &u).unwrap();
                        let float: f64 = hypergeometric_pmf(&x, &u).unwrap();
                        let e = Prob::to_f64(&exact);
                        if e > 0.0 {
                            assert!(((float - e) / e).abs() < 1e-12, "u={u} x={x}: {float} vs {e}");
                        } else {
                            assert_eq!(float, 0.0);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn histogram_of_examples() {
        // 1-based sequence from the Likert illustration.
        let seq: Vec<usize> = [1, 4, 4, 2, 4, 1, 4, 2, 1, 4].iter().map(|x| x - 1).collect();
        assert_eq!(histogram_of(&seq, 5).unwrap(), h(&[3, 2, 0, 5, 0]));
        assert_eq!(histogram_of(&[], 3).unwrap(), h(&[0, 0, 0]));
        assert_eq!(histogram_of(&[1, 1], 2).unwrap(), h(&[0, 2]));
        assert_eq!(
            histogram_of(&[0, 5], 5).unwrap_err(),
            Error::LabelOutOfRange { index: 5, k: 5 }
        );
    }

    #[test]
    fn add_one_examples() {
        assert_eq!(h(&[3, 2, 0, 5, 0]).add_one(2).unwrap(), h(&[3, 2, 1, 5, 0]));
        assert_eq!(h(&[0, 0]).add_one(0).unwrap(), h(&[1, 0]));
        assert_eq!(h(&[3, 2]).add_one(1).unwrap().total(), 6);
        assert!(h(&[0, 0]).add_one(2).is_err());
        assert_eq!(h(&[1, 0]).remove_one(1), None);
        assert_eq!(h(&[1, 0]).remove_one(0), Some(h(&[0, 0])));
    }

    #[test]
    fn merge_examples() {
        let merge = LabelMerge::new(vec![0, 0, 0, 1, 2]).unwrap();
        assert_eq!(merge_histogram(&h(&[3, 2, 0, 5, 0]), &merge).unwrap(), h(&[5, 5, 0]));
        let id = LabelMerge::identity(5);
        assert_eq!(merge_histogram(&h(&[3, 2, 0, 5, 0]), &id).unwrap(), h(&[3, 2, 0, 5, 0]));
        let all = LabelMerge::new(vec![0; 5]).unwrap();
        assert_eq!(merge_histogram(&h(&[3, 2, 0, 5, 0]), &all).unwrap(), h(&[10]));
        assert!(matches!(LabelMerge::new(vec![0, 2]), Err(Error::InvalidMerge(_))));
        assert!(merge_histogram(&h(&[1, 2]), &merge).is_err());
        assert_eq!(merge.groups(), vec![vec![0, 1, 2], vec![3], vec![4]]);
    }

    #[test]
    fn label_set_validation() {
        assert!(LabelSet::new(vec![]).is_err());
        assert!(LabelSet::new(vec!["a".into(), "a".into()]).is_err());
        let l = LabelSet::numbered(3).unwrap();
        assert_eq!(l.index_of("2"), Some(1));
        assert_eq!(l.k(), 3);
    }

    fn merge_and_hist() -> impl Strategy<Value = (Vec<usize>, Vec<u64>, usize)> {
        (1usize..=6).prop_flat_map(|k| {
            (
                proptest::collection::vec(0usize..k, k),
                proptest::collection::vec(0u64..6, k),
                0usize..k,
            )
        })
    }

    proptest! {
        #[test]
        fn merge_preserves_total_and_commutes_with_add_one((raw, counts, j) in merge_and_hist()) {
            // compact the raw targets into a surjective map
            let mut targets: Vec<usize> = raw.clone();
            targets.sort();
            targets.dedup();
            let map: Vec<usize> = raw.iter().map(|t| targets.binary_search(t).unwrap()).collect();
            let merge = LabelMerge::new(map).unwrap();
            let hist = Histogram::new(counts);
            let merged = merge_histogram(&hist, &merge).unwrap();
            prop_assert_eq!(merged.total(), hist.total());
            let lhs = merge_histogram(&hist.add_one(j).unwrap(), &merge).unwrap();
            let rhs = merged.add_one(merge.target(j)).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
