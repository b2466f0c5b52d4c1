//! Exchangeable models as weights on the simplex of population histograms.
//!
//! A model on `m` items is fully described by `w_r = Pr(H = u_r)` for every
//! m-histogram `u_r`. Sequence probabilities depend on the histogram only,
//! and every shorter marginal is a mixture of multivariate hypergeometric
//! draws from the urns `u_r`:
//!
//! ```text
//! f_H^n(h) = sum_r H^n(h; u_r) * w_r,    f_X(x_{1:n}) = f_H^n(h(x)) / M_h
//! ```
//!
//! The predictive distribution of the next item then only needs `f_H^{n+1}`
//! at the k histograms adjacent to the sample:
//! `f*_j  ∝  f_H^{n+1}(h + e_j) * (h_j + 1)`.

use std::collections::{BTreeMap, HashMap};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::combinat::{
    self, check_space, histogram_of, histograms, multinomial_coeff, Histogram, LabelMerge,
    LabelSet, DEFAULT_CAP,
};
use crate::error::{Error, Result};
use crate::prob::{Exact, Prob};

/// Probability vector over the k labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelDistribution<P = Exact> {
    probs: Vec<P>,
}

impl<P: Prob> LabelDistribution<P> {
    pub fn new(probs: Vec<P>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("no labels".into()));
        }
        if probs.iter().any(|p| p.is_negative()) {
            return Err(Error::InvalidDistribution("negative probability".into()));
        }
        let sum = probs.iter().fold(P::zero(), |a, b| a + b.clone());
        if !P::near(&sum, &P::one(), 1e-12 * probs.len().max(1) as f64) {
            return Err(Error::InvalidDistribution(format!("probabilities sum to {sum}, not 1")));
        }
        Ok(Self { probs })
    }

    /// Divides nonnegative `values` by their sum.
    pub fn normalized(values: Vec<P>) -> Result<Self> {
        if values.iter().any(|p| p.is_negative()) {
            return Err(Error::InvalidDistribution("negative mass".into()));
        }
        let sum = values.iter().fold(P::zero(), |a, b| a + b.clone());
        if sum.is_zero() {
            return Err(Error::InvalidDistribution("total mass is zero".into()));
        }
        Ok(Self {
            probs: values.into_iter().map(|v| v / sum.clone()).collect(),
        })
    }

    pub(crate) fn from_parts_unchecked(probs: Vec<P>) -> Self {
        Self { probs }
    }

    pub fn uniform(k: usize) -> Self {
        Self {
            probs: vec![P::from_ratio(1, k as u64); k],
        }
    }

    pub fn probs(&self) -> &[P] {
        &self.probs
    }

    pub fn into_probs(self) -> Vec<P> {
        self.probs
    }

    pub fn k(&self) -> usize {
        self.probs.len()
    }

    pub fn get(&self, j: usize) -> &P {
        &self.probs[j]
    }

    /// Index of the largest probability; the first one on ties.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (j, p) in self.probs.iter().enumerate() {
            if *p > self.probs[best] {
                best = j;
            }
        }
        best
    }

    pub fn to_float(&self) -> LabelDistribution<f64> {
        LabelDistribution {
            probs: self.probs.iter().map(Prob::to_f64).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum WeightKind<P> {
    /// `1/c` on every histogram.
    Uniform,
    /// Multinomial weights `M(u; p)`.
    Iid(Vec<P>),
    /// Explicit atoms, sorted by histogram.
    Atoms(Vec<(Histogram, P)>),
}

/// Mixture weights over m-histograms.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexWeights<P = Exact> {
    m: u64,
    k: usize,
    kind: WeightKind<P>,
}

impl<P: Prob> SimplexWeights<P> {
    /// Uniform weights in closed form; nothing is enumerated.
    pub fn uniform(m: u64, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("label count must be positive".into()));
        }
        Ok(Self {
            m,
            k,
            kind: WeightKind::Uniform,
        })
    }

    /// IID weights `w_u = M(u; p)` in closed form; nothing is enumerated.
    pub fn iid(m: u64, p: &LabelDistribution<P>) -> Self {
        Self {
            m,
            k: p.k(),
            kind: WeightKind::Iid(p.probs().to_vec()),
        }
    }

    /// Validates explicit atoms. With `renormalize` the weights are divided
    /// by their sum; otherwise they must already sum to one.
    pub fn from_atoms(m: u64, k: usize, atoms: Vec<(Histogram, P)>, renormalize: bool) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidWeights("no atoms".into()));
        }
        let mut sorted = BTreeMap::new();
        for (u, w) in atoms {
            u.check_k(k)?;
            if u.total() != m {
                return Err(Error::TotalMismatch {
                    expected: m,
                    found: u.total(),
                });
            }
            if w.is_negative() {
                return Err(Error::InvalidWeights(format!("negative weight on {u}")));
            }
            if sorted.contains_key(&u) {
                return Err(Error::InvalidWeights(format!("duplicate atom {u}")));
            }
            sorted.insert(u, w);
        }
        let sum = sorted.values().fold(P::zero(), |a, b| a + b.clone());
        if renormalize {
            if sum.is_zero() {
                return Err(Error::InvalidWeights("weights sum to zero".into()));
            }
            for w in sorted.values_mut() {
                *w = w.clone() / sum.clone();
            }
        } else if !P::near(&sum, &P::one(), 1e-9) {
            return Err(Error::InvalidWeights(format!("weights sum to {sum}, not 1")));
        }
        Ok(Self {
            m,
            k,
            kind: WeightKind::Atoms(sorted.into_iter().collect()),
        })
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// True when the weights are held as explicit atoms.
    pub fn is_explicit(&self) -> bool {
        matches!(self.kind, WeightKind::Atoms(_))
    }

    /// Weight on the population histogram `u`.
    pub fn weight(&self, u: &Histogram) -> Result<P> {
        u.check_k(self.k)?;
        if u.total() != self.m {
            return Err(Error::TotalMismatch {
                expected: self.m,
                found: u.total(),
            });
        }
        self.marginal(u)
    }

    /// `f_H^n(h)` for `n = h.total() <= m`.
    pub fn marginal(&self, h: &Histogram) -> Result<P> {
        h.check_k(self.k)?;
        if h.total() > self.m {
            return Err(Error::SampleTooLarge {
                n: h.total(),
                m: self.m,
            });
        }
        Ok(match &self.kind {
            WeightKind::Uniform => P::uniform_histogram_prob(h.total(), self.k),
            WeightKind::Iid(p) => P::multinomial_pmf(h, p),
            WeightKind::Atoms(atoms) => {
                if h.total() == self.m {
                    atoms
                        .binary_search_by(|(u, _)| u.cmp(h))
                        .map_or_else(|_| P::zero(), |i| atoms[i].1.clone())
                } else {
                    P::hypergeometric_mixture(h, atoms.iter().map(|(u, w)| (u, w)))
                }
            }
        })
    }

    /// Every atom with its weight, ascending by histogram. Closed-form
    /// weights are enumerated subject to `cap`; IID weights skip histograms
    /// that put mass on zero-probability labels.
    pub fn atoms_capped(&self, cap: u64) -> Result<Vec<(Histogram, P)>> {
        match &self.kind {
            WeightKind::Atoms(atoms) => Ok(atoms.clone()),
            WeightKind::Uniform => {
                let c = check_space(self.m, self.k, cap)?;
                let w = P::uniform_histogram_prob(self.m, self.k);
                let mut out = Vec::with_capacity(c as usize);
                out.extend(histograms(self.m, self.k).map(|u| (u, w.clone())));
                Ok(out)
            }
            WeightKind::Iid(p) => {
                let support: Vec<usize> = (0..self.k).filter(|&j| !p[j].is_zero()).collect();
                check_space(self.m, support.len(), cap)?;
                let mut out: Vec<(Histogram, P)> = histograms(self.m, support.len())
                    .map(|s| {
                        let mut counts = vec![0; self.k];
                        for (&j, &c) in support.iter().zip(s.counts()) {
                            counts[j] = c;
                        }
                        let u = Histogram::new(counts);
                        let w = P::multinomial_pmf(&u, p);
                        (u, w)
                    })
                    .collect();
                out.sort_by(|a, b| a.0.cmp(&b.0));
                Ok(out)
            }
        }
    }

    pub fn atoms(&self) -> Result<Vec<(Histogram, P)>> {
        self.atoms_capped(DEFAULT_CAP)
    }

    /// The same weights as 64-bit floats.
    pub fn to_float(&self) -> SimplexWeights<f64> {
        let kind = match &self.kind {
            WeightKind::Uniform => WeightKind::Uniform,
            WeightKind::Iid(p) => WeightKind::Iid(p.iter().map(Prob::to_f64).collect()),
            WeightKind::Atoms(a) => WeightKind::Atoms(a.iter().map(|(u, w)| (u.clone(), w.to_f64())).collect()),
        };
        SimplexWeights {
            m: self.m,
            k: self.k,
            kind,
        }
    }

    /// Draws a population histogram from the weights.
    fn sample_population<R: Rng>(&self, rng: &mut R) -> Result<Histogram> {
        match &self.kind {
            WeightKind::Uniform => {
                // stars and bars: k-1 bar positions among m+k-1 slots
                let slots = (self.m as usize) + self.k - 1;
                let mut bars = rand::seq::index::sample(rng, slots, self.k - 1).into_vec();
                bars.sort_unstable();
                let mut counts = Vec::with_capacity(self.k);
                let mut prev = 0usize;
                for b in bars {
                    counts.push((b - prev) as u64);
                    prev = b + 1;
                }
                counts.push((slots - prev) as u64);
                Ok(Histogram::new(counts))
            }
            WeightKind::Iid(p) => {
                let dist = weighted(p)?;
                let mut counts = vec![0u64; self.k];
                for _ in 0..self.m {
                    counts[dist.sample(rng)] += 1;
                }
                Ok(Histogram::new(counts))
            }
            WeightKind::Atoms(atoms) => {
                let ws: Vec<P> = atoms.iter().map(|(_, w)| w.clone()).collect();
                let dist = weighted(&ws)?;
                Ok(atoms[dist.sample(rng)].0.clone())
            }
        }
    }
}

fn weighted<P: Prob>(ws: &[P]) -> Result<WeightedIndex<f64>> {
    WeightedIndex::new(ws.iter().map(Prob::to_f64))
        .map_err(|e| Error::InvalidWeights(format!("cannot sample from weights: {e}")))
}

/// Uniform weights `1/c` on every m-histogram, subject to the enumeration cap.
pub fn uniform_weights<P: Prob>(m: u64, k: usize) -> Result<SimplexWeights<P>> {
    check_space(m, k, DEFAULT_CAP)?;
    SimplexWeights::uniform(m, k)
}

/// IID weights `w_u = M(u; p)`, subject to the enumeration cap over the
/// labels with positive probability.
pub fn iid_weights<P: Prob>(m: u64, p: &LabelDistribution<P>) -> Result<SimplexWeights<P>> {
    let support = p.probs().iter().filter(|x| !x.is_zero()).count();
    check_space(m, support, DEFAULT_CAP)?;
    Ok(SimplexWeights::iid(m, p))
}

pub fn weights_from_atoms<P: Prob>(
    m: u64,
    k: usize,
    atoms: Vec<(Histogram, P)>,
    renormalize: bool,
) -> Result<SimplexWeights<P>> {
    SimplexWeights::from_atoms(m, k, atoms, renormalize)
}

/// Anything that can evaluate histogram marginals `f_H^n` of an exchangeable
/// m-sequence. Implemented directly by [`ExchangeableModel`] and, from a
/// precomputed table, by [`MarginalTower`].
pub trait HistogramMarginals<P: Prob> {
    fn population_size(&self) -> u64;

    fn label_count(&self) -> usize;

    /// `f_H^n(h)` with `n = h.total()`.
    fn marginal(&self, h: &Histogram) -> Result<P>;

    /// `f_H^{n+1}(h + e_j)` for every label j. Requires `n < m`.
    fn add_one_marginals(&self, h: &Histogram) -> Result<Vec<P>> {
        h.check_k(self.label_count())?;
        if h.total() >= self.population_size() {
            return Err(Error::SampleTooLarge {
                n: h.total(),
                m: self.population_size(),
            });
        }
        (0..h.k()).map(|j| self.marginal(&h.add_one(j)?)).collect()
    }
}

/// Exact predictive distribution of the next item given a sample with
/// histogram `h`.
pub fn predictive_exact<P: Prob, M: HistogramMarginals<P> + ?Sized>(
    model: &M,
    h: &Histogram,
) -> Result<LabelDistribution<P>> {
    let adjacent = model.add_one_marginals(h)?;
    predictive_from_adjacent(&adjacent, h)
}

/// `f*_j ∝ a_j (h_j + 1)` from the adjacent marginals `a_j`.
pub(crate) fn predictive_from_adjacent<P: Prob>(adjacent: &[P], h: &Histogram) -> Result<LabelDistribution<P>> {
    let scores: Vec<P> = adjacent
        .iter()
        .zip(h.counts())
        .map(|(a, &c)| a.clone() * P::from_ratio(c + 1, 1))
        .collect();
    let sum = scores.iter().fold(P::zero(), |a, b| a + b.clone());
    if sum.is_zero() {
        return Err(Error::ZeroProbabilitySample);
    }
    Ok(LabelDistribution::from_parts_unchecked(
        scores.into_iter().map(|s| s / sum.clone()).collect(),
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExchangeableModel<P = Exact> {
    labels: LabelSet,
    weights: SimplexWeights<P>,
}

impl<P: Prob> ExchangeableModel<P> {
    pub fn new(labels: LabelSet, weights: SimplexWeights<P>) -> Result<Self> {
        if labels.k() != weights.k() {
            return Err(Error::DimensionMismatch {
                expected: labels.k(),
                found: weights.k(),
            });
        }
        Ok(Self { labels, weights })
    }

    /// Model with labels named `"1"..="k"`.
    pub fn numbered(weights: SimplexWeights<P>) -> Self {
        let labels = LabelSet::numbered(weights.k()).expect("weights have k >= 1");
        Self { labels, weights }
    }

    pub fn labels(&self) -> &LabelSet {
        &self.labels
    }

    pub fn weights(&self) -> &SimplexWeights<P> {
        &self.weights
    }

    pub fn m(&self) -> u64 {
        self.weights.m()
    }

    pub fn k(&self) -> usize {
        self.weights.k()
    }

    /// Probability of observing exactly the sequence `x` (zero-based labels)
    /// as the first `x.len()` items.
    pub fn sequence_pmf(&self, x: &[usize]) -> Result<P> {
        if x.len() as u64 > self.m() {
            return Err(Error::SampleTooLarge {
                n: x.len() as u64,
                m: self.m(),
            });
        }
        let h = histogram_of(x, self.k())?;
        let f = self.weights.marginal(&h)?;
        let count = multinomial_coeff(&h);
        Ok(f / P::from_rational(&num_rational::BigRational::from_integer(count.into())))
    }

    /// `f_H^n` over every n-histogram, ascending.
    pub fn marginal_histogram_pmf(&self, n: u64) -> Result<Vec<(Histogram, P)>> {
        if n > self.m() {
            return Err(Error::SampleTooLarge { n, m: self.m() });
        }
        combinat::enumerate_histograms(n, self.k())?
            .into_iter()
            .map(|h| {
                let f = self.weights.marginal(&h)?;
                Ok((h, f))
            })
            .collect()
    }

    pub fn predictive_exact(&self, h: &Histogram) -> Result<LabelDistribution<P>> {
        predictive_exact(self, h)
    }

    /// The model of the merged labels: `w'(u') = sum { w(u) : merge(u) = u' }`.
    pub fn merge_model(&self, merge: &LabelMerge) -> Result<ExchangeableModel<P>> {
        merge.check_source(self.k())?;
        let names: Vec<String> = merge
            .groups()
            .iter()
            .map(|g| {
                g.iter()
                    .map(|&j| self.labels.names()[j].as_str())
                    .collect::<Vec<_>>()
                    .join("+")
            })
            .collect();
        let labels = LabelSet::new(names)?;
        let weights = match &self.weights.kind {
            WeightKind::Iid(p) => SimplexWeights {
                m: self.m(),
                k: merge.merged_k(),
                kind: WeightKind::Iid(merge.sum_vector(p)?),
            },
            _ => {
                let mut merged: BTreeMap<Histogram, P> = BTreeMap::new();
                for (u, w) in self.weights.atoms()? {
                    let mu = combinat::merge_histogram(&u, merge)?;
                    let slot = merged.entry(mu).or_insert_with(P::zero);
                    *slot = slot.clone() + w;
                }
                SimplexWeights {
                    m: self.m(),
                    k: merge.merged_k(),
                    kind: WeightKind::Atoms(merged.into_iter().collect()),
                }
            }
        };
        ExchangeableModel::new(labels, weights)
    }

    /// Draws the first `n` items: a population histogram from the weights,
    /// then `n` draws without replacement from that urn. Deterministic in
    /// `seed`.
    pub fn sample_sequence(&self, n: u64, seed: u64) -> Result<Vec<usize>> {
        if n > self.m() {
            return Err(Error::SampleTooLarge { n, m: self.m() });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_with(n, &mut rng)
    }

    pub fn sample_with<R: Rng>(&self, n: u64, rng: &mut R) -> Result<Vec<usize>> {
        if let WeightKind::Iid(p) = &self.weights.kind {
            let dist = weighted(p)?;
            return Ok((0..n).map(|_| dist.sample(rng)).collect());
        }
        let mut urn = self.weights.sample_population(rng)?.counts().to_vec();
        let mut remaining: u64 = urn.iter().sum();
        let mut out = Vec::with_capacity(n as usize);
        for _ in 0..n {
            let mut r = rng.random_range(0..remaining);
            let j = urn
                .iter()
                .position(|&c| {
                    if r < c {
                        true
                    } else {
                        r -= c;
                        false
                    }
                })
                .expect("draw falls inside the urn");
            urn[j] -= 1;
            remaining -= 1;
            out.push(j);
        }
        Ok(out)
    }

    /// Precomputes `f_H^n` for every n at once.
    pub fn tower(&self) -> Result<MarginalTower<P>> {
        MarginalTower::new(&self.weights)
    }

    pub fn to_float(&self) -> ExchangeableModel<f64> {
        ExchangeableModel {
            labels: self.labels.clone(),
            weights: self.weights.to_float(),
        }
    }
}

impl<P: Prob> HistogramMarginals<P> for ExchangeableModel<P> {
    fn population_size(&self) -> u64 {
        self.m()
    }

    fn label_count(&self) -> usize {
        self.k()
    }

    fn marginal(&self, h: &Histogram) -> Result<P> {
        self.weights.marginal(h)
    }
}

/// One weighted urn in a prior atoms file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomEntry {
    pub histogram: Vec<u64>,
    /// A JSON number, or a string such as `"1/3"` for an exact fraction.
    pub weight: serde_json::Value,
}

/// Explicit simplex weights as stored on disk:
/// `{"m", "k", "labels", "atoms": [{"histogram", "weight"}], "renormalize"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorAtomsFile {
    pub m: u64,
    pub k: usize,
    #[serde(default)]
    pub labels: Option<Vec<String>>,
    pub atoms: Vec<AtomEntry>,
    #[serde(default)]
    pub renormalize: bool,
}

impl PriorAtomsFile {
    pub fn parse(json: &str) -> Result<Self> {
        serde_json::from_str(json).map_err(|e| Error::InvalidWeights(format!("atoms file: {e}")))
    }

    /// Weights read exactly from their decimal or fractional text.
    pub fn exact_atoms(&self) -> Result<Vec<(Histogram, Exact)>> {
        self.atoms
            .iter()
            .map(|a| {
                let text = match &a.weight {
                    serde_json::Value::Number(n) => n.to_string(),
                    serde_json::Value::String(s) => s.clone(),
                    other => return Err(Error::InvalidWeights(format!("weight {other} is not a number"))),
                };
                let w = crate::prob::parse_rational(&text)
                    .ok_or_else(|| Error::InvalidWeights(format!("cannot read weight '{text}'")))?;
                Ok((Histogram::new(a.histogram.clone()), w))
            })
            .collect()
    }

    pub fn weights<P: Prob>(&self) -> Result<SimplexWeights<P>> {
        let atoms = self
            .exact_atoms()?
            .into_iter()
            .map(|(u, w)| (u, P::from_rational(&w)))
            .collect();
        SimplexWeights::from_atoms(self.m, self.k, atoms, self.renormalize)
    }

    /// Labels from the file, or `1..=k`.
    pub fn model<P: Prob>(&self) -> Result<ExchangeableModel<P>> {
        let labels = match &self.labels {
            Some(names) => LabelSet::new(names.clone())?,
            None => LabelSet::numbered(self.k)?,
        };
        ExchangeableModel::new(labels, self.weights()?)
    }
}

/// Every histogram marginal `f_H^0 .. f_H^m` of a model, held sparsely.
///
/// Built top-down from the weights with
/// `f^{n-1}(h) = sum_j f^n(h + e_j) (h_j + 1) / n`: dropping the last item
/// of an exchangeable n-sequence whose histogram is `g` removes label j with
/// probability `g_j / n`. Only histograms with positive mass are stored.
#[derive(Debug, Clone)]
pub struct MarginalTower<P = Exact> {
    k: usize,
    levels: Vec<HashMap<Histogram, P>>,
}

impl<P: Prob> MarginalTower<P> {
    pub fn new(weights: &SimplexWeights<P>) -> Result<Self> {
        let m = weights.m();
        let k = weights.k();
        let mut top = HashMap::new();
        for (u, w) in weights.atoms()? {
            if !w.is_zero() {
                top.insert(u, w);
            }
        }
        let mut levels = vec![top];
        for n in (1..=m).rev() {
            let upper = levels.last().expect("nonempty");
            let mut lower: HashMap<Histogram, P> = HashMap::with_capacity(upper.len());
            for (g, v) in upper {
                for j in 0..k {
                    if let Some(h) = g.remove_one(j) {
                        let share = v.clone() * P::from_ratio(g.counts()[j], n);
                        let slot = lower.entry(h).or_insert_with(P::zero);
                        *slot = slot.clone() + share;
                    }
                }
            }
            levels.push(lower);
        }
        levels.reverse();
        Ok(Self { k, levels })
    }

    /// `f_H^n` as a sparse map over histograms with positive mass.
    pub fn level(&self, n: u64) -> Option<&HashMap<Histogram, P>> {
        self.levels.get(n as usize)
    }

    /// Positive-probability sample histograms of size `n`, ascending.
    pub fn support(&self, n: u64) -> Vec<Histogram> {
        let mut hs: Vec<Histogram> = self
            .level(n)
            .map(|l| l.keys().cloned().collect())
            .unwrap_or_default();
        hs.sort();
        hs
    }
}

impl<P: Prob> HistogramMarginals<P> for MarginalTower<P> {
    fn population_size(&self) -> u64 {
        self.levels.len() as u64 - 1
    }

    fn label_count(&self) -> usize {
        self.k
    }

    fn marginal(&self, h: &Histogram) -> Result<P> {
        h.check_k(self.k)?;
        let level = self.level(h.total()).ok_or(Error::SampleTooLarge {
            n: h.total(),
            m: self.population_size(),
        })?;
        Ok(level.get(h).cloned().unwrap_or_else(P::zero))
    }
}
