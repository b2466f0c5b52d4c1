//! Seeded randomized verification suites.
//!
//! A case is `{seed, m, k, suite}`; everything random about it comes from a
//! ChaCha8 stream seeded with `seed`, so a case replays identically. The
//! checked-in manifest fixes the cases used by the acceptance run.

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::approx::{ht_approx, ht_report, shrinkage_sides, tv_distance, ApproxReport, Extended};
use crate::combinat::{enumerate_histograms, histograms, Histogram, LabelMerge};
use crate::error::{Error, Result};
use crate::model::{predictive_exact, ExchangeableModel, LabelDistribution, SimplexWeights};
use crate::oracle::{
    brute_force_predictive_table, is_extendable, relative_error, verify_exchangeable, verify_frt,
    verify_merge_coarse, verify_merge_commutes, SequenceTable,
};
use crate::population::{population_prediction, route_comparison, PredictionMode};
use crate::prob::{Exact, Prob};

/// Tolerance for float-mode agreement with rational mode.
pub const AGREEMENT_TOL: f64 = 1e-10;

const MANIFEST: &str = include_str!("../../suites/manifest.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    /// `TV(f*, f~) <= β/2` and the per-label ratio bounds.
    Theorem,
    /// `TV(f*, f^') <= γ/2`, plus the crude γ bound recorded.
    Gamma,
    /// Uniform weights: `f* = f~`, `β = 0`. Exhaustive, ignores the seed.
    Uniform,
    /// IID weights: `f* = p`.
    Iid,
    /// Tables from models: exchangeable, FRT mixture, brute-force predictive.
    Frt,
    /// Exact routes coincide; HT routes differ by the reported TV.
    Merge,
    /// `TV(f~, f^) = k/(n+k) TV(f^, uniform)`.
    Shrinkage,
    /// Model marginals are extendable and the witness reproduces them.
    Extendable,
    /// Float mode within [`AGREEMENT_TOL`] of rational mode.
    Agreement,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::Theorem,
        Suite::Gamma,
        Suite::Uniform,
        Suite::Iid,
        Suite::Frt,
        Suite::Merge,
        Suite::Shrinkage,
        Suite::Extendable,
        Suite::Agreement,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Theorem => "theorem",
            Suite::Gamma => "gamma",
            Suite::Uniform => "uniform",
            Suite::Iid => "iid",
            Suite::Frt => "frt",
            Suite::Merge => "merge",
            Suite::Shrinkage => "shrinkage",
            Suite::Extendable => "extendable",
            Suite::Agreement => "agreement",
        }
    }

    /// Draws a case shape for this suite.
    fn shape<R: Rng>(self, rng: &mut R) -> (u64, usize) {
        match self {
            Suite::Theorem | Suite::Gamma => (rng.random_range(1..=8), rng.random_range(1..=4)),
            Suite::Uniform => (8, 4),
            Suite::Iid => (rng.random_range(1..=8), rng.random_range(1..=4)),
            Suite::Frt => [(4, 2), (5, 2), (4, 3)][rng.random_range(0..3)],
            Suite::Merge => (rng.random_range(1..=6), rng.random_range(2..=4)),
            Suite::Shrinkage => (rng.random_range(1..=50), rng.random_range(1..=10)),
            Suite::Extendable => (rng.random_range(1..=5), rng.random_range(1..=4)),
            Suite::Agreement => (rng.random_range(1..=12), rng.random_range(1..=5)),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub seed: u64,
    pub m: u64,
    pub k: usize,
    pub suite: Suite,
}

/// The checked-in case list.
pub fn manifest() -> Vec<ManifestEntry> {
    serde_json::from_str(MANIFEST).expect("checked-in manifest parses")
}

pub fn manifest_for(suite: Suite) -> Vec<ManifestEntry> {
    manifest().into_iter().filter(|e| e.suite == suite).collect()
}

/// Fresh cases for `suite`, reproducible from `seed`.
pub fn generate_entries(suite: Suite, seed: u64, count: usize) -> Vec<ManifestEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let (m, k) = suite.shape(&mut rng);
            ManifestEntry {
                seed: rng.random(),
                m,
                k,
                suite,
            }
        })
        .collect()
}

/// Random weights over all m-histograms: dense (every atom) or sparse (a
/// uniformly sized random subset), each atom an integer in 1..=16, then
/// renormalized.
pub fn random_weights<R: Rng>(rng: &mut R, m: u64, k: usize) -> Result<SimplexWeights<Exact>> {
    let all = enumerate_histograms(m, k)?;
    let support: Vec<Histogram> = if rng.random_bool(0.5) {
        all
    } else {
        let size = rng.random_range(1..=all.len());
        let mut picked = index::sample(rng, all.len(), size).into_vec();
        picked.sort_unstable();
        picked.into_iter().map(|i| all[i].clone()).collect()
    };
    let atoms = support
        .into_iter()
        .map(|u| (u, BigRational::from_integer(rng.random_range(1..=16u32).into())))
        .collect();
    SimplexWeights::from_atoms(m, k, atoms, true)
}

/// Random label probabilities; each label is zero with probability 1/4, but
/// at least one is positive.
pub fn random_distribution<R: Rng>(rng: &mut R, k: usize) -> Result<LabelDistribution<Exact>> {
    let mut raw: Vec<u32> = (0..k)
        .map(|_| if rng.random_bool(0.25) { 0 } else { rng.random_range(1..=16) })
        .collect();
    if raw.iter().all(|&x| x == 0) {
        raw[rng.random_range(0..k)] = rng.random_range(1..=16);
    }
    LabelDistribution::normalized(raw.into_iter().map(|x| BigRational::from_integer(x.into())).collect())
}

/// Random surjective merge of k labels onto 1..=k groups.
pub fn random_merge<R: Rng>(rng: &mut R, k: usize) -> Result<LabelMerge> {
    let groups = rng.random_range(1..=k);
    let mut map: Vec<usize> = (0..k).map(|j| if j < groups { j } else { rng.random_range(0..groups) }).collect();
    // shuffle so that the forced representatives are not always the first labels
    for i in (1..k).rev() {
        map.swap(i, rng.random_range(0..=i));
    }
    LabelMerge::new(map)
}

fn random_histogram<R: Rng>(rng: &mut R, n: u64, k: usize) -> Histogram {
    let mut counts = vec![0u64; k];
    for _ in 0..n {
        counts[rng.random_range(0..k)] += 1;
    }
    Histogram::new(counts)
}

/// Result of one case.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseOutcome {
    pub entry: ManifestEntry,
    pub checks: u64,
    /// Descriptions of failed checks; at most a few are kept.
    pub failures: Vec<String>,
    pub failure_count: u64,
    /// Gamma suite: samples where the crude γ bound did not hold.
    pub crude_gamma_violations: u64,
    /// Merge suite: cases where the two HT routes differ.
    pub ht_route_disagreements: u64,
    /// Merge suite: cases where the exact predictive given the full sample,
    /// summed over groups, differs from the merged model's predictive.
    pub exact_route_mismatches: u64,
    /// Agreement suite: largest relative error seen.
    pub max_relative_error: f64,
}

impl CaseOutcome {
    fn new(entry: ManifestEntry) -> Self {
        Self {
            entry,
            checks: 0,
            failures: Vec::new(),
            failure_count: 0,
            crude_gamma_violations: 0,
            ht_route_disagreements: 0,
            exact_route_mismatches: 0,
            max_relative_error: 0.0,
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failure_count += 1;
            if self.failures.len() < 5 {
                self.failures.push(what());
            }
        }
    }

    fn error(&mut self, e: Error) {
        self.check(false, || format!("error: {e}"));
    }

    pub fn passed(&self) -> bool {
        self.failure_count == 0
    }
}

/// Aggregate over many cases.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteSummary {
    pub suite: Suite,
    pub cases: u64,
    pub checks: u64,
    pub failed_cases: u64,
    pub failures: Vec<String>,
    pub crude_gamma_violations: u64,
    pub ht_route_disagreements: u64,
    pub exact_route_mismatches: u64,
    pub max_relative_error: f64,
}

impl SuiteSummary {
    pub fn passed(&self) -> bool {
        self.failed_cases == 0
    }

    pub fn from_outcomes(suite: Suite, outcomes: &[CaseOutcome]) -> Self {
        let mut failures = Vec::new();
        for o in outcomes.iter().filter(|o| !o.passed()) {
            for f in &o.failures {
                if failures.len() < 10 {
                    let e = o.entry;
                    failures.push(format!("seed {} (m={}, k={}): {f}", e.seed, e.m, e.k));
                }
            }
        }
        Self {
            suite,
            cases: outcomes.len() as u64,
            checks: outcomes.iter().map(|o| o.checks).sum(),
            failed_cases: outcomes.iter().filter(|o| !o.passed()).count() as u64,
            failures,
            crude_gamma_violations: outcomes.iter().map(|o| o.crude_gamma_violations).sum(),
            ht_route_disagreements: outcomes.iter().map(|o| o.ht_route_disagreements).sum(),
            exact_route_mismatches: outcomes.iter().map(|o| o.exact_route_mismatches).sum(),
            max_relative_error: outcomes.iter().map(|o| o.max_relative_error).fold(0.0, f64::max),
        }
    }
}

impl fmt::Display for SuiteSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} ({} cases, {} checks, {} failed cases)",
            self.suite,
            if self.passed() { "pass" } else { "FAIL" },
            self.cases,
            self.checks,
            self.failed_cases
        )
    }
}

/// Runs one case.
pub fn run_case(entry: ManifestEntry) -> CaseOutcome {
    let mut out = CaseOutcome::new(entry);
    let result = match entry.suite {
        Suite::Theorem | Suite::Gamma => theorem_case(&mut out),
        Suite::Uniform => uniform_case(&mut out),
        Suite::Iid => iid_case(&mut out),
        Suite::Frt => frt_case(&mut out),
        Suite::Merge => merge_case(&mut out),
        Suite::Shrinkage => shrinkage_case(&mut out),
        Suite::Extendable => extendable_case(&mut out),
        Suite::Agreement => agreement_case(&mut out),
    };
    if let Err(e) = result {
        out.error(e);
    }
    out
}

/// Runs cases on all available cores, preserving order.
pub fn run_cases(entries: &[ManifestEntry]) -> Vec<CaseOutcome> {
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let chunk = entries.len().div_ceil(threads).max(1);
    std::thread::scope(|s| {
        let handles: Vec<_> = entries
            .chunks(chunk)
            .map(|c| s.spawn(move || c.iter().map(|&e| run_case(e)).collect::<Vec<_>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("suite worker panicked"))
            .collect()
    })
}

/// Runs every case of `suite` among `entries` and summarizes.
pub fn run_suite(suite: Suite, entries: &[ManifestEntry]) -> SuiteSummary {
    let picked: Vec<_> = entries.iter().copied().filter(|e| e.suite == suite).collect();
    SuiteSummary::from_outcomes(suite, &run_cases(&picked))
}

/// Cases for the exhaustive uniform suite: every m ≤ 8, k ≤ 4.
pub fn uniform_grid() -> Vec<ManifestEntry> {
    (1..=8)
        .flat_map(|m| {
            (1..=4).map(move |k| ManifestEntry {
                seed: 0,
                m,
                k,
                suite: Suite::Uniform,
            })
        })
        .collect()
}

fn rng_for(entry: &ManifestEntry) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(entry.seed)
}

fn theorem_case(out: &mut CaseOutcome) -> Result<()> {
    let e = out.entry;
    let weights = random_weights(&mut rng_for(&e), e.m, e.k)?;
    let tower = crate::model::MarginalTower::new(&weights)?;
    for n in 0..e.m {
        for h in tower.support(n) {
            let r: ApproxReport<Exact> = ht_report(&tower, &h)?;
            if e.suite == Suite::Theorem {
                out.check(r.beta_bound.passed(), || {
                    format!("h={h}: TV(f*,f~)={} > β/2 with β={}", r.tv_star_tilde, r.beta)
                });
                out.check(r.ratio_bounds.iter().all(|c| c.passed()), || {
                    format!("h={h}: per-label ratio outside [1/(1+β), 1+β], β={}", r.beta)
                });
            } else {
                out.check(r.gamma_bound.passed(), || {
                    format!("h={h}: TV(f*,f^')={} > γ/2 with γ={}", r.tv_star_hatprime, r.gamma)
                });
                if r.gamma_crude_held == Some(false) {
                    out.crude_gamma_violations += 1;
                }
            }
        }
    }
    Ok(())
}

fn uniform_case(out: &mut CaseOutcome) -> Result<()> {
    let e = out.entry;
    let model = ExchangeableModel::numbered(SimplexWeights::<Exact>::uniform(e.m, e.k)?);
    let float = model.to_float();
    for n in 0..e.m {
        for h in histograms(n, e.k) {
            let r = ht_report(&model, &h)?;
            out.check(r.fstar == r.ftilde, || format!("h={h}: f*={:?} differs from f~", r.fstar.probs()));
            out.check(r.beta == Extended::Finite(Exact::zero()), || format!("h={h}: β={}", r.beta));
            let fr: ApproxReport<f64> = ht_report(&float, &h)?;
            for (x, y) in r.fstar.probs().iter().zip(fr.fstar.probs()) {
                let err = relative_error(x, *y);
                out.max_relative_error = out.max_relative_error.max(err);
                out.check(err <= AGREEMENT_TOL, || format!("h={h}: float f* {y} vs {x}"));
            }
        }
    }
    Ok(())
}

fn iid_case(out: &mut CaseOutcome) -> Result<()> {
    let e = out.entry;
    let p = random_distribution(&mut rng_for(&e), e.k)?;
    let closed = ExchangeableModel::numbered(SimplexWeights::iid(e.m, &p));
    let explicit = ExchangeableModel::numbered(SimplexWeights::from_atoms(
        e.m,
        e.k,
        closed.weights().atoms()?,
        false,
    )?);
    for n in 0..e.m {
        for h in histograms(n, e.k) {
            let valid = h.counts().iter().zip(p.probs()).all(|(&c, q)| c == 0 || !q.is_zero());
            for model in [&closed, &explicit] {
                match model.predictive_exact(&h) {
                    Ok(f) => out.check(valid && f == p, || format!("h={h}: f*={:?}", f.probs())),
                    Err(Error::ZeroProbabilitySample) => {
                        out.check(!valid, || format!("h={h}: unexpected zero probability"))
                    }
                    Err(e) => return Err(e),
                }
            }
        }
    }
    Ok(())
}

fn frt_case(out: &mut CaseOutcome) -> Result<()> {
    let e = out.entry;
    let model = ExchangeableModel::numbered(random_weights(&mut rng_for(&e), e.m, e.k)?);
    let table = SequenceTable::from_model(&model)?;
    let v = verify_exchangeable(&table);
    out.check(v.passed, || format!("table not exchangeable: {:?}", v.counterexample));
    for n in 0..e.m {
        let v = verify_frt(&model, n)?;
        out.check(v.passed, || format!("n={n}: {:?}", v.counterexample));
        for h in histograms(n, e.k) {
            let x: Vec<usize> = h
                .counts()
                .iter()
                .enumerate()
                .flat_map(|(j, &c)| std::iter::repeat_n(j, c as usize))
                .collect();
            match (brute_force_predictive_table(&table, &x), predictive_exact(&model, &h)) {
                (Ok(a), Ok(b)) => out.check(a == b, || format!("h={h}: brute {:?} vs {:?}", a.probs(), b.probs())),
                (Err(Error::ZeroProbabilitySample), Err(Error::ZeroProbabilitySample)) => out.check(true, String::new),
                (a, b) => out.check(false, || format!("h={h}: brute {a:?} vs production {b:?}")),
            }
        }
    }
    Ok(())
}

fn merge_case(out: &mut CaseOutcome) -> Result<()> {
    let e = out.entry;
    let mut rng = rng_for(&e);
    let model = ExchangeableModel::numbered(random_weights(&mut rng, e.m, e.k)?);
    let merge = random_merge(&mut rng, e.k)?;
    let tower = model.tower()?;
    let n = rng.random_range(0..e.m);
    let support = tower.support(n);
    let h = &support[rng.random_range(0..support.len())];

    let v = verify_merge_commutes(&model, &merge, h)?;
    let rc = route_comparison(h, &merge, Some(&model))?;
    let exact = rc.exact.as_ref().expect("model supplied");
    out.check(v.passed && exact.coincide, || {
        format!("h={h}, merge {:?}: {}", merge.map(), v.counterexample.clone().unwrap_or_default())
    });
    if !(v.passed && exact.coincide) {
        out.exact_route_mismatches += 1;
    }
    let coarse = verify_merge_coarse(&model, &merge, &rc.merged_histogram)?;
    out.check(coarse.passed, || format!("h={h}: {:?}", coarse.counterexample));

    // HT routes by hand: group g gets (h_g + |g|)/(n+k) against (h_g + 1)/(n+k')
    let (k, k2) = (e.k as u64, merge.merged_k() as u64);
    let groups = merge.groups();
    let sum_route: Vec<Exact> = groups
        .iter()
        .map(|g| {
            let hg: u64 = g.iter().map(|&j| h.counts()[j]).sum();
            BigRational::new((hg + g.len() as u64).into(), (n + k).into())
        })
        .collect();
    let merged_route: Vec<Exact> = groups
        .iter()
        .map(|g| {
            let hg: u64 = g.iter().map(|&j| h.counts()[j]).sum();
            BigRational::new((hg + 1).into(), (n + k2).into())
        })
        .collect();
    let tv = tv_distance(&LabelDistribution::new(sum_route)?, &LabelDistribution::new(merged_route)?)?;
    out.check(rc.tv == tv, || format!("h={h}: reported TV {} vs {tv}", rc.tv));
    if !rc.tv.is_zero() {
        out.ht_route_disagreements += 1;
    }
    Ok(())
}

fn shrinkage_case(out: &mut CaseOutcome) -> Result<()> {
    let e = out.entry;
    let h = random_histogram(&mut rng_for(&e), e.m, e.k);
    let (lhs, rhs) = shrinkage_sides::<Exact>(&h)?;
    out.check(lhs == rhs, || format!("h={h}: {lhs} vs {rhs}"));
    Ok(())
}

fn extendable_case(out: &mut CaseOutcome) -> Result<()> {
    let e = out.entry;
    let model = ExchangeableModel::numbered(random_weights(&mut rng_for(&e), e.m, e.k)?);
    for n in 0..=e.m {
        let target = model.marginal_histogram_pmf(n)?;
        let ext = is_extendable(&target, e.m)?;
        let Some(w) = ext.witness.filter(|_| ext.feasible) else {
            out.check(false, || format!("n={n}: model marginal reported infeasible"));
            continue;
        };
        let back = ExchangeableModel::numbered(w).marginal_histogram_pmf(n)?;
        out.check(back == target, || format!("n={n}: witness does not reproduce the target"));
    }
    Ok(())
}

fn agreement_case(out: &mut CaseOutcome) -> Result<()> {
    let e = out.entry;
    let weights = random_weights(&mut rng_for(&e), e.m, e.k)?;
    let tower = crate::model::MarginalTower::new(&weights)?;
    let ftower = crate::model::MarginalTower::new(&weights.to_float())?;
    let compare = |out: &mut CaseOutcome, what: &str, h: &Histogram, x: &Exact, y: f64| {
        let err = relative_error(x, y);
        out.max_relative_error = out.max_relative_error.max(err);
        out.check(err <= AGREEMENT_TOL, || format!("h={h}: {what} float {y} vs {x}"));
    };
    for n in 0..e.m {
        for h in tower.support(n) {
            let r: ApproxReport<Exact> = ht_report(&tower, &h)?;
            let fr: ApproxReport<f64> = ht_report(&ftower, &h)?;
            for (x, y) in r.fstar.probs().iter().zip(fr.fstar.probs()) {
                compare(out, "f*", &h, x, *y);
            }
            // β and γ are excess ratios; agreement is measured on 1 + β, 1 + γ
            for (what, a, b) in [("1+β", &r.beta, &fr.beta), ("1+γ", &r.gamma, &fr.gamma)] {
                match (a, b) {
                    (Extended::Finite(x), Extended::Finite(y)) => compare(out, what, &h, &(x + Exact::one()), 1.0 + y),
                    (Extended::Infinite, Extended::Infinite) => out.check(true, String::new),
                    _ => out.check(false, || format!("h={h}: {what} finiteness differs")),
                }
            }
            // distances between probability vectors are compared on the
            // probability scale
            let tv_err = (r.tv_star_tilde.to_f64() - fr.tv_star_tilde).abs();
            out.max_relative_error = out.max_relative_error.max(tv_err);
            out.check(tv_err <= AGREEMENT_TOL, || format!("h={h}: TV(f*,f~) float {}", fr.tv_star_tilde));

            let p = population_prediction(&h, e.m, PredictionMode::Exact, Some(&tower))?;
            let fp = population_prediction(&h, e.m, PredictionMode::Exact, Some(&ftower))?;
            for (x, y) in p.overall.probs().iter().zip(fp.overall.probs()) {
                compare(out, "population", &h, x, *y);
            }
        }
    }
    let h = Histogram::zeros(e.k);
    let r = ht_approx::<Exact>(&h);
    let fr = ht_approx::<f64>(&h);
    for (x, y) in r.probs().iter().zip(fr.probs()) {
        compare(out, "f~", &h, x, *y);
    }
    Ok(())
}
