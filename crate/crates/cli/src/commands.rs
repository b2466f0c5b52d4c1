//! Command dispatch. Every command produces a JSON document with the same
//! top-level fields, a text rendering and optionally plotting data.

use std::fmt;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use finex_core::approx::{ht_report, ApproxReport, BoundCheck};
use finex_core::model::HistogramMarginals;
use finex_core::oracle::suite::{self, ManifestEntry, Suite, SuiteSummary};
use finex_core::population::{
    grouped_prediction, population_prediction, resolution_advice, route_comparison, GroupSample, PopulationPrediction,
    PredictionMode,
};
use finex_core::{
    Exact, ExchangeableModel, Histogram, LabelDistribution, LabelMerge, LabelSet, NumericMode, PriorAtomsFile,
    SimplexWeights,
};
use serde_json::{json, Value};

use crate::config::{parse_merge, PriorSpec, RunConfig};
use crate::report::{self, JsonProb};
use crate::survey::SurveyDataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Predict,
    Population,
    Groups,
    MergeDemo,
    Beta,
    Verify,
    Simulate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Predict => "predict",
            Command::Population => "population",
            Command::Groups => "groups",
            Command::MergeDemo => "merge-demo",
            Command::Beta => "beta",
            Command::Verify => "verify",
            Command::Simulate => "simulate",
        }
    }

    /// Whether the command reads a survey.
    pub fn needs_survey(self) -> bool {
        !matches!(self, Command::Verify | Command::Simulate)
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Command::Predict,
            Command::Population,
            Command::Groups,
            Command::MergeDemo,
            Command::Beta,
            Command::Verify,
            Command::Simulate,
        ]
        .into_iter()
        .find(|c| c.name() == s)
        .ok_or_else(|| anyhow!("unknown command '{s}'"))
    }
}

/// Output of one command.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub json: Value,
    pub text: String,
    /// CSV for external plotting, when the command has something to plot.
    pub plot: Option<String>,
    /// False when a verification suite failed.
    pub success: bool,
}

struct Envelope {
    command: Command,
    n: Option<u64>,
    m: Option<u64>,
    labels: Option<Vec<String>>,
    histogram: Option<Histogram>,
    mode: NumericMode,
    prediction: Value,
    bounds: Value,
    warnings: Vec<String>,
}

impl Envelope {
    fn json(&self) -> Value {
        json!({
            "command": self.command.name(),
            "n": self.n,
            "m": self.m,
            "k": self.labels.as_ref().map(Vec::len),
            "labels": self.labels,
            "histogram": self.histogram.as_ref().map(|h| h.counts().to_vec()),
            "mode": self.mode,
            "prediction": self.prediction,
            "bounds": self.bounds,
            "warnings": self.warnings,
        })
    }
}

pub fn run_command(command: Command, cfg: &RunConfig, data: Option<&SurveyDataset>) -> Result<Report> {
    match cfg.mode {
        NumericMode::Rational => run::<Exact>(command, cfg, data),
        NumericMode::Float => run::<f64>(command, cfg, data),
    }
}

fn run<P: JsonProb>(command: Command, cfg: &RunConfig, data: Option<&SurveyDataset>) -> Result<Report> {
    if command == Command::Verify {
        return verify(cfg);
    }
    let atoms = cfg.prior.load_atoms()?;
    if command == Command::Simulate {
        return simulate::<P>(cfg, data, atoms.as_ref());
    }
    let data = data.ok_or_else(|| anyhow!("{command} needs a survey (--input)"))?;
    match command {
        Command::Predict | Command::Beta => predict::<P>(command, cfg, data, atoms.as_ref()),
        Command::Population => population::<P>(cfg, data, atoms.as_ref()),
        Command::Groups => groups::<P>(cfg, data, atoms.as_ref()),
        Command::MergeDemo => merge_demo::<P>(cfg, data, atoms.as_ref()),
        Command::Verify | Command::Simulate => unreachable!("handled above"),
    }
}

fn population_size(cfg: &RunConfig, atoms: Option<&PriorAtomsFile>) -> Result<u64> {
    match (cfg.m, atoms) {
        (Some(m), Some(a)) if a.m != m => bail!("--m {m} does not match the atoms file (m = {})", a.m),
        (Some(m), _) => Ok(m),
        (None, Some(a)) => Ok(a.m),
        (None, None) => bail!("population size --m is required"),
    }
}

fn build_model<P: JsonProb>(
    prior: &PriorSpec,
    labels: &LabelSet,
    m: u64,
    atoms: Option<&PriorAtomsFile>,
) -> Result<ExchangeableModel<P>> {
    let k = labels.k();
    let weights = match (prior, atoms) {
        (PriorSpec::Uniform, _) => SimplexWeights::uniform(m, k)?,
        (PriorSpec::Iid(p), _) => {
            if p.len() != k {
                bail!("iid prior has {} probabilities but there are {k} labels", p.len());
            }
            let p = LabelDistribution::new(p.iter().map(P::from_rational).collect())?;
            SimplexWeights::iid(m, &p)
        }
        (PriorSpec::Atoms(_), Some(file)) => {
            if file.k != k {
                bail!("atoms file has k = {} but there are {k} labels", file.k);
            }
            if file.m != m {
                bail!("atoms file has m = {} but the population size is {m}", file.m);
            }
            if let Some(names) = &file.labels {
                if names.as_slice() != labels.names() {
                    bail!("atoms file labels {names:?} differ from the survey labels {:?}", labels.names());
                }
            }
            file.weights()?
        }
        (PriorSpec::Atoms(path), None) => bail!("atoms file {} was not loaded", path.display()),
    };
    Ok(ExchangeableModel::new(labels.clone(), weights)?)
}

fn bounds<P: JsonProb>(r: Option<&ApproxReport<P>>) -> Value {
    let Some(r) = r else {
        return json!({ "beta": null, "gamma": null, "tv_star_tilde": null, "certificates": [] });
    };
    json!({
        "beta": report::extended(&r.beta),
        "gamma": report::extended(&r.gamma),
        "tv_star_tilde": r.tv_star_tilde.json(),
        "certificates": certificates(r),
    })
}

fn ratio_status(checks: &[BoundCheck]) -> BoundCheck {
    if checks.iter().any(|c| !c.passed()) {
        BoundCheck::Violated
    } else if checks.iter().all(|c| *c == BoundCheck::Trivial) {
        BoundCheck::Trivial
    } else {
        BoundCheck::Holds
    }
}

fn certificates<P: JsonProb>(r: &ApproxReport<P>) -> Vec<Value> {
    let mut out = vec![
        report::certificate("tv_star_tilde <= beta/2", r.beta_bound),
        report::certificate("1/(1+beta) <= fstar/ftilde <= 1+beta", ratio_status(&r.ratio_bounds)),
        report::certificate("tv_star_hatprime <= gamma/2", r.gamma_bound),
    ];
    if let Some(s) = r.shrinkage_identity {
        out.push(report::certificate("tv_tilde_hat = k/(n+k) tv_hat_uniform", s));
    }
    out
}

fn warnings<P: JsonProb>(n: u64, m: u64, k: usize, r: Option<&ApproxReport<P>>) -> Vec<String> {
    let mut w = Vec::new();
    let advice = resolution_advice(n, k);
    if advice.under_powered {
        w.push(format!(
            "under-powered: n = {n} is below 9k = {}; the HT and ML approximations differ noticeably (at most {} labels would be adequate)",
            9 * k,
            advice.recommended_k
        ));
    }
    if n == m {
        w.push("the sample is the whole population".into());
    }
    if let Some(r) = r {
        if r.beta.is_infinite() {
            w.push("beta is infinite: the HT bound is trivial for this sample".into());
        }
        if r.gamma_crude_held == Some(false) {
            w.push("the crude gamma bound does not hold for this sample; it is informational only".into());
        }
    }
    w
}

/// The report when the sample leaves something to predict.
fn maybe_report<P: JsonProb>(model: &ExchangeableModel<P>, h: &Histogram) -> Result<Option<ApproxReport<P>>> {
    if h.total() >= model.m() {
        return Ok(None);
    }
    Ok(Some(ht_report(model, h)?))
}

fn plot_csv(header: &str, rows: impl IntoIterator<Item = String>) -> String {
    let mut s = format!("{header}\n");
    for r in rows {
        s.push_str(&r);
        s.push('\n');
    }
    s
}

fn predict<P: JsonProb>(
    command: Command,
    cfg: &RunConfig,
    data: &SurveyDataset,
    atoms: Option<&PriorAtomsFile>,
) -> Result<Report> {
    let m = population_size(cfg, atoms)?;
    let h = data.histogram();
    let n = h.total();
    if n >= m {
        bail!("{command} needs a sample smaller than the population (n = {n}, m = {m})");
    }
    let model = build_model::<P>(&cfg.prior, &data.labels, m, atoms)?;
    let r = ht_report(&model, &h)?;
    let labels = data.labels.names().to_vec();

    let prediction = if command == Command::Predict {
        json!({
            "fstar": report::dist(&r.fstar),
            "ftilde": report::dist(&r.ftilde),
            "fhat": r.fhat.as_ref().map(report::dist),
            "fhatprime": report::dist(&r.fhatprime),
            "tv_star_hatprime": r.tv_star_hatprime.json(),
            "tv_tilde_hat": r.tv_tilde_hat.as_ref().map(JsonProb::json),
        })
    } else {
        let advice = resolution_advice(n, data.k());
        json!({
            "adjacent": report::vector(&r.adjacent),
            "u": report::vector(&r.u),
            "v": report::vector(&r.v),
            "gamma_crude": r.gamma_crude.as_ref().map(report::extended),
            "crude_gamma_held": r.gamma_crude_held,
            "tv_star_hatprime": r.tv_star_hatprime.json(),
            "shrinkage_identity": r.shrinkage_identity,
            "resolution": { "under_powered": advice.under_powered, "recommended_k": advice.recommended_k },
        })
    };

    let mut text = String::new();
    if command == Command::Predict {
        text.push_str(&format!("Predictive distribution of the next item (n = {n}, m = {m})\n"));
        let width = labels.iter().map(String::len).max().unwrap_or(0);
        for (j, l) in labels.iter().enumerate() {
            text.push_str(&format!(
                "  {l:>width$}  f* {:<24} HT {:<24} ML' {}\n",
                r.fstar.probs()[j].text(),
                r.ftilde.probs()[j].text(),
                r.fhatprime.probs()[j].text()
            ));
        }
    } else {
        text.push_str(&format!("Approximation bounds (n = {n}, m = {m})\n"));
    }
    text.push_str(&format!(
        "  beta = {}, TV(f*, HT) = {}\n  gamma = {}, TV(f*, ML') = {}\n",
        report::extended_text(&r.beta),
        r.tv_star_tilde.text(),
        report::extended_text(&r.gamma),
        r.tv_star_hatprime.text()
    ));
    if let Some(c) = &r.gamma_crude {
        text.push_str(&format!("  crude gamma bound = {}\n", report::extended_text(c)));
    }
    for c in certificates(&r) {
        text.push_str(&format!("  {}: {}\n", c["name"].as_str().unwrap_or_default(), c["status"].as_str().unwrap_or_default()));
    }
    text.push('\n');
    text.push_str(&report::survey_chart(n, &labels, h.counts()));

    let plot = plot_csv(
        "label,count,fstar,ftilde",
        labels.iter().enumerate().map(|(j, l)| {
            format!("{l},{},{},{}", h.counts()[j], r.fstar.probs()[j].to_f64(), r.ftilde.probs()[j].to_f64())
        }),
    );
    let env = Envelope {
        command,
        n: Some(n),
        m: Some(m),
        labels: Some(labels),
        histogram: Some(h.clone()),
        mode: cfg.mode,
        prediction,
        bounds: bounds(Some(&r)),
        warnings: warnings(n, m, data.k(), Some(&r)),
    };
    Ok(Report {
        json: env.json(),
        text,
        plot: Some(plot),
        success: true,
    })
}

fn prediction_json<P: JsonProb>(p: &PopulationPrediction<P>) -> Value {
    json!({
        "mode": p.mode,
        "sample_fraction": p.sample_fraction.json(),
        "values": report::dist(&p.overall),
        "groups": p.groups.iter().map(|g| json!({
            "id": g.id,
            "n": g.n,
            "m": g.m,
            "histogram": g.histogram.counts(),
            "sample_fraction": g.sample_fraction.json(),
            "values": report::dist(&g.values),
        })).collect::<Vec<_>>(),
    })
}

fn prediction_mode(cfg: &RunConfig) -> PredictionMode {
    if cfg.exact {
        PredictionMode::Exact
    } else {
        PredictionMode::HtApprox
    }
}

fn population_text<P: JsonProb>(p: &PopulationPrediction<P>, labels: &[String], h: &Histogram) -> String {
    let mut text = report::prediction_chart(p.n, labels, p.overall.probs());
    text.push('\n');
    text.push_str(&report::survey_chart(h.total(), labels, h.counts()));
    text
}

fn population_plot<P: JsonProb>(p: &PopulationPrediction<P>, labels: &[String], h: &Histogram) -> String {
    plot_csv(
        "label,count,prediction",
        labels
            .iter()
            .enumerate()
            .map(|(j, l)| format!("{l},{},{}", h.counts()[j], p.overall.probs()[j].to_f64())),
    )
}

fn population<P: JsonProb>(cfg: &RunConfig, data: &SurveyDataset, atoms: Option<&PriorAtomsFile>) -> Result<Report> {
    let m = population_size(cfg, atoms)?;
    let h = data.histogram();
    let n = h.total();
    if n > m {
        bail!("the sample (n = {n}) is larger than the population (m = {m})");
    }
    let model = build_model::<P>(&cfg.prior, &data.labels, m, atoms)?;
    let r = maybe_report(&model, &h)?;
    let mode = prediction_mode(cfg);
    let marginals = (mode == PredictionMode::Exact).then_some(&model as &dyn HistogramMarginals<P>);
    let p = population_prediction(&h, m, mode, marginals)?;
    let labels = data.labels.names().to_vec();
    let env = Envelope {
        command: Command::Population,
        n: Some(n),
        m: Some(m),
        labels: Some(labels.clone()),
        histogram: Some(h.clone()),
        mode: cfg.mode,
        prediction: prediction_json(&p),
        bounds: bounds(r.as_ref()),
        warnings: warnings(n, m, data.k(), r.as_ref()),
    };
    Ok(Report {
        json: env.json(),
        text: population_text(&p, &labels, &h),
        plot: Some(population_plot(&p, &labels, &h)),
        success: true,
    })
}

fn groups<P: JsonProb>(cfg: &RunConfig, data: &SurveyDataset, atoms: Option<&PriorAtomsFile>) -> Result<Report> {
    let sizes = cfg
        .group_sizes
        .as_ref()
        .ok_or_else(|| anyhow!("groups needs --group-sizes"))?;
    if !data.has_groups() {
        bail!("groups needs a 'group' column in the survey");
    }
    for id in data.group_ids() {
        if !sizes.iter().any(|(g, _)| *g == id) {
            bail!("group '{id}' appears in the survey but has no size in --group-sizes");
        }
    }
    let m: u64 = sizes.iter().map(|(_, s)| s).sum();
    if let Some(given) = cfg.m {
        if given != m {
            bail!("--m {given} does not equal the sum of the group sizes ({m})");
        }
    }
    let mode = prediction_mode(cfg);
    let mut samples = Vec::with_capacity(sizes.len());
    let mut group_bounds = Vec::with_capacity(sizes.len());
    let mut warn = Vec::new();
    for (id, size) in sizes {
        let h = data.group_histogram(id);
        if h.total() > *size {
            bail!("group '{id}' has {} respondents but size {size}", h.total());
        }
        let model = build_model::<P>(&cfg.prior, &data.labels, *size, atoms)
            .with_context(|| format!("prior for group '{id}'"))?;
        let r = maybe_report(&model, &h).with_context(|| format!("group '{id}'"))?;
        for w in warnings(h.total(), *size, data.k(), r.as_ref()) {
            warn.push(format!("group '{id}': {w}"));
        }
        group_bounds.push(json!({ "id": id, "bounds": bounds(r.as_ref()) }));
        samples.push(GroupSample {
            id: id.clone(),
            size: *size,
            histogram: h,
            model: (mode == PredictionMode::Exact).then_some(model),
        });
    }
    let p = grouped_prediction(&samples, m, mode)?;
    let h = data.histogram();
    let labels = data.labels.names().to_vec();
    let mut prediction = prediction_json(&p);
    prediction["group_bounds"] = Value::Array(group_bounds);
    let env = Envelope {
        command: Command::Groups,
        n: Some(h.total()),
        m: Some(m),
        labels: Some(labels.clone()),
        histogram: Some(h.clone()),
        mode: cfg.mode,
        prediction,
        bounds: bounds::<P>(None),
        warnings: warn,
    };
    Ok(Report {
        json: env.json(),
        text: population_text(&p, &labels, &h),
        plot: Some(population_plot(&p, &labels, &h)),
        success: true,
    })
}

fn merge_demo<P: JsonProb>(cfg: &RunConfig, data: &SurveyDataset, atoms: Option<&PriorAtomsFile>) -> Result<Report> {
    let spec = cfg.merge.as_deref().ok_or_else(|| anyhow!("merge-demo needs --merge"))?;
    let merge = LabelMerge::new(parse_merge(spec, data.k())?)?;
    let h = data.histogram();
    let n = h.total();
    let model = if cfg.exact {
        let m = population_size(cfg, atoms)?;
        if n >= m {
            bail!("exact routes need a sample smaller than the population (n = {n}, m = {m})");
        }
        Some(build_model::<P>(&cfg.prior, &data.labels, m, atoms)?)
    } else {
        None
    };
    let rc = route_comparison(&h, &merge, model.as_ref())?;
    let labels = data.labels.names().to_vec();
    let merged_labels: Vec<String> = merge
        .groups()
        .iter()
        .map(|g| g.iter().map(|&j| labels[j].as_str()).collect::<Vec<_>>().join("+"))
        .collect();
    let exact = rc.exact.as_ref().map(|e| {
        json!({
            "predict_then_sum": report::dist(&e.predict_then_sum),
            "merge_then_predict": report::dist(&e.merge_then_predict),
            "coincide": e.coincide,
        })
    });
    let prediction = json!({
        "merge": merge.map().iter().map(|t| t + 1).collect::<Vec<_>>(),
        "merged_labels": merged_labels,
        "merged_histogram": rc.merged_histogram.counts(),
        "predict_then_sum": report::dist(&rc.predict_then_sum),
        "merge_then_predict": report::dist(&rc.merge_then_predict),
        "tv": rc.tv.json(),
        "exact": exact,
    });
    let mut warn = warnings::<P>(n, cfg.m.unwrap_or(u64::MAX), data.k(), None);
    if rc.exact.as_ref().is_some_and(|e| !e.coincide) {
        warn.push("the exact routes differ: the full sample carries information the merged sample does not".into());
    }

    let mut text = format!("HT prediction for merged labels (n = {n})\n");
    let width = merged_labels.iter().map(String::len).max().unwrap_or(0);
    for (g, l) in merged_labels.iter().enumerate() {
        text.push_str(&format!(
            "  {l:>width$}  predict-then-sum {:<24} merge-then-predict {}\n",
            rc.predict_then_sum.probs()[g].text(),
            rc.merge_then_predict.probs()[g].text()
        ));
    }
    text.push_str(&format!("  TV between routes = {}\n", rc.tv.text()));
    if let Some(e) = &rc.exact {
        text.push_str(&format!("  exact routes coincide: {}\n", e.coincide));
    }
    let env = Envelope {
        command: Command::MergeDemo,
        n: Some(n),
        m: cfg.m.or(atoms.map(|a| a.m)),
        labels: Some(labels),
        histogram: Some(h),
        mode: cfg.mode,
        prediction,
        bounds: bounds::<P>(None),
        warnings: warn,
    };
    Ok(Report {
        json: env.json(),
        text,
        plot: None,
        success: true,
    })
}

fn summary_json(s: &SuiteSummary) -> Value {
    json!({
        "suite": s.suite.name(),
        "passed": s.passed(),
        "cases": s.cases,
        "checks": s.checks,
        "failed_cases": s.failed_cases,
        "failures": s.failures,
        "crude_gamma_violations": s.crude_gamma_violations,
        "ht_route_disagreements": s.ht_route_disagreements,
        "exact_route_mismatches": s.exact_route_mismatches,
        "max_relative_error": s.max_relative_error,
    })
}

fn verify(cfg: &RunConfig) -> Result<Report> {
    let suites: Vec<Suite> = match cfg.suite {
        Some(s) => vec![s],
        None => Suite::ALL.to_vec(),
    };
    let mut summaries = Vec::with_capacity(suites.len());
    for s in suites {
        let entries: Vec<ManifestEntry> = match (s, cfg.seed) {
            (Suite::Uniform, _) => suite::uniform_grid(),
            (_, Some(seed)) => suite::generate_entries(s, seed, cfg.cases),
            (_, None) => suite::manifest_for(s),
        };
        summaries.push(suite::run_suite(s, &entries));
    }
    let success = summaries.iter().all(SuiteSummary::passed);
    let mut text = String::new();
    for s in &summaries {
        text.push_str(&format!("{s}\n"));
        for f in &s.failures {
            text.push_str(&format!("    {f}\n"));
        }
    }
    let env = Envelope {
        command: Command::Verify,
        n: None,
        m: None,
        labels: None,
        histogram: None,
        mode: NumericMode::Rational,
        prediction: json!({
            "seed": cfg.seed,
            "source": if cfg.seed.is_some() { "generated" } else { "manifest" },
            "passed": success,
            "suites": summaries.iter().map(summary_json).collect::<Vec<_>>(),
        }),
        bounds: bounds::<Exact>(None),
        warnings: Vec::new(),
    };
    Ok(Report {
        json: env.json(),
        text,
        plot: None,
        success,
    })
}

fn simulate<P: JsonProb>(
    cfg: &RunConfig,
    data: Option<&SurveyDataset>,
    atoms: Option<&PriorAtomsFile>,
) -> Result<Report> {
    let m = population_size(cfg, atoms)?;
    let n = cfg.n.ok_or_else(|| anyhow!("simulate needs --n"))?;
    let labels = match (&cfg.explicit_labels, data, atoms, &cfg.prior) {
        (Some(names), _, _, _) => LabelSet::new(names.clone())?,
        (None, Some(d), _, _) => d.labels.clone(),
        (None, None, Some(a), _) => match &a.labels {
            Some(names) => LabelSet::new(names.clone())?,
            None => LabelSet::numbered(a.k)?,
        },
        (None, None, None, PriorSpec::Iid(p)) => LabelSet::numbered(p.len())?,
        _ => bail!("simulate needs --labels or --input to fix the label set"),
    };
    let model = build_model::<P>(&cfg.prior, &labels, m, atoms)?;
    let seed = cfg.seed.unwrap_or(0);
    let seq = model.sample_sequence(n, seed)?;
    let h = finex_core::combinat::histogram_of(&seq, labels.k())?;
    let names = labels.names().to_vec();
    let env = Envelope {
        command: Command::Simulate,
        n: Some(n),
        m: Some(m),
        labels: Some(names.clone()),
        histogram: Some(h.clone()),
        mode: cfg.mode,
        prediction: json!({
            "seed": seed,
            "prior": cfg.prior.to_string(),
            "sequence": seq.iter().map(|&j| names[j].clone()).collect::<Vec<_>>(),
        }),
        bounds: bounds::<P>(None),
        warnings: Vec::new(),
    };
    let plot = plot_csv(
        "label,count",
        names.iter().zip(h.counts()).map(|(l, c)| format!("{l},{c}")),
    );
    Ok(Report {
        json: env.json(),
        text: report::survey_chart(n, &names, h.counts()),
        plot: Some(plot),
        success: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::survey::parse_survey;

    fn likert() -> SurveyDataset {
        let labels = (1..=5).map(|i| i.to_string()).collect();
        parse_survey("label\n4\n1\n2\n4\n1\n4\n2\n4\n1\n4\n", Some(labels)).unwrap()
    }

    fn cfg(m: u64) -> RunConfig {
        RunConfig {
            m: Some(m),
            ..RunConfig::default()
        }
    }

    #[test]
    fn population_likert_rational() {
        let r = run_command(Command::Population, &cfg(100), Some(&likert())).unwrap();
        let p = &r.json["prediction"];
        assert_eq!(p["mode"], "HT-approx");
        assert_eq!(p["values"], json!(["27/100", "1/5", "3/50", "41/100", "3/50"]));
        assert_eq!(r.json["bounds"]["beta"], "0/1");
        assert_eq!(r.json["histogram"], json!([3, 2, 0, 5, 0]));
        assert_eq!(r.json["k"], 5);
        assert!(r.text.starts_with("Prediction based on a survey of size 10\n"));
        assert!(r.text.contains("\nSurvey of size 10\n"));
        assert!(r.text.contains("Proportion of the electorate\n"));
    }

    #[test]
    fn exact_population_matches_ht_under_uniform() {
        let mut c = cfg(100);
        c.exact = true;
        let r = run_command(Command::Population, &c, Some(&likert())).unwrap();
        assert_eq!(r.json["prediction"]["mode"], "exact");
        assert_eq!(r.json["prediction"]["values"], json!(["27/100", "1/5", "3/50", "41/100", "3/50"]));
    }

    #[test]
    fn predict_and_beta() {
        let r = run_command(Command::Predict, &cfg(100), Some(&likert())).unwrap();
        assert_eq!(r.json["prediction"]["fstar"], json!(["4/15", "1/5", "1/15", "2/5", "1/15"]));
        assert_eq!(r.json["bounds"]["certificates"][0]["status"], "holds");
        let r = run_command(Command::Beta, &cfg(100), Some(&likert())).unwrap();
        assert_eq!(r.json["bounds"]["gamma"], "1/2");
        assert_eq!(r.json["prediction"]["crude_gamma_held"], false);
        assert!(r.json["warnings"].as_array().unwrap().iter().any(|w| w.as_str().unwrap().contains("crude")));
    }

    #[test]
    fn float_mode_numbers() {
        let mut c = cfg(100);
        c.mode = NumericMode::Float;
        let r = run_command(Command::Population, &c, Some(&likert())).unwrap();
        let values: Vec<f64> = r.json["prediction"]["values"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_f64().unwrap())
            .collect();
        assert!((values.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!((values[0] - 0.27).abs() < 1e-12);
        assert_eq!(r.json["mode"], "float");
    }

    #[test]
    fn zero_probability_prior() {
        let mut c = cfg(100);
        c.prior = PriorSpec::Iid(vec![
            Exact::new(1.into(), 2.into()),
            Exact::new(1.into(), 2.into()),
            Exact::from_integer(0.into()),
            Exact::from_integer(0.into()),
            Exact::from_integer(0.into()),
        ]);
        let e = run_command(Command::Predict, &c, Some(&likert())).unwrap_err();
        assert!(e.to_string().contains("f_H^m would need to be revised"));
    }

    #[test]
    fn validation_errors() {
        assert!(run_command(Command::Population, &RunConfig::default(), Some(&likert())).is_err());
        assert!(run_command(Command::Population, &cfg(5), Some(&likert())).is_err());
        assert!(run_command(Command::Predict, &cfg(10), Some(&likert())).is_err());
        assert!(run_command(Command::MergeDemo, &cfg(100), Some(&likert())).is_err());
        assert!(run_command(Command::Groups, &cfg(100), Some(&likert())).is_err());
        assert!(run_command(Command::Population, &cfg(100), None).is_err());
    }

    #[test]
    fn sample_equal_to_population() {
        let r = run_command(Command::Population, &cfg(10), Some(&likert())).unwrap();
        assert_eq!(r.json["prediction"]["values"], json!(["3/10", "1/5", "0/1", "1/2", "0/1"]));
        assert_eq!(r.json["bounds"]["beta"], Value::Null);
    }

    #[test]
    fn grouped() {
        let mut csv = String::from("label,group\n");
        for l in ["4", "1", "2", "4", "1", "4", "2", "4", "1", "4"] {
            csv.push_str(&format!("{l},a\n"));
        }
        for l in 1..=5 {
            csv.push_str(&format!("{l},b\n"));
        }
        let data = parse_survey(&csv, Some((1..=5).map(|i| i.to_string()).collect())).unwrap();
        let c = RunConfig {
            group_sizes: Some(vec![("a".into(), 60), ("b".into(), 40)]),
            ..RunConfig::default()
        };
        let r = run_command(Command::Groups, &c, Some(&data)).unwrap();
        assert_eq!(r.json["m"], 100);
        assert_eq!(r.json["prediction"]["values"][0], "73/300");
        assert_eq!(r.json["prediction"]["groups"][1]["values"], json!(["1/5", "1/5", "1/5", "1/5", "1/5"]));
    }

    #[test]
    fn merge_demo_routes() {
        let data = parse_survey("label\n1\n1\n2\n4\n5\n", Some((1..=6).map(|i| i.to_string()).collect())).unwrap();
        let c = RunConfig {
            merge: Some("1->1,2->1,3->2,4->2,5->3,6->3".into()),
            ..RunConfig::default()
        };
        let r = run_command(Command::MergeDemo, &c, Some(&data)).unwrap();
        let p = &r.json["prediction"];
        assert_eq!(p["predict_then_sum"], json!(["5/11", "3/11", "3/11"]));
        assert_eq!(p["merge_then_predict"], json!(["1/2", "1/4", "1/4"]));
        assert_eq!(p["tv"], "1/22");
        assert_eq!(p["merged_labels"], json!(["1+2", "3+4", "5+6"]));
        assert_eq!(p["exact"], Value::Null);
    }

    #[test]
    fn simulate_is_deterministic() {
        let c = RunConfig {
            m: Some(50),
            n: Some(12),
            seed: Some(4),
            explicit_labels: Some(vec!["x".into(), "y".into(), "z".into()]),
            ..RunConfig::default()
        };
        let a = run_command(Command::Simulate, &c, None).unwrap();
        let b = run_command(Command::Simulate, &c, None).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.json["prediction"]["sequence"].as_array().unwrap().len(), 12);
        assert!(a.text.starts_with("Survey of size 12\n"));
        let mut missing = c.clone();
        missing.explicit_labels = None;
        assert!(run_command(Command::Simulate, &missing, None).is_err());
    }

    #[test]
    fn verify_generated_suite() {
        let c = RunConfig {
            suite: Some(Suite::Frt),
            seed: Some(7),
            cases: 5,
            ..RunConfig::default()
        };
        let r = run_command(Command::Verify, &c, None).unwrap();
        assert!(r.success);
        assert_eq!(r.json["prediction"]["suites"][0]["cases"], 5);
        assert!(r.text.starts_with("frt: pass (5 cases"));
    }

    #[test]
    fn command_names() {
        for c in ["predict", "population", "groups", "merge-demo", "beta", "verify", "simulate"] {
            assert_eq!(c.parse::<Command>().unwrap().name(), c);
        }
        assert!("plot".parse::<Command>().is_err());
    }
}
