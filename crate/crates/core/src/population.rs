//! Population-level point predictions built on the predictive distribution.
//!
//! The expected population proportion of label j after observing `n` of
//! `m` items is `(n/m) f^_j + (1 - n/m) f*_j`. Replacing `f*` with the
//! add-one approximation gives `p~_j`. With groups, each group is predicted
//! on its own sample and the results are weighted by `m_g / m`.

use std::fmt;

use serde::Serialize;

use crate::approx::{ht_approx, ml_approx, tv_distance};
use crate::combinat::{merge_histogram, Histogram, LabelMerge};
use crate::error::{Error, Result};
use crate::model::{predictive_exact, ExchangeableModel, HistogramMarginals, LabelDistribution};
use crate::prob::Prob;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PredictionMode {
    #[serde(rename = "exact")]
    Exact,
    #[serde(rename = "HT-approx")]
    HtApprox,
}

impl fmt::Display for PredictionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PredictionMode::Exact => "exact",
            PredictionMode::HtApprox => "HT-approx",
        })
    }
}

/// Prediction for one group (or the whole population when ungrouped).
#[derive(Debug, Clone, PartialEq)]
pub struct GroupPrediction<P> {
    pub id: String,
    pub n: u64,
    pub m: u64,
    pub histogram: Histogram,
    pub sample_fraction: P,
    pub values: LabelDistribution<P>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PopulationPrediction<P> {
    pub mode: PredictionMode,
    pub n: u64,
    pub m: u64,
    pub sample_fraction: P,
    pub overall: LabelDistribution<P>,
    /// One entry per group; a single entry for ungrouped predictions.
    pub groups: Vec<GroupPrediction<P>>,
}

/// Sample from one group of known size.
#[derive(Debug, Clone)]
pub struct GroupSample<P> {
    pub id: String,
    pub size: u64,
    pub histogram: Histogram,
    pub model: Option<ExchangeableModel<P>>,
}

fn predict_one<P: Prob>(
    h: &Histogram,
    m: u64,
    mode: PredictionMode,
    model: Option<&dyn HistogramMarginals<P>>,
) -> Result<(P, LabelDistribution<P>)> {
    let n = h.total();
    if n > m {
        return Err(Error::SampleTooLarge { n, m });
    }
    if m == 0 {
        return Err(Error::InvalidArgument("population size must be positive".into()));
    }
    let fraction = P::from_ratio(n, m);
    let rest = P::one() - fraction.clone();
    let k = h.k();
    let mut values = vec![P::zero(); k];
    if n > 0 {
        let fhat = ml_approx::<P>(h)?;
        for (v, f) in values.iter_mut().zip(fhat.probs()) {
            *v = fraction.clone() * f.clone();
        }
    }
    if n < m {
        let next = match mode {
            PredictionMode::HtApprox => ht_approx::<P>(h),
            PredictionMode::Exact => {
                let model = model.ok_or_else(|| {
                    Error::InvalidArgument("exact population prediction needs a model".into())
                })?;
                if model.population_size() != m {
                    return Err(Error::InvalidArgument(format!(
                        "model population size {} differs from m = {m}",
                        model.population_size()
                    )));
                }
                predictive_exact(model, h)?
            }
        };
        for (v, f) in values.iter_mut().zip(next.probs()) {
            *v = v.clone() + rest.clone() * f.clone();
        }
    }
    Ok((fraction, LabelDistribution::new(values)?))
}

/// Expected population proportions after observing the sample `h` from a
/// population of size `m`.
pub fn population_prediction<P: Prob>(
    h: &Histogram,
    m: u64,
    mode: PredictionMode,
    model: Option<&dyn HistogramMarginals<P>>,
) -> Result<PopulationPrediction<P>> {
    let (fraction, values) = predict_one(h, m, mode, model)?;
    Ok(PopulationPrediction {
        mode,
        n: h.total(),
        m,
        sample_fraction: fraction.clone(),
        overall: values.clone(),
        groups: vec![GroupPrediction {
            id: "all".into(),
            n: h.total(),
            m,
            histogram: h.clone(),
            sample_fraction: fraction,
            values,
        }],
    })
}

/// Stratified prediction: each group predicted independently from its own
/// sample, combined with weights `m_g / m`.
pub fn grouped_prediction<P: Prob>(
    groups: &[GroupSample<P>],
    m: u64,
    mode: PredictionMode,
) -> Result<PopulationPrediction<P>> {
    let first = groups
        .first()
        .ok_or_else(|| Error::InvalidArgument("no groups".into()))?;
    let k = first.histogram.k();
    let total: u64 = groups.iter().map(|g| g.size).sum();
    if total != m {
        return Err(Error::InvalidArgument(format!(
            "group sizes sum to {total}, not the population size {m}"
        )));
    }
    let mut overall = vec![P::zero(); k];
    let mut out = Vec::with_capacity(groups.len());
    for g in groups {
        if g.histogram.k() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: g.histogram.k(),
            });
        }
        let model = g.model.as_ref().map(|m| m as &dyn HistogramMarginals<P>);
        let (fraction, values) = predict_one(&g.histogram, g.size, mode, model)?;
        let share = P::from_ratio(g.size, m);
        for (o, v) in overall.iter_mut().zip(values.probs()) {
            *o = o.clone() + share.clone() * v.clone();
        }
        out.push(GroupPrediction {
            id: g.id.clone(),
            n: g.histogram.total(),
            m: g.size,
            histogram: g.histogram.clone(),
            sample_fraction: fraction,
            values,
        });
    }
    let n: u64 = groups.iter().map(|g| g.histogram.total()).sum();
    Ok(PopulationPrediction {
        mode,
        n,
        m,
        sample_fraction: P::from_ratio(n, m),
        overall: LabelDistribution::new(overall)?,
        groups: out,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactRoutes<P> {
    pub predict_then_sum: LabelDistribution<P>,
    pub merge_then_predict: LabelDistribution<P>,
    pub coincide: bool,
}

/// The two ways of predicting merged labels.
#[derive(Debug, Clone, PartialEq)]
pub struct RouteComparison<P> {
    pub merged_histogram: Histogram,
    /// Add-one over the original k labels, summed within merge groups.
    pub predict_then_sum: LabelDistribution<P>,
    /// Add-one over the merged labels.
    pub merge_then_predict: LabelDistribution<P>,
    pub tv: P,
    pub exact: Option<ExactRoutes<P>>,
}

pub fn route_comparison<P: Prob>(
    h: &Histogram,
    merge: &LabelMerge,
    model: Option<&ExchangeableModel<P>>,
) -> Result<RouteComparison<P>> {
    let merged = merge_histogram(h, merge)?;
    let predict_then_sum = LabelDistribution::new(merge.sum_vector(ht_approx::<P>(h).probs())?)?;
    let merge_then_predict = ht_approx::<P>(&merged);
    let tv = tv_distance(&predict_then_sum, &merge_then_predict)?;
    let exact = model
        .map(|model| -> Result<ExactRoutes<P>> {
            let summed = LabelDistribution::new(merge.sum_vector(model.predictive_exact(h)?.probs())?)?;
            let direct = model.merge_model(merge)?.predictive_exact(&merged)?;
            let coincide = summed
                .probs()
                .iter()
                .zip(direct.probs())
                .all(|(a, b)| P::eq_tol(a, b));
            Ok(ExactRoutes {
                predict_then_sum: summed,
                merge_then_predict: direct,
                coincide,
            })
        })
        .transpose()?;
    Ok(RouteComparison {
        merged_histogram: merged,
        predict_then_sum,
        merge_then_predict,
        tv,
        exact,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ResolutionAdvice {
    /// `n < 9k`.
    pub under_powered: bool,
    /// `floor(n / 9)`, at least 1.
    pub recommended_k: u64,
}

pub fn resolution_advice(n: u64, k: usize) -> ResolutionAdvice {
    ResolutionAdvice {
        under_powered: n < 9 * k as u64,
        recommended_k: (n / 9).max(1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinat::histograms;
    use crate::model::{uniform_weights, weights_from_atoms, SimplexWeights};
    use crate::prob::Exact;
    use num_rational::BigRational;

    fn h(v: &[u64]) -> Histogram {
        Histogram::new(v.to_vec())
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn over(d: i64, v: &[i64]) -> LabelDistribution {
        LabelDistribution::new(v.iter().map(|&n| q(n, d)).collect()).unwrap()
    }

    fn likert() -> Histogram {
        h(&[3, 2, 0, 5, 0])
    }

    #[test]
    fn ht_population_likert() {
        let p = population_prediction::<Exact>(&likert(), 100, PredictionMode::HtApprox, None).unwrap();
        assert_eq!(p.overall, over(100, &[27, 20, 6, 41, 6]));
        assert_eq!(p.sample_fraction, q(1, 10));
        let f = population_prediction::<f64>(&likert(), 100, PredictionMode::HtApprox, None).unwrap();
        for (a, b) in f.overall.probs().iter().zip([0.27, 0.20, 0.06, 0.41, 0.06]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn census_returns_ml() {
        let s = likert();
        let g = ExchangeableModel::numbered(uniform_weights::<Exact>(10, 5).unwrap());
        for mode in [PredictionMode::HtApprox, PredictionMode::Exact] {
            let p = population_prediction(&s, 10, mode, Some(&g as &dyn HistogramMarginals<Exact>)).unwrap();
            assert_eq!(p.overall, ml_approx(&s).unwrap());
        }
    }

    #[test]
    fn exact_mode_goldstein() {
        let g = ExchangeableModel::numbered(
            weights_from_atoms(5, 2, vec![(h(&[5, 0]), q(1, 2)), (h(&[0, 5]), q(1, 2))], false).unwrap(),
        );
        let p = population_prediction(&h(&[2, 0]), 5, PredictionMode::Exact, Some(&g as &dyn HistogramMarginals<Exact>))
            .unwrap();
        assert_eq!(p.overall, over(1, &[1, 0]));
        let err = population_prediction(&h(&[1, 1]), 5, PredictionMode::Exact, Some(&g as &dyn HistogramMarginals<Exact>))
            .unwrap_err();
        assert_eq!(err, Error::ZeroProbabilitySample);
    }

    #[test]
    fn population_errors() {
        assert!(matches!(
            population_prediction::<Exact>(&likert(), 9, PredictionMode::HtApprox, None),
            Err(Error::SampleTooLarge { .. })
        ));
        assert!(matches!(
            population_prediction::<Exact>(&likert(), 100, PredictionMode::Exact, None),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn empty_sample_predicts_ht() {
        let p = population_prediction::<Exact>(&h(&[0, 0, 0]), 10, PredictionMode::HtApprox, None).unwrap();
        assert_eq!(p.overall, LabelDistribution::uniform(3));
    }

    #[test]
    fn prediction_lies_between_ml_and_ht() {
        for s in histograms(6, 3).filter(|s| s.total() > 0) {
            for m in [6u64, 7, 12, 600] {
                let p = population_prediction::<Exact>(&s, m, PredictionMode::HtApprox, None).unwrap();
                let fh: LabelDistribution = ml_approx(&s).unwrap();
                let ft: LabelDistribution = ht_approx(&s);
                for j in 0..3 {
                    let (a, b) = (fh.get(j), ft.get(j));
                    let lo = if a < b { a } else { b };
                    let hi = if a < b { b } else { a };
                    assert!(lo <= p.overall.get(j) && p.overall.get(j) <= hi);
                }
            }
        }
    }

    #[test]
    fn limits_in_sample_fraction() {
        // fixed h/n; n/m in {1, 0.5, 0.01}
        let s = h(&[6, 3, 1]);
        let fh: LabelDistribution = ml_approx(&s).unwrap();
        let ft: LabelDistribution = ht_approx(&s);
        let at = |m| population_prediction::<Exact>(&s, m, PredictionMode::HtApprox, None).unwrap().overall;
        assert_eq!(at(10), fh);
        let mid = at(20);
        for j in 0..3 {
            assert_eq!(mid.get(j).clone(), (fh.get(j) + ft.get(j)) / q(2, 1));
        }
        let far = at(1000);
        assert!(tv_distance(&far, &ft).unwrap() < tv_distance(&far, &fh).unwrap());
        assert!(tv_distance(&far, &ft).unwrap() <= q(1, 100));
    }

    #[test]
    fn grouped_examples() {
        let single = vec![GroupSample::<Exact> {
            id: "a".into(),
            size: 100,
            histogram: likert(),
            model: None,
        }];
        let g = grouped_prediction(&single, 100, PredictionMode::HtApprox).unwrap();
        let p = population_prediction::<Exact>(&likert(), 100, PredictionMode::HtApprox, None).unwrap();
        assert_eq!(g.overall, p.overall);

        let twins: Vec<GroupSample<Exact>> = ["a", "b"]
            .iter()
            .map(|id| GroupSample {
                id: id.to_string(),
                size: 50,
                histogram: likert(),
                model: None,
            })
            .collect();
        let g = grouped_prediction(&twins, 100, PredictionMode::HtApprox).unwrap();
        let p = population_prediction::<Exact>(&likert(), 50, PredictionMode::HtApprox, None).unwrap();
        assert_eq!(g.overall, p.overall);

        let strat = vec![
            GroupSample::<Exact> {
                id: "a".into(),
                size: 60,
                histogram: likert(),
                model: None,
            },
            GroupSample {
                id: "b".into(),
                size: 40,
                histogram: h(&[1, 1, 1, 1, 1]),
                model: None,
            },
        ];
        let g = grouped_prediction(&strat, 100, PredictionMode::HtApprox).unwrap();
        // (3/5)(49/180) + (2/5)(1/5) = 73/300 = 0.24333...
        assert_eq!(*g.overall.get(0), q(73, 300));
        assert_eq!(g.groups.len(), 2);
        assert_eq!(g.n, 15);

        assert!(grouped_prediction(&strat, 99, PredictionMode::HtApprox).is_err());
        let mixed = vec![
            strat[0].clone(),
            GroupSample {
                id: "c".into(),
                size: 40,
                histogram: h(&[1, 1]),
                model: None,
            },
        ];
        assert!(matches!(
            grouped_prediction(&mixed, 100, PredictionMode::HtApprox),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn grouped_exact_single_group_matches_population() {
        let model = ExchangeableModel::numbered(SimplexWeights::<Exact>::uniform(12, 3).unwrap());
        let s = h(&[2, 1, 0]);
        let groups = vec![GroupSample {
            id: "only".into(),
            size: 12,
            histogram: s.clone(),
            model: Some(model.clone()),
        }];
        let g = grouped_prediction(&groups, 12, PredictionMode::Exact).unwrap();
        let p = population_prediction(&s, 12, PredictionMode::Exact, Some(&model as &dyn HistogramMarginals<Exact>)).unwrap();
        assert_eq!(g.overall, p.overall);
    }

    #[test]
    fn route_comparison_questionnaire() {
        // labels (a, b) for a in 1..=3, b in 1..=2, merged onto a
        let merge = LabelMerge::new(vec![0, 0, 1, 1, 2, 2]).unwrap();
        let s = h(&[2, 1, 0, 1, 1, 0]);
        let r = route_comparison::<Exact>(&s, &merge, None).unwrap();
        assert_eq!(r.predict_then_sum, over(11, &[5, 3, 3]));
        assert_eq!(r.merge_then_predict, over(4, &[2, 1, 1]));
        assert_eq!(r.tv, q(1, 22));
        assert!(r.exact.is_none());

        let id = route_comparison::<Exact>(&s, &LabelMerge::identity(6), None).unwrap();
        assert_eq!(id.predict_then_sum, id.merge_then_predict);
        assert_eq!(id.tv, q(0, 1));
    }

    #[test]
    fn exact_routes_under_dirichlet_type_priors() {
        let merge = LabelMerge::new(vec![0, 1, 1]).unwrap();
        let uniform = ExchangeableModel::numbered(uniform_weights(5, 3).unwrap());
        let r = route_comparison(&h(&[1, 0, 1]), &merge, Some(&uniform)).unwrap();
        let exact = r.exact.unwrap();
        assert!(exact.coincide);
        assert_eq!(exact.predict_then_sum, over(5, &[2, 3]));
    }

    #[test]
    fn exact_routes_condition_on_different_samples() {
        // the fine sample rules out every urn but (3,1,1); the merged sample
        // (1,1) does not distinguish (3,1,1) from (2,3,0)
        let model = ExchangeableModel::numbered(
            weights_from_atoms(
                5,
                3,
                vec![(h(&[3, 1, 1]), q(1, 2)), (h(&[0, 0, 5]), q(1, 4)), (h(&[2, 3, 0]), q(1, 4))],
                false,
            )
            .unwrap(),
        );
        let merge = LabelMerge::new(vec![0, 1, 1]).unwrap();
        let r = route_comparison(&h(&[1, 0, 1]), &merge, Some(&model)).unwrap();
        let exact = r.exact.unwrap();
        assert!(!exact.coincide);
        assert_eq!(exact.predict_then_sum, over(3, &[2, 1]));
        assert_eq!(exact.merge_then_predict, over(9, &[5, 4]));
    }

    #[test]
    fn resolution_examples() {
        assert!(!resolution_advice(90, 10).under_powered);
        assert!(resolution_advice(50, 10).under_powered);
        assert_eq!(resolution_advice(1000, 5).recommended_k, 111);
        assert_eq!(resolution_advice(4, 5).recommended_k, 1);
        assert_eq!(resolution_advice(0, 1).recommended_k, 1);
    }
}
