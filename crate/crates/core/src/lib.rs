//! Exact predictive and population inference for finite exchangeable
//! sequences over a finite label set.
//!
//! An exchangeable model on `m` items with `k` labels is a probability vector
//! over the `C(m+k-1, k-1)` possible population histograms. Every marginal,
//! predictive and population quantity follows from those weights through
//! mixtures of multivariate hypergeometric draws. This crate computes them
//! exactly (arbitrary-precision rationals) or in log-space floats. It also
//! provides the add-one (HT) approximation with its total-variation
//! certificates and a brute-force oracle that checks all of the above on
//! small instances.

pub mod approx;
pub mod combinat;
pub mod error;
pub mod model;
pub mod oracle;
pub mod population;
pub mod prob;

pub use approx::{ApproxReport, BoundCheck, Extended};
pub use combinat::{Histogram, LabelMerge, LabelSet};
pub use error::{Error, Result};
pub use model::{ExchangeableModel, LabelDistribution, MarginalTower, PriorAtomsFile, SimplexWeights};
pub use prob::{Exact, NumericMode, Prob};
