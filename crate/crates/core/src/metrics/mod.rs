//! Metric kernels: joint goal accuracy, slot accuracy, the two average goal
//! accuracy variants and flexible goal accuracy, plus dataset aggregation.

mod aga;
mod dataset;
mod fga;
mod slot;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::BeliefState;

pub use aga::{aga_counts, aga_turn, aga_turn_jaccard, AgaCounts};
pub use dataset::{evaluate_dataset, DatasetMetrics, MetricConfig};
pub use fga::{
    classify_turns, fga_conversation, fga_sum, fga_weight, local_match, turn_delta, Distance,
    TurnClass, TurnClassifier, TurnVerdict,
};
pub use slot::{slot_accuracy_turn, slot_errors};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("lambda must be a finite non-negative number, got {0}")]
    InvalidLambda(f64),
    #[error("forgetting horizon must be at least one turn, got {0}")]
    InvalidHorizon(u32),
    #[error("forgetting factor must lie in [0, 1), got {0}")]
    InvalidFactor(f64),
    #[error("ontology is empty")]
    OntologyEmpty,
    #[error("{errors} slot errors exceed the {slots} ontology pairs{location}")]
    SlotOverflow {
        errors: usize,
        slots: usize,
        location: String,
    },
    #[error("no conversations to evaluate")]
    EmptyDataset,
    #[error("at least one lambda is required")]
    NoLambdas,
}

/// Strictness of flexible goal accuracy. Zero is strict (joint goal accuracy),
/// larger values forgive propagated errors faster.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Lambda(f64);

impl Lambda {
    pub const ZERO: Lambda = Lambda(0.0);

    pub fn new(value: f64) -> Result<Self, MetricError> {
        if value.is_finite() && value >= 0.0 {
            // normalizes -0.0
            Ok(Lambda(value + 0.0))
        } else {
            Err(MetricError::InvalidLambda(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Lambda {
    type Error = MetricError;

    fn try_from(value: f64) -> Result<Self, Self::Error> {
        Lambda::new(value)
    }
}

impl From<Lambda> for f64 {
    fn from(lam: Lambda) -> f64 {
        lam.0
    }
}

impl fmt::Display for Lambda {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::str::FromStr for Lambda {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let value: f64 = s
            .trim()
            .parse()
            .map_err(|_| format!("{s:?} is not a number"))?;
        Lambda::new(value).map_err(|e| e.to_string())
    }
}

/// Decay rate that forgets a mistake by factor `p` after `horizon` turns:
/// `-ln(1 - p) / horizon`.
pub fn lambda_from_forgetting(horizon: u32, p: f64) -> Result<Lambda, MetricError> {
    if horizon < 1 {
        return Err(MetricError::InvalidHorizon(horizon));
    }
    if !(0.0..1.0).contains(&p) {
        return Err(MetricError::InvalidFactor(p));
    }
    Lambda::new(-(-p).ln_1p() / f64::from(horizon))
}

pub fn exact_match(gt: &BeliefState, pred: &BeliefState) -> bool {
    gt == pred
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Triplet;

    #[test]
    fn lambda_rejects_negative_and_nan() {
        assert!(Lambda::new(-0.1).is_err());
        assert!(Lambda::new(f64::NAN).is_err());
        assert!(Lambda::new(f64::INFINITY).is_err());
        assert_eq!(
            Lambda::new(-0.0).unwrap().value().to_bits(),
            0.0f64.to_bits()
        );
        assert_eq!("0.5".parse::<Lambda>().unwrap().value(), 0.5);
        assert!("-1".parse::<Lambda>().is_err());
    }

    #[test]
    fn forgetting_rate_matches_worked_value() {
        let lam = lambda_from_forgetting(6, 0.95).unwrap();
        assert!((lam.value() - 0.4993).abs() < 5e-4);
        assert_eq!(format!("{:.3}", lam.value()), "0.499");
    }

    #[test]
    fn forgetting_rate_edges() {
        assert_eq!(lambda_from_forgetting(9, 0.0).unwrap().value(), 0.0);
        let lam = lambda_from_forgetting(1, 1.0 - (-1.0f64).exp()).unwrap();
        assert!((lam.value() - 1.0).abs() < 1e-12);
        assert!(matches!(
            lambda_from_forgetting(6, 1.0),
            Err(MetricError::InvalidFactor(_))
        ));
        assert!(matches!(
            lambda_from_forgetting(0, 0.5),
            Err(MetricError::InvalidHorizon(0))
        ));
        assert!(lambda_from_forgetting(3, -0.1).is_err());
    }

    #[test]
    fn exact_match_is_set_equality() {
        let a: BeliefState = [Triplet::new("h", "a", "c").unwrap()].into_iter().collect();
        assert!(exact_match(&a, &a.clone()));
        assert!(!exact_match(&a, &BeliefState::new()));
    }
}
