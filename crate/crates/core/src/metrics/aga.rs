//! Average goal accuracy: recall over non-empty ground-truth triplets, and a
//! Jaccard variant that also penalizes extraneous predictions.

use crate::model::{BeliefState, NormalizationPolicy, Triplet};

/// Integer tallies behind both AGA variants for a single turn.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AgaCounts {
    /// `|N_t ∩ pred|`
    pub hits: usize,
    /// `|N_t|`
    pub relevant: usize,
    /// `|N_t ∪ pred|`
    pub union: usize,
}

pub fn aga_counts(gt: &BeliefState, pred: &BeliefState, policy: &NormalizationPolicy) -> AgaCounts {
    let non_empty = |t: &&Triplet| !policy.is_empty_value(&t.value);
    let relevant = gt.iter().filter(non_empty).count();
    let hits = gt
        .iter()
        .filter(non_empty)
        .filter(|t| pred.contains(t))
        .count();
    AgaCounts {
        hits,
        relevant,
        union: relevant + pred.len() - hits,
    }
}

/// `|N_t ∩ pred| / |N_t|`, or `None` for a turn with no non-empty gt values.
pub fn aga_turn(gt: &BeliefState, pred: &BeliefState, policy: &NormalizationPolicy) -> Option<f64> {
    let c = aga_counts(gt, pred, policy);
    (c.relevant > 0).then(|| c.hits as f64 / c.relevant as f64)
}

/// `|N_t ∩ pred| / |N_t ∪ pred|`, or `None` when both sets are empty.
pub fn aga_turn_jaccard(
    gt: &BeliefState,
    pred: &BeliefState,
    policy: &NormalizationPolicy,
) -> Option<f64> {
    let c = aga_counts(gt, pred, policy);
    (c.union > 0).then(|| c.hits as f64 / c.union as f64)
}
