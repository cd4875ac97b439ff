//! Slot accuracy over a fixed ontology of domain-slot pairs.

use super::MetricError;
use crate::model::{project_pairs, set_difference, BeliefState, Ontology};

/// Distinct slot errors at one turn: `|X| + |Y| - |P ∩ Q|`, where `X` are
/// false negatives, `Y` false positives and `P`, `Q` their domain-slot pairs.
/// A wrong value on one pair shows up in both `X` and `Y` and is counted once.
pub fn slot_errors(gt: &BeliefState, pred: &BeliefState) -> usize {
    let missed = set_difference(gt, pred);
    let spurious = set_difference(pred, gt);
    let missed_pairs = project_pairs(&missed);
    let spurious_pairs = project_pairs(&spurious);
    let conflicts = missed_pairs.intersection(&spurious_pairs).count();
    missed.len() + spurious.len() - conflicts
}

pub fn slot_accuracy_turn(
    gt: &BeliefState,
    pred: &BeliefState,
    ont: &Ontology,
) -> Result<f64, MetricError> {
    let slots = ont.len();
    if slots == 0 {
        return Err(MetricError::OntologyEmpty);
    }
    let errors = slot_errors(gt, pred);
    if errors > slots {
        return Err(MetricError::SlotOverflow {
            errors,
            slots,
            location: String::new(),
        });
    }
    Ok((slots - errors) as f64 / slots as f64)
}
