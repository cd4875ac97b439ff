//! Brute-force flexible goal accuracy used to cross-check the streaming
//! classifier.
//!
//! Nothing is carried between turns: each turn recomputes its own
//! turn-level sets from the raw states and rescans the whole prefix for the
//! latest type-1 turn.

use crate::metrics::Lambda;
use crate::model::{Conversation, Turn};

fn exact(turn: &Turn) -> bool {
    turn.ground_truth.len() == turn.prediction.len()
        && turn
            .ground_truth
            .iter()
            .all(|x| turn.prediction.contains(x))
}

fn locally_correct(turns: &[Turn], t: usize) -> bool {
    if t == 0 {
        return exact(&turns[0]);
    }
    let (prev, cur) = (&turns[t - 1], &turns[t]);
    let gt_new_in_pred = cur
        .ground_truth
        .iter()
        .filter(|x| !prev.ground_truth.contains(x))
        .all(|x| cur.prediction.contains(x));
    let pred_new_in_gt = cur
        .prediction
        .iter()
        .filter(|x| !prev.prediction.contains(x))
        .all(|x| cur.ground_truth.contains(x));
    gt_new_in_pred && pred_new_in_gt
}

fn is_type1(turns: &[Turn], t: usize) -> bool {
    !exact(&turns[t]) && !locally_correct(turns, t)
}

/// Per-turn weights recomputed from scratch.
pub fn oracle_weights(conv: &Conversation, lam: Lambda) -> Vec<f64> {
    let turns = conv.turns();
    let lam = lam.value();
    (0..turns.len())
        .map(|t| {
            if exact(&turns[t]) {
                return 1.0;
            }
            if is_type1(turns, t) {
                return 0.0;
            }
            let last_type1 = (0..t).rev().find(|&j| is_type1(turns, j));
            match last_type1 {
                _ if lam == 0.0 => 0.0,
                Some(j) => 1.0 - (-lam * (t - j) as f64).exp(),
                None => 1.0,
            }
        })
        .collect()
}

pub fn oracle_fga(conv: &Conversation, lam: Lambda) -> f64 {
    let weights = oracle_weights(conv, lam);
    weights.iter().sum::<f64>() / weights.len() as f64
}
