//! Flexible goal accuracy.
//!
//! Every mismatched turn is classified as either a type-1 error (the turn's
//! own new intents are wrong) or a type-2 error (the turn is locally correct
//! and only carries an earlier mistake forward). Type-2 turns earn partial
//! credit `1 - exp(-λ·x)`, where `x` is the distance to the most recent type-1
//! turn.

use std::num::NonZeroUsize;

use serde::{Deserialize, Serialize};

use super::{exact_match, Lambda};
use crate::model::{set_difference, BeliefState, Conversation, Turn};
use crate::sum::CompensatedSum;

/// Intents introduced at this turn: `current \ previous`.
pub fn turn_delta(current: &BeliefState, previous: &BeliefState) -> BeliefState {
    set_difference(current, previous)
}

/// Local (turn-level) correctness. At `t = 0` this is exact match; afterwards
/// the predicted turn delta must lie inside the ground truth and the
/// ground-truth turn delta inside the prediction.
pub fn local_match(
    t: usize,
    gt_cur: &BeliefState,
    pred_cur: &BeliefState,
    gt_prev: &BeliefState,
    pred_prev: &BeliefState,
) -> bool {
    if t == 0 {
        return exact_match(gt_cur, pred_cur);
    }
    let gt_delta = turn_delta(gt_cur, gt_prev);
    let pred_delta = turn_delta(pred_cur, pred_prev);
    pred_delta.is_subset(gt_cur) && gt_delta.is_subset(pred_cur)
}

/// Turns between a type-2 error and the type-1 error that caused it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distance {
    Bounded(NonZeroUsize),
    /// No type-1 error has happened yet in the conversation.
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TurnClass {
    ExactMatch,
    Type1,
    Type2(Distance),
}

impl TurnClass {
    pub fn short_label(&self) -> &'static str {
        match self {
            TurnClass::ExactMatch => "E",
            TurnClass::Type1 => "1",
            TurnClass::Type2(_) => "2",
        }
    }
}

/// `1 - exp(-λ·x)`; zero whenever λ is zero, one for an unbounded distance.
pub fn fga_weight(distance: Distance, lam: Lambda) -> f64 {
    if lam.value() == 0.0 {
        return 0.0;
    }
    match distance {
        Distance::Unbounded => 1.0,
        Distance::Bounded(x) => -(-lam.value() * x.get() as f64).exp_m1(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TurnVerdict {
    pub turn_index: usize,
    pub class: TurnClass,
    pub local_match: bool,
    /// Most recent type-1 turn at or before this one.
    pub active_t_err: Option<usize>,
}

impl TurnVerdict {
    pub fn weight(&self, lam: Lambda) -> f64 {
        match self.class {
            TurnClass::ExactMatch => 1.0,
            TurnClass::Type1 => 0.0,
            TurnClass::Type2(distance) => fga_weight(distance, lam),
        }
    }
}

/// Single pass over a conversation, carrying only the last type-1 index.
pub struct TurnClassifier<'a> {
    turns: std::slice::Iter<'a, Turn>,
    previous: Option<&'a Turn>,
    last_type1: Option<usize>,
}

impl<'a> TurnClassifier<'a> {
    pub fn new(conv: &'a Conversation) -> Self {
        TurnClassifier {
            turns: conv.turns().iter(),
            previous: None,
            last_type1: None,
        }
    }
}

impl Iterator for TurnClassifier<'_> {
    type Item = TurnVerdict;

    fn next(&mut self) -> Option<TurnVerdict> {
        let turn = self.turns.next()?;
        let t = turn.turn_index;
        let empty = BeliefState::new();
        let (gt_prev, pred_prev) = match self.previous {
            Some(prev) => (&prev.ground_truth, &prev.prediction),
            None => (&empty, &empty),
        };
        let local = local_match(t, &turn.ground_truth, &turn.prediction, gt_prev, pred_prev);
        let class = if exact_match(&turn.ground_truth, &turn.prediction) {
            TurnClass::ExactMatch
        } else if !local {
            self.last_type1 = Some(t);
            TurnClass::Type1
        } else {
            let distance = match self.last_type1 {
                Some(t_err) => Distance::Bounded(
                    NonZeroUsize::new(t - t_err).expect("type-1 turn precedes current turn"),
                ),
                None => Distance::Unbounded,
            };
            TurnClass::Type2(distance)
        };
        self.previous = Some(turn);
        Some(TurnVerdict {
            turn_index: t,
            class,
            local_match: local,
            active_t_err: self.last_type1,
        })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        self.turns.size_hint()
    }
}

pub fn classify_turns(conv: &Conversation) -> Vec<TurnClass> {
    TurnClassifier::new(conv).map(|v| v.class).collect()
}

/// Sum of per-turn weights; the numerator of the conversation's score.
pub fn fga_sum(conv: &Conversation, lam: Lambda) -> f64 {
    TurnClassifier::new(conv)
        .map(|v| v.weight(lam))
        .collect::<CompensatedSum>()
        .value()
}

pub fn fga_conversation(conv: &Conversation, lam: Lambda) -> f64 {
    fga_sum(conv, lam) / conv.len() as f64
}
