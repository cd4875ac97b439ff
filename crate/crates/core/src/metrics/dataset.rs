//! Corpus-level aggregation.
//!
//! Conversations are scored independently (optionally on the rayon pool) and
//! their tallies are folded in input order, so parallel and sequential runs
//! produce bit-identical results.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{aga_counts, slot_errors, Lambda, MetricError, TurnClass, TurnClassifier};
use crate::model::{Conversation, NormalizationPolicy, Ontology};
use crate::sum::CompensatedSum;

#[derive(Debug, Clone)]
pub struct MetricConfig {
    pub lambdas: Vec<Lambda>,
    pub policy: NormalizationPolicy,
    /// Required for slot accuracy; without it SA is reported as unavailable.
    pub ontology: Option<Ontology>,
    pub parallel: bool,
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig {
            lambdas: MetricConfig::default_lambdas(),
            policy: NormalizationPolicy::default(),
            ontology: None,
            parallel: true,
        }
    }
}

impl MetricConfig {
    pub fn default_lambdas() -> Vec<Lambda> {
        [0.25, 0.5, 0.75, 1.0]
            .into_iter()
            .map(|v| Lambda::new(v).expect("non-negative literal"))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMetrics {
    pub n_conversations: usize,
    pub n_turns: usize,
    /// Exact-match turns.
    pub m1: usize,
    /// Locally correct turns.
    pub m2: usize,
    pub jga: f64,
    pub sa: Option<f64>,
    pub aga: Option<f64>,
    pub aga_jaccard: Option<f64>,
    pub fga: Vec<(Lambda, f64)>,
    /// Turns without any non-empty ground-truth value, skipped by AGA.
    pub ignored_turns: usize,
}

impl DatasetMetrics {
    pub fn fga_at(&self, lam: Lambda) -> Option<f64> {
        self.fga.iter().find(|(l, _)| *l == lam).map(|(_, v)| *v)
    }

    pub fn turn_level_accuracy(&self) -> f64 {
        self.m2 as f64 / self.n_turns as f64
    }
}

#[derive(Debug, Clone, Default)]
struct Tally {
    turns: usize,
    m1: usize,
    m2: usize,
    slot_errors: usize,
    aga_hits: usize,
    aga_relevant: usize,
    jaccard_hits: usize,
    jaccard_union: usize,
    ignored: usize,
    fga_sums: Vec<f64>,
}

fn tally_conversation(conv: &Conversation, config: &MetricConfig) -> Result<Tally, MetricError> {
    let mut tally = Tally {
        turns: conv.len(),
        fga_sums: Vec::with_capacity(config.lambdas.len()),
        ..Default::default()
    };
    let mut sums = vec![CompensatedSum::new(); config.lambdas.len()];
    for (turn, verdict) in conv.turns().iter().zip(TurnClassifier::new(conv)) {
        if verdict.class == TurnClass::ExactMatch {
            tally.m1 += 1;
        }
        if verdict.local_match {
            tally.m2 += 1;
        }
        for (sum, lam) in sums.iter_mut().zip(&config.lambdas) {
            sum.add(verdict.weight(*lam));
        }

        if let Some(ont) = &config.ontology {
            let errors = slot_errors(&turn.ground_truth, &turn.prediction);
            if errors > ont.len() {
                return Err(MetricError::SlotOverflow {
                    errors,
                    slots: ont.len(),
                    location: format!(" in {:?} turn {}", conv.id(), turn.turn_index),
                });
            }
            tally.slot_errors += errors;
        }

        let counts = aga_counts(&turn.ground_truth, &turn.prediction, &config.policy);
        if counts.relevant == 0 {
            tally.ignored += 1;
        } else {
            tally.aga_hits += counts.hits;
            tally.aga_relevant += counts.relevant;
        }
        tally.jaccard_hits += counts.hits;
        tally.jaccard_union += counts.union;
    }
    tally.fga_sums = sums.iter().map(CompensatedSum::value).collect();
    Ok(tally)
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn evaluate_dataset(
    convs: &[Conversation],
    config: &MetricConfig,
) -> Result<DatasetMetrics, MetricError> {
    if convs.is_empty() {
        return Err(MetricError::EmptyDataset);
    }
    if config.lambdas.is_empty() {
        return Err(MetricError::NoLambdas);
    }
    let tallies: Vec<Tally> = if config.parallel {
        convs
            .par_iter()
            .map(|c| tally_conversation(c, config))
            .collect::<Result<_, _>>()?
    } else {
        convs
            .iter()
            .map(|c| tally_conversation(c, config))
            .collect::<Result<_, _>>()?
    };

    let mut total = Tally::default();
    let mut fga = vec![CompensatedSum::new(); config.lambdas.len()];
    for t in &tallies {
        total.turns += t.turns;
        total.m1 += t.m1;
        total.m2 += t.m2;
        total.slot_errors += t.slot_errors;
        total.aga_hits += t.aga_hits;
        total.aga_relevant += t.aga_relevant;
        total.jaccard_hits += t.jaccard_hits;
        total.jaccard_union += t.jaccard_union;
        total.ignored += t.ignored;
        for (acc, v) in fga.iter_mut().zip(&t.fga_sums) {
            acc.add(*v);
        }
    }

    let n = total.turns as f64;
    let sa = config.ontology.as_ref().map(|ont| {
        let capacity = ont.len() * total.turns;
        (capacity - total.slot_errors) as f64 / capacity as f64
    });
    Ok(DatasetMetrics {
        n_conversations: convs.len(),
        n_turns: total.turns,
        m1: total.m1,
        m2: total.m2,
        jga: total.m1 as f64 / n,
        sa,
        aga: ratio(total.aga_hits, total.aga_relevant),
        aga_jaccard: ratio(total.jaccard_hits, total.jaccard_union),
        fga: config
            .lambdas
            .iter()
            .zip(&fga)
            .map(|(lam, sum)| (*lam, sum.value() / n))
            .collect(),
        ignored_turns: total.ignored,
    })
}
