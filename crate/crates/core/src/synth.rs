//! Seeded synthetic corpora with controllable prediction errors.
//!
//! Ground truth is built as a cumulative domain-slot assignment with optional
//! value overwrites. Predictions are derived turn by turn from the ground-truth
//! changes (dropping, corrupting or inventing assignments) and then
//! accumulated, so a mistake persists in later turns the way it does in real
//! tracker output.
//!
//! Each conversation draws from its own ChaCha stream (`seed`, stream =
//! conversation index), so output does not depend on generation order.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{BeliefState, Conversation, DomainSlot, Ontology, Triplet, Turn};

pub mod oracle;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("invalid synthetic config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    pub conversations: usize,
    pub turns_per_conversation: RangeInclusive<usize>,
    pub domains: usize,
    pub slots_per_domain: usize,
    pub values_per_slot: usize,
    /// Probability that a turn's own prediction is corrupted.
    pub p_type1: f64,
    /// Probability that a new ground-truth assignment is left out.
    pub p_drop: f64,
    /// Probability that a turn adds an assignment the user never made.
    pub p_spurious: f64,
    /// Probability that a ground-truth turn overwrites an existing value.
    pub p_overwrite: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 0,
            conversations: 100,
            turns_per_conversation: 1..=10,
            domains: 5,
            slots_per_domain: 6,
            values_per_slot: 8,
            p_type1: 0.1,
            p_drop: 0.05,
            p_spurious: 0.05,
            p_overwrite: 0.1,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let probs = [
            ("p_type1", self.p_type1),
            ("p_drop", self.p_drop),
            ("p_spurious", self.p_spurious),
            ("p_overwrite", self.p_overwrite),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(SynthError::Config(format!(
                    "{name} = {p} is outside [0, 1]"
                )));
            }
        }
        if self.conversations == 0 {
            return Err(SynthError::Config("conversations must be positive".into()));
        }
        let (lo, hi) = (
            *self.turns_per_conversation.start(),
            *self.turns_per_conversation.end(),
        );
        if lo == 0 || lo > hi {
            return Err(SynthError::Config(format!(
                "turn range {lo}..={hi} must be non-empty and start at 1 or more"
            )));
        }
        if self.domains == 0 || self.slots_per_domain == 0 || self.values_per_slot == 0 {
            return Err(SynthError::Config(
                "vocabulary sizes must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Every domain-slot pair the generator can emit.
    pub fn ontology(&self) -> Ontology {
        Ontology::new(self.pairs()).expect("validated vocabulary is non-empty")
    }

    fn pairs(&self) -> Vec<DomainSlot> {
        (0..self.domains)
            .flat_map(|d| {
                (0..self.slots_per_domain)
                    .map(move |s| DomainSlot::new(format!("d{d}"), format!("s{s}")))
            })
            .collect()
    }
}

pub fn generate(config: &SynthConfig) -> Result<Vec<Conversation>, SynthError> {
    config.validate()?;
    Ok((0..config.conversations)
        .map(|i| {
            let mut rng = conversation_rng(config.seed, i);
            let n_turns = rng.random_range(config.turns_per_conversation.clone());
            generate_conversation(config, i, n_turns, &mut rng)
        })
        .collect())
}

/// Like [`generate`], but with explicit turn counts; `lengths.len()` overrides
/// `config.conversations` and the turn range is ignored.
pub fn generate_with_lengths(
    config: &SynthConfig,
    lengths: &[usize],
) -> Result<Vec<Conversation>, SynthError> {
    let config = SynthConfig {
        conversations: lengths.len(),
        turns_per_conversation: 1..=1,
        ..config.clone()
    };
    config.validate()?;
    if lengths.contains(&0) {
        return Err(SynthError::Config(
            "conversation lengths must be positive".into(),
        ));
    }
    Ok(lengths
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let mut rng = conversation_rng(config.seed, i);
            generate_conversation(&config, i, n, &mut rng)
        })
        .collect())
}

/// Rewrites predictions so that exactly `m1` turns of the corpus match the
/// ground truth. The remaining turns each get one spurious triplet that is not
/// carried into later turns.
pub fn with_exact_count(
    convs: &[Conversation],
    m1: usize,
    seed: u64,
) -> Result<Vec<Conversation>, SynthError> {
    let total: usize = convs.iter().map(Conversation::len).sum();
    if m1 > total {
        return Err(SynthError::Config(format!(
            "cannot force {m1} exact turns in a corpus of {total}"
        )));
    }
    let mut positions: Vec<(usize, usize)> = convs
        .iter()
        .enumerate()
        .flat_map(|(c, conv)| (0..conv.len()).map(move |t| (c, t)))
        .collect();
    positions.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let broken: std::collections::BTreeSet<_> = positions[m1..].iter().copied().collect();
    let marker = Triplet::new("forced", "mismatch", "yes").expect("non-empty tokens");

    Ok(convs
        .iter()
        .enumerate()
        .map(|(c, conv)| {
            let turns = conv
                .turns()
                .iter()
                .map(|turn| {
                    let mut prediction = turn.ground_truth.clone();
                    if broken.contains(&(c, turn.turn_index)) {
                        prediction.insert(marker.clone());
                    }
                    Turn {
                        prediction,
                        ..turn.clone()
                    }
                })
                .collect();
            Conversation::new(conv.id(), turns).expect("indices are preserved")
        })
        .collect())
}

fn conversation_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

type Assignment = BTreeMap<usize, usize>;

fn to_state(assignment: &Assignment, pairs: &[DomainSlot]) -> BeliefState {
    assignment
        .iter()
        .map(|(&p, &v)| {
            let pair = &pairs[p];
            Triplet::new(pair.domain.clone(), pair.slot.clone(), format!("v{v}"))
                .expect("generated tokens are non-empty")
        })
        .collect()
}

fn other_value(rng: &mut ChaCha8Rng, current: usize, values: usize) -> usize {
    if values < 2 {
        return current;
    }
    let v = rng.random_range(0..values - 1);
    if v >= current {
        v + 1
    } else {
        v
    }
}

fn generate_conversation(
    config: &SynthConfig,
    index: usize,
    n_turns: usize,
    rng: &mut ChaCha8Rng,
) -> Conversation {
    let pairs = config.pairs();
    let values = config.values_per_slot;
    let mut gt: Assignment = BTreeMap::new();
    let mut pred: Assignment = BTreeMap::new();
    let mut turns = Vec::with_capacity(n_turns);

    for t in 0..n_turns {
        // Ground-truth changes for this turn: (pair, value).
        let mut changes: Vec<(usize, usize)> = Vec::new();
        if !gt.is_empty() && rng.random_bool(config.p_overwrite) {
            let assigned: Vec<usize> = gt.keys().copied().collect();
            let &pair = assigned.choose(rng).expect("non-empty");
            changes.push((pair, other_value(rng, gt[&pair], values)));
        }
        let new_intents = rng.random_range(if t == 0 { 1..=2 } else { 0..=2 });
        let mut free: Vec<usize> = (0..pairs.len()).filter(|p| !gt.contains_key(p)).collect();
        for _ in 0..new_intents {
            if free.is_empty() {
                break;
            }
            let pair = free.swap_remove(rng.random_range(0..free.len()));
            changes.push((pair, rng.random_range(0..values)));
        }
        gt.extend(changes.iter().copied());

        let corrupt = rng.random_bool(config.p_type1);
        let mut pred_changes: Vec<(usize, usize)> = Vec::new();
        let corrupted = if corrupt && !changes.is_empty() {
            Some(rng.random_range(0..changes.len()))
        } else {
            None
        };
        for (i, &(pair, value)) in changes.iter().enumerate() {
            if Some(i) == corrupted {
                pred_changes.push((pair, other_value(rng, value, values)));
            } else if !rng.random_bool(config.p_drop) {
                pred_changes.push((pair, value));
            }
        }
        if corrupt && changes.is_empty() {
            let pair = rng.random_range(0..pairs.len());
            pred_changes.push((pair, rng.random_range(0..values)));
        }
        if rng.random_bool(config.p_spurious) {
            let pair = rng.random_range(0..pairs.len());
            pred_changes.push((pair, rng.random_range(0..values)));
        }
        pred.extend(pred_changes);

        turns.push(Turn {
            turn_index: t,
            ground_truth: to_state(&gt, &pairs),
            prediction: to_state(&pred, &pairs),
            system_utterance: (t > 0).then(|| format!("system utterance {t}")),
            user_utterance: Some(format!("user utterance {t}")),
        });
    }
    Conversation::new(format!("synth-{}-{index:05}", config.seed), turns)
        .expect("turns are indexed by position")
}
