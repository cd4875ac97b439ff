//! Belief-state domain types and the set algebra the metric kernels share.
//!
//! A [`BeliefState`] is a set of `(domain, slot, value)` [`Triplet`]s. Sets are
//! backed by `BTreeSet` so iteration order (and therefore every serialized
//! artifact) is deterministic.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("empty {field} in triplet ({domain:?}, {slot:?}, {value:?}) after normalization")]
    EmptyField {
        field: &'static str,
        domain: String,
        slot: String,
        value: String,
    },
    #[error("ontology must contain at least one domain-slot pair")]
    EmptyOntology,
    #[error("conversation {id:?} has no turns")]
    EmptyConversation { id: String },
    #[error("conversation {id:?}: turn at position {position} has index {found}")]
    TurnIndex {
        id: String,
        position: usize,
        found: usize,
    },
}

/// One `(domain, slot, value)` intent.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Triplet {
    pub domain: String,
    pub slot: String,
    pub value: String,
}

impl Triplet {
    /// Builds a triplet from already-normalized tokens.
    pub fn new(
        domain: impl Into<String>,
        slot: impl Into<String>,
        value: impl Into<String>,
    ) -> Result<Self, ModelError> {
        let triplet = Triplet {
            domain: domain.into(),
            slot: slot.into(),
            value: value.into(),
        };
        triplet.check()?;
        Ok(triplet)
    }

    fn check(&self) -> Result<(), ModelError> {
        let field = if self.domain.is_empty() {
            "domain"
        } else if self.slot.is_empty() {
            "slot"
        } else if self.value.is_empty() {
            "value"
        } else {
            return Ok(());
        };
        Err(ModelError::EmptyField {
            field,
            domain: self.domain.clone(),
            slot: self.slot.clone(),
            value: self.value.clone(),
        })
    }

    pub fn pair(&self) -> DomainSlot {
        DomainSlot {
            domain: self.domain.clone(),
            slot: self.slot.clone(),
        }
    }
}

impl fmt::Display for Triplet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.domain, self.slot, self.value)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DomainSlot {
    pub domain: String,
    pub slot: String,
}

impl DomainSlot {
    pub fn new(domain: impl Into<String>, slot: impl Into<String>) -> Self {
        DomainSlot {
            domain: domain.into(),
            slot: slot.into(),
        }
    }
}

impl fmt::Display for DomainSlot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.domain, self.slot)
    }
}

/// A set of triplets: either a cumulative ground-truth state or a prediction.
///
/// Several values for the same domain-slot pair are representable; nothing
/// here enforces one value per pair.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct BeliefState {
    triplets: BTreeSet<Triplet>,
}

impl BeliefState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a triplet, returning `false` if it was already present.
    pub fn insert(&mut self, triplet: Triplet) -> bool {
        self.triplets.insert(triplet)
    }

    pub fn remove(&mut self, triplet: &Triplet) -> bool {
        self.triplets.remove(triplet)
    }

    pub fn contains(&self, triplet: &Triplet) -> bool {
        self.triplets.contains(triplet)
    }

    pub fn len(&self) -> usize {
        self.triplets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triplets.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Triplet> {
        self.triplets.iter()
    }

    pub fn is_subset(&self, other: &BeliefState) -> bool {
        self.triplets.is_subset(&other.triplets)
    }

    pub fn difference(&self, other: &BeliefState) -> BeliefState {
        set_difference(self, other)
    }

    pub fn intersection(&self, other: &BeliefState) -> BeliefState {
        self.triplets
            .intersection(&other.triplets)
            .cloned()
            .collect()
    }

    pub fn union(&self, other: &BeliefState) -> BeliefState {
        self.triplets.union(&other.triplets).cloned().collect()
    }

    /// Number of triplets shared with `other`, without allocating.
    pub fn intersection_len(&self, other: &BeliefState) -> usize {
        self.triplets.intersection(&other.triplets).count()
    }
}

impl FromIterator<Triplet> for BeliefState {
    fn from_iter<I: IntoIterator<Item = Triplet>>(iter: I) -> Self {
        BeliefState {
            triplets: iter.into_iter().collect(),
        }
    }
}

impl<'a> IntoIterator for &'a BeliefState {
    type Item = &'a Triplet;
    type IntoIter = std::collections::btree_set::Iter<'a, Triplet>;

    fn into_iter(self) -> Self::IntoIter {
        self.triplets.iter()
    }
}

impl IntoIterator for BeliefState {
    type Item = Triplet;
    type IntoIter = std::collections::btree_set::IntoIter<Triplet>;

    fn into_iter(self) -> Self::IntoIter {
        self.triplets.into_iter()
    }
}

/// `{x ∈ a : x ∉ b}`.
pub fn set_difference(a: &BeliefState, b: &BeliefState) -> BeliefState {
    a.triplets.difference(&b.triplets).cloned().collect()
}

/// Drops the value of every triplet; conflicting values collapse to one pair.
pub fn project_pairs(state: &BeliefState) -> BTreeSet<DomainSlot> {
    state.iter().map(Triplet::pair).collect()
}

/// One dialogue turn with its ground-truth and predicted cumulative states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Turn {
    pub turn_index: usize,
    pub ground_truth: BeliefState,
    pub prediction: BeliefState,
    pub system_utterance: Option<String>,
    pub user_utterance: Option<String>,
}

impl Turn {
    pub fn new(turn_index: usize, ground_truth: BeliefState, prediction: BeliefState) -> Self {
        Turn {
            turn_index,
            ground_truth,
            prediction,
            system_utterance: None,
            user_utterance: None,
        }
    }
}

/// A non-empty, contiguously indexed sequence of turns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Conversation {
    id: String,
    turns: Vec<Turn>,
}

impl Conversation {
    pub fn new(id: impl Into<String>, turns: Vec<Turn>) -> Result<Self, ModelError> {
        let id = id.into();
        if turns.is_empty() {
            return Err(ModelError::EmptyConversation { id });
        }
        if let Some((position, turn)) = turns
            .iter()
            .enumerate()
            .find(|(i, turn)| turn.turn_index != *i)
        {
            return Err(ModelError::TurnIndex {
                id,
                position,
                found: turn.turn_index,
            });
        }
        Ok(Conversation { id, turns })
    }

    /// Builds a conversation from `(ground_truth, prediction)` pairs, assigning
    /// turn indices by position.
    pub fn from_states(
        id: impl Into<String>,
        states: impl IntoIterator<Item = (BeliefState, BeliefState)>,
    ) -> Result<Self, ModelError> {
        let turns = states
            .into_iter()
            .enumerate()
            .map(|(i, (gt, pred))| Turn::new(i, gt, pred))
            .collect();
        Self::new(id, turns)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn turns(&self) -> &[Turn] {
        &self.turns
    }

    pub fn len(&self) -> usize {
        self.turns.len()
    }

    /// Always false; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.turns.is_empty()
    }
}

/// The full set of domain-slot pairs `S` that slot accuracy is measured over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ontology {
    pairs: BTreeSet<DomainSlot>,
}

impl Ontology {
    pub fn new(pairs: impl IntoIterator<Item = DomainSlot>) -> Result<Self, ModelError> {
        let pairs: BTreeSet<_> = pairs.into_iter().collect();
        if pairs.is_empty() {
            return Err(ModelError::EmptyOntology);
        }
        Ok(Ontology { pairs })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, pair: &DomainSlot) -> bool {
        self.pairs.contains(pair)
    }

    pub fn pairs(&self) -> impl Iterator<Item = &DomainSlot> {
        self.pairs.iter()
    }
}

/// Controls how raw tokens are canonicalized before comparison.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizationPolicy {
    pub lowercase: bool,
    pub trim_whitespace: bool,
    /// Values that count as "no assignment" when building the non-empty
    /// ground-truth set for average goal accuracy.
    pub empty_values: BTreeSet<String>,
}

impl Default for NormalizationPolicy {
    fn default() -> Self {
        NormalizationPolicy {
            lowercase: true,
            trim_whitespace: true,
            empty_values: ["", "none"].into_iter().map(String::from).collect(),
        }
    }
}

impl NormalizationPolicy {
    pub fn normalize_token(&self, raw: &str) -> String {
        let token = if self.trim_whitespace {
            raw.trim()
        } else {
            raw
        };
        if self.lowercase {
            token.to_lowercase()
        } else {
            token.to_string()
        }
    }

    pub fn is_empty_value(&self, value: &str) -> bool {
        self.empty_values.contains(value)
    }
}

pub fn normalize_triplet(
    domain: &str,
    slot: &str,
    value: &str,
    policy: &NormalizationPolicy,
) -> Result<Triplet, ModelError> {
    Triplet::new(
        policy.normalize_token(domain),
        policy.normalize_token(slot),
        policy.normalize_token(value),
    )
}
