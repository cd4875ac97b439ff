//! Prediction-file and ontology parsing.
//!
//! A prediction file is a UTF-8 JSON document:
//!
//! ```json
//! {
//!   "version": "1",
//!   "dialogues": [
//!     {
//!       "dialogue_id": "MUL0001.json",
//!       "turns": [
//!         {
//!           "turn_index": 0,
//!           "ground_truth": [["hotel", "area", "centre"]],
//!           "prediction": [["hotel", "area", "centre"]],
//!           "system_utterance": "...",
//!           "user_utterance": "..."
//!         }
//!       ]
//!     }
//!   ]
//! }
//! ```
//!
//! Unknown fields are ignored so richer inference dumps can be loaded as-is.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use serde_json::error::Category;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::model::{
    normalize_triplet, BeliefState, Conversation, DomainSlot, NormalizationPolicy, Ontology, Turn,
};

pub const FORMAT_VERSION: &str = "1";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IngestError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema error{}: {message}", position(.line, .column))]
    Schema {
        message: String,
        line: Option<usize>,
        column: Option<usize>,
    },
}

fn position(line: &Option<usize>, column: &Option<usize>) -> String {
    match (line, column) {
        (Some(l), Some(c)) => format!(" at line {l}, column {c}"),
        _ => String::new(),
    }
}

impl IngestError {
    fn schema(message: impl Into<String>) -> Self {
        IngestError::Schema {
            message: message.into(),
            line: None,
            column: None,
        }
    }
}

impl From<serde_json::Error> for IngestError {
    fn from(e: serde_json::Error) -> Self {
        let (line, column) = (e.line(), e.column());
        // serde_json appends its own position; keep just the message
        let full = e.to_string();
        let message = full
            .rsplit_once(" at line ")
            .map_or(full.as_str(), |(m, _)| m)
            .to_string();
        match e.classify() {
            Category::Data => IngestError::Schema {
                message,
                line: Some(line),
                column: Some(column),
            },
            Category::Syntax | Category::Eof | Category::Io => IngestError::Parse {
                line,
                column,
                message,
            },
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct PredictionFile {
    version: String,
    dialogues: Vec<DialogueRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
struct DialogueRecord {
    dialogue_id: String,
    turns: Vec<TurnRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TurnRecord {
    turn_index: usize,
    ground_truth: Vec<[String; 3]>,
    prediction: Vec<[String; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    system_utterance: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    user_utterance: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedPredictions {
    pub conversations: Vec<Conversation>,
    /// Non-fatal findings such as duplicate triplets.
    pub warnings: Vec<String>,
}

fn build_state(
    raw: &[[String; 3]],
    policy: &NormalizationPolicy,
    context: &str,
    warnings: &mut Vec<String>,
) -> Result<BeliefState, IngestError> {
    let mut state = BeliefState::new();
    for (k, [d, s, v]) in raw.iter().enumerate() {
        let triplet = normalize_triplet(d, s, v, policy)
            .map_err(|e| IngestError::schema(format!("{context}[{k}]: {e}")))?;
        if !state.insert(triplet.clone()) {
            warnings.push(format!("{context}: duplicate triplet {triplet} collapsed"));
        }
    }
    Ok(state)
}

pub fn parse_predictions(
    bytes: &[u8],
    policy: &NormalizationPolicy,
) -> Result<ParsedPredictions, IngestError> {
    let file: PredictionFile = serde_json::from_slice(bytes)?;
    if file.version != FORMAT_VERSION {
        return Err(IngestError::schema(format!(
            "unsupported version {:?}, expected {FORMAT_VERSION:?}",
            file.version
        )));
    }
    let mut warnings = Vec::new();
    if file.dialogues.is_empty() {
        warnings.push("file contains no dialogues".to_string());
    }
    let mut seen = BTreeSet::new();
    let mut conversations = Vec::with_capacity(file.dialogues.len());
    for dialogue in file.dialogues {
        let id = dialogue.dialogue_id;
        if !seen.insert(id.clone()) {
            return Err(IngestError::schema(format!("duplicate dialogue_id {id:?}")));
        }
        if dialogue.turns.is_empty() {
            return Err(IngestError::schema(format!("dialogue {id:?} has no turns")));
        }
        let mut turns = Vec::with_capacity(dialogue.turns.len());
        for (position, record) in dialogue.turns.into_iter().enumerate() {
            if record.turn_index != position {
                return Err(IngestError::schema(format!(
                    "dialogue {id:?}: expected turn_index {position}, found {}",
                    record.turn_index
                )));
            }
            let ctx = format!("dialogue {id:?} turn {position}");
            let ground_truth = build_state(
                &record.ground_truth,
                policy,
                &format!("{ctx} ground_truth"),
                &mut warnings,
            )?;
            let prediction = build_state(
                &record.prediction,
                policy,
                &format!("{ctx} prediction"),
                &mut warnings,
            )?;
            turns.push(Turn {
                turn_index: position,
                ground_truth,
                prediction,
                system_utterance: record.system_utterance,
                user_utterance: record.user_utterance,
            });
        }
        if turns.iter().all(|t| t.ground_truth.is_empty()) {
            warnings.push(format!(
                "dialogue {id:?}: ground truth is empty at every turn"
            ));
        }
        let conv = Conversation::new(id, turns).map_err(|e| IngestError::schema(e.to_string()))?;
        conversations.push(conv);
    }
    Ok(ParsedPredictions {
        conversations,
        warnings,
    })
}

/// Serializes conversations in the prediction-file format (pretty JSON with a
/// trailing newline).
pub fn write_predictions(convs: &[Conversation]) -> Vec<u8> {
    let to_raw = |s: &BeliefState| -> Vec<[String; 3]> {
        s.iter()
            .map(|t| [t.domain.clone(), t.slot.clone(), t.value.clone()])
            .collect()
    };
    let file = PredictionFile {
        version: FORMAT_VERSION.to_string(),
        dialogues: convs
            .iter()
            .map(|c| DialogueRecord {
                dialogue_id: c.id().to_string(),
                turns: c
                    .turns()
                    .iter()
                    .map(|t| TurnRecord {
                        turn_index: t.turn_index,
                        ground_truth: to_raw(&t.ground_truth),
                        prediction: to_raw(&t.prediction),
                        system_utterance: t.system_utterance.clone(),
                        user_utterance: t.user_utterance.clone(),
                    })
                    .collect(),
            })
            .collect(),
    };
    let mut out = serde_json::to_vec_pretty(&file).expect("in-memory serialization");
    out.push(b'\n');
    out
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum OntologyEntry {
    Record { domain: String, slot: String },
    Joined(String),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum OntologyDocument {
    List(Vec<OntologyEntry>),
    Wrapped {
        pairs: Vec<OntologyEntry>,
    },
    /// MultiWOZ-style `{"hotel-area": [values...], ...}`; values are ignored.
    Keyed(BTreeMap<String, serde_json::Value>),
}

/// Accepts a list of `{domain, slot}` records or `"domain-slot"` strings
/// (optionally under a `pairs` key), or an object keyed by `"domain-slot"`.
pub fn parse_ontology(bytes: &[u8], policy: &NormalizationPolicy) -> Result<Ontology, IngestError> {
    let doc: OntologyDocument = serde_json::from_slice(bytes)?;
    let entries: Vec<OntologyEntry> = match doc {
        OntologyDocument::List(v) | OntologyDocument::Wrapped { pairs: v } => v,
        OntologyDocument::Keyed(map) => map.into_keys().map(OntologyEntry::Joined).collect(),
    };
    let mut pairs = Vec::with_capacity(entries.len());
    for entry in entries {
        let (domain, slot) = match entry {
            OntologyEntry::Record { domain, slot } => (domain, slot),
            OntologyEntry::Joined(s) => match s.split_once('-') {
                Some((d, sl)) => (d.to_string(), sl.to_string()),
                None => {
                    return Err(IngestError::schema(format!(
                        "ontology entry {s:?} is not of the form \"domain-slot\""
                    )))
                }
            },
        };
        let (domain, slot) = (
            policy.normalize_token(&domain),
            policy.normalize_token(&slot),
        );
        if domain.is_empty() || slot.is_empty() {
            return Err(IngestError::schema(format!(
                "ontology entry ({domain:?}, {slot:?}) has an empty field"
            )));
        }
        pairs.push(DomainSlot::new(domain, slot));
    }
    Ontology::new(pairs).map_err(|e| IngestError::schema(e.to_string()))
}

/// Hex SHA-256 of the raw input bytes.
pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn policy() -> NormalizationPolicy {
        NormalizationPolicy::default()
    }

    #[test]
    fn minimal_file() {
        let doc = br#"{"version":"1","dialogues":[{"dialogue_id":"d1","turns":[
            {"turn_index":0,"ground_truth":[["Hotel","Area","Centre"]],"prediction":[]}]}]}"#;
        let parsed = parse_predictions(doc, &policy()).unwrap();
        assert_eq!(parsed.conversations.len(), 1);
        let conv = &parsed.conversations[0];
        assert_eq!(conv.len(), 1);
        let t = conv.turns()[0].ground_truth.iter().next().unwrap();
        assert_eq!(
            (t.domain.as_str(), t.slot.as_str(), t.value.as_str()),
            ("hotel", "area", "centre")
        );
    }

    #[test]
    fn turn_gap_is_schema_error() {
        let doc = br#"{"version":"1","dialogues":[{"dialogue_id":"PMUL42","turns":[
            {"turn_index":0,"ground_truth":[],"prediction":[]},
            {"turn_index":2,"ground_truth":[],"prediction":[]}]}]}"#;
        let err = parse_predictions(doc, &policy()).unwrap_err();
        assert!(matches!(err, IngestError::Schema { .. }));
        assert!(err.to_string().contains("PMUL42"), "{err}");
    }

    #[test]
    fn malformed_json_reports_position() {
        let err =
            parse_predictions(b"{\"version\": \"1\",\n \"dialogues\": [", &policy()).unwrap_err();
        match err {
            IngestError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_field_is_schema_error_with_position() {
        let doc = br#"{"version":"1","dialogues":[{"dialogue_id":"d","turns":[{"turn_index":0,"ground_truth":[]}]}]}"#;
        let err = parse_predictions(doc, &policy()).unwrap_err();
        match &err {
            IngestError::Schema { message, line, .. } => {
                assert!(message.contains("prediction"), "{err}");
                assert_eq!(*line, Some(1));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_dialogue_and_bad_version() {
        let doc = br#"{"version":"1","dialogues":[
            {"dialogue_id":"d","turns":[{"turn_index":0,"ground_truth":[],"prediction":[]}]},
            {"dialogue_id":"d","turns":[{"turn_index":0,"ground_truth":[],"prediction":[]}]}]}"#;
        assert!(parse_predictions(doc, &policy()).is_err());
        let doc = br#"{"version":"2","dialogues":[]}"#;
        assert!(parse_predictions(doc, &policy()).is_err());
    }

    #[test]
    fn duplicates_and_empty_states_warn() {
        let doc = br#"{"version":"1","dialogues":[{"dialogue_id":"d","turns":[
            {"turn_index":0,"ground_truth":[],"prediction":[["h","a","c"],["H","a ","c"]]}]}]}"#;
        let parsed = parse_predictions(doc, &policy()).unwrap();
        assert_eq!(parsed.conversations[0].turns()[0].prediction.len(), 1);
        assert_eq!(parsed.warnings.len(), 2, "{:?}", parsed.warnings);
    }

    #[test]
    fn empty_token_is_schema_error() {
        let doc = br#"{"version":"1","dialogues":[{"dialogue_id":"d","turns":[
            {"turn_index":0,"ground_truth":[["","area","x"]],"prediction":[]}]}]}"#;
        let err = parse_predictions(doc, &policy()).unwrap_err();
        assert!(err.to_string().contains("ground_truth[0]"), "{err}");
    }

    #[test]
    fn worked_example_round_trips() {
        let mut conv = fixtures::worked_example();
        conv = Conversation::new(conv.id(), conv.turns().to_vec()).unwrap();
        let bytes = write_predictions(std::slice::from_ref(&conv));
        let parsed = parse_predictions(&bytes, &policy()).unwrap();
        assert_eq!(parsed.conversations, vec![conv]);
        assert!(parsed.warnings.is_empty());
    }

    #[test]
    fn ontology_formats() {
        let p = policy();
        let list = br#"[{"domain":"hotel","slot":"area"},"hotel-book day","hotel-area"]"#;
        assert_eq!(parse_ontology(list, &p).unwrap().len(), 2);
        let wrapped = br#"{"pairs":["taxi-leaveat"]}"#;
        assert_eq!(parse_ontology(wrapped, &p).unwrap().len(), 1);
        let keyed = br#"{"hotel-area":["centre","north"],"train-day":["monday"]}"#;
        assert_eq!(parse_ontology(keyed, &p).unwrap().len(), 2);
        assert!(matches!(
            parse_ontology(b"[]", &p).unwrap_err(),
            IngestError::Schema { .. }
        ));
        assert!(parse_ontology(br#"["nodash"]"#, &p).is_err());
    }

    #[test]
    fn digest_is_stable() {
        assert_eq!(
            digest(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
