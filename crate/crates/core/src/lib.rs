//! Evaluation metrics for dialogue state tracking.
//!
//! Computes joint goal accuracy, slot accuracy, average goal accuracy (recall
//! and Jaccard variants) and flexible goal accuracy over prediction files, with
//! per-turn error traces and a seeded synthetic-corpus generator.
//!
//! ```
//! use dst_eval::{fixtures, metrics::{evaluate_dataset, Lambda, MetricConfig}};
//!
//! let config = MetricConfig {
//!     lambdas: vec![Lambda::new(0.5).unwrap()],
//!     ..Default::default()
//! };
//! let report = evaluate_dataset(&[fixtures::worked_example()], &config).unwrap();
//! assert_eq!(report.m1, 2);
//! assert!((report.fga[0].1 - 0.46449).abs() < 1e-5);
//! ```

pub mod analysis;
pub mod fixtures;
pub mod ingest;
pub mod metrics;
pub mod model;
pub mod report;
pub mod sum;
pub mod synth;

pub use model::{
    BeliefState, Conversation, DomainSlot, NormalizationPolicy, Ontology, Triplet, Turn,
};
