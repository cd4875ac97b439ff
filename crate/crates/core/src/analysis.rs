//! Per-conversation error traces and corpus-level propagation statistics.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::AddAssign;

use serde::{Deserialize, Serialize};

use crate::metrics::{Distance, Lambda, TurnClass, TurnClassifier};
use crate::model::Conversation;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub turn_index: usize,
    pub class: TurnClass,
    pub active_t_err: Option<usize>,
    pub weights: Vec<(Lambda, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorTrace {
    pub conversation_id: String,
    pub entries: Vec<TraceEntry>,
}

pub fn trace_conversation(conv: &Conversation, lambdas: &[Lambda]) -> ErrorTrace {
    let entries = TurnClassifier::new(conv)
        .map(|v| TraceEntry {
            turn_index: v.turn_index,
            class: v.class,
            active_t_err: v.active_t_err,
            weights: lambdas.iter().map(|lam| (*lam, v.weight(*lam))).collect(),
        })
        .collect();
    ErrorTrace {
        conversation_id: conv.id().to_string(),
        entries,
    }
}

impl ErrorTrace {
    /// Column-aligned text, one line per turn after a header.
    pub fn render_text(&self, lambdas: &[Lambda]) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# dialogue {}", self.conversation_id);
        let _ = write!(
            out,
            "{:>4}  {:<5}  {:>8}  {:>5}",
            "turn", "class", "distance", "t_err"
        );
        for lam in lambdas {
            let _ = write!(out, "  {:>8}", format!("w@{lam}"));
        }
        out.push('\n');
        for e in &self.entries {
            let distance = match e.class {
                TurnClass::Type2(Distance::Bounded(x)) => x.to_string(),
                TurnClass::Type2(Distance::Unbounded) => "inf".to_string(),
                _ => "-".to_string(),
            };
            let t_err = e
                .active_t_err
                .map_or_else(|| "-".to_string(), |t| t.to_string());
            let _ = write!(
                out,
                "{:>4}  {:<5}  {:>8}  {:>5}",
                e.turn_index,
                e.class.short_label(),
                distance,
                t_err
            );
            for (_, w) in &e.weights {
                let _ = write!(out, "  {:>8.4}", w);
            }
            out.push('\n');
        }
        out
    }

    /// One JSON object per turn.
    pub fn render_jsonlines(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let line = serde_json::json!({
                "dialogue_id": self.conversation_id,
                "turn_index": e.turn_index,
                "class": e.class,
                "active_t_err": e.active_t_err,
                "weights": e.weights.iter().map(|(l, w)| serde_json::json!({"lambda": l, "weight": w})).collect::<Vec<_>>(),
            });
            out.push_str(&line.to_string());
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropagationStats {
    pub exact_count: usize,
    pub type1_count: usize,
    pub type2_count: usize,
    /// Turn index of each conversation's first non-exact turn.
    pub first_error_turn_histogram: BTreeMap<usize, usize>,
    /// Lengths of maximal runs of consecutive non-exact turns.
    pub error_run_length_histogram: BTreeMap<usize, usize>,
}

impl PropagationStats {
    pub fn total_turns(&self) -> usize {
        self.exact_count + self.type1_count + self.type2_count
    }

    fn record_conversation(&mut self, conv: &Conversation) {
        let mut run = 0usize;
        let mut first_error = None;
        for verdict in TurnClassifier::new(conv) {
            match verdict.class {
                TurnClass::ExactMatch => {
                    self.exact_count += 1;
                    if run > 0 {
                        *self.error_run_length_histogram.entry(run).or_default() += 1;
                        run = 0;
                    }
                    continue;
                }
                TurnClass::Type1 => self.type1_count += 1,
                TurnClass::Type2(_) => self.type2_count += 1,
            }
            run += 1;
            first_error.get_or_insert(verdict.turn_index);
        }
        if run > 0 {
            *self.error_run_length_histogram.entry(run).or_default() += 1;
        }
        if let Some(t) = first_error {
            *self.first_error_turn_histogram.entry(t).or_default() += 1;
        }
    }
}

impl AddAssign<&PropagationStats> for PropagationStats {
    fn add_assign(&mut self, other: &PropagationStats) {
        self.exact_count += other.exact_count;
        self.type1_count += other.type1_count;
        self.type2_count += other.type2_count;
        for (k, v) in &other.first_error_turn_histogram {
            *self.first_error_turn_histogram.entry(*k).or_default() += v;
        }
        for (k, v) in &other.error_run_length_histogram {
            *self.error_run_length_histogram.entry(*k).or_default() += v;
        }
    }
}

pub fn propagation_stats(convs: &[Conversation]) -> PropagationStats {
    let mut stats = PropagationStats::default();
    for conv in convs {
        stats.record_conversation(conv);
    }
    stats
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::{BeliefState, Triplet};

    fn lam(v: f64) -> Lambda {
        Lambda::new(v).unwrap()
    }

    #[test]
    fn worked_example_trace() {
        let trace = trace_conversation(&fixtures::worked_example(), &[lam(0.5)]);
        assert_eq!(trace.entries.len(), 6);
        let weights: Vec<f64> = trace.entries.iter().map(|e| e.weights[0].1).collect();
        let expected = [1.0, 1.0, 0.0, 0.3935, 0.0, 0.3935];
        for (w, e) in weights.iter().zip(expected) {
            assert!((w - e).abs() < 1e-4, "{weights:?}");
        }
        let t_err: Vec<_> = trace.entries.iter().map(|e| e.active_t_err).collect();
        assert_eq!(t_err, vec![None, None, Some(2), Some(2), Some(4), Some(4)]);
    }

    #[test]
    fn text_rendering_shows_classes_and_weights() {
        let lambdas = [lam(0.5)];
        let text = trace_conversation(&fixtures::worked_example(), &lambdas).render_text(&lambdas);
        let rows: Vec<&str> = text.lines().skip(2).collect();
        assert_eq!(rows.len(), 6);
        let classes: Vec<&str> = rows
            .iter()
            .map(|r| r.split_whitespace().nth(1).unwrap())
            .collect();
        assert_eq!(classes, ["E", "E", "1", "2", "1", "2"]);
        assert!(rows[3].ends_with("0.3935"));
    }

    #[test]
    fn all_exact_trace() {
        let s: BeliefState = [Triplet::new("h", "a", "c").unwrap()].into_iter().collect();
        let conv = Conversation::from_states("x", vec![(s.clone(), s.clone()); 4]).unwrap();
        let trace = trace_conversation(&conv, &[lam(0.5), lam(1.0)]);
        assert!(trace
            .entries
            .iter()
            .all(|e| e.active_t_err.is_none() && e.weights.iter().all(|(_, w)| *w == 1.0)));
        let stats = propagation_stats(&[conv]);
        assert_eq!((stats.type1_count, stats.type2_count), (0, 0));
        assert!(stats.error_run_length_histogram.is_empty());
    }

    #[test]
    fn single_turn_mismatch() {
        let gt: BeliefState = [Triplet::new("h", "a", "c").unwrap()].into_iter().collect();
        let conv = Conversation::from_states("x", vec![(gt, BeliefState::new())]).unwrap();
        let trace = trace_conversation(&conv, &[lam(0.5)]);
        assert_eq!(trace.entries[0].class, TurnClass::Type1);
        assert_eq!(trace.entries[0].weights[0].1, 0.0);
    }

    #[test]
    fn worked_example_stats() {
        let stats = propagation_stats(&[fixtures::worked_example()]);
        assert_eq!(stats.exact_count, 2);
        assert_eq!(stats.type1_count, 2);
        assert_eq!(stats.type2_count, 2);
        assert_eq!(stats.error_run_length_histogram, BTreeMap::from([(4, 1)]));
        assert_eq!(stats.first_error_turn_histogram, BTreeMap::from([(2, 1)]));

        let doubled = propagation_stats(&[fixtures::worked_example(), fixtures::worked_example()]);
        let mut summed = stats.clone();
        summed += &stats;
        assert_eq!(doubled, summed);
        assert_eq!(doubled.total_turns(), 12);
    }

    #[test]
    fn jsonlines_has_one_object_per_turn() {
        let out = trace_conversation(&fixtures::worked_example(), &[lam(0.5)]).render_jsonlines();
        assert_eq!(out.lines().count(), 6);
        let v: serde_json::Value = serde_json::from_str(out.lines().nth(3).unwrap()).unwrap();
        assert_eq!(v["active_t_err"], 2);
    }
}
