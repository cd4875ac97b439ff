//! Property tests for the set algebra, metric invariants and the streaming
//! classifier's agreement with the prefix-rescan oracle.

use dst_eval::analysis::propagation_stats;
use dst_eval::ingest::{parse_predictions, write_predictions};
use dst_eval::metrics::{
    aga_turn, aga_turn_jaccard, classify_turns, evaluate_dataset, fga_conversation, local_match,
    slot_accuracy_turn, Lambda, MetricConfig, TurnClass, TurnClassifier,
};
use dst_eval::model::{normalize_triplet, project_pairs, set_difference};
use dst_eval::synth::oracle::{oracle_fga, oracle_weights};
use dst_eval::synth::{generate, SynthConfig};
use dst_eval::{BeliefState, NormalizationPolicy, Triplet};
use proptest::prelude::*;

fn triplet() -> impl Strategy<Value = Triplet> {
    ("[a-c]", "[a-c]", "[a-c]").prop_map(|(d, s, v)| Triplet::new(d, s, v).unwrap())
}

fn state() -> impl Strategy<Value = BeliefState> {
    prop::collection::vec(triplet(), 0..8).prop_map(|v| v.into_iter().collect())
}

fn synth_config() -> impl Strategy<Value = SynthConfig> {
    (
        any::<u64>(),
        0.0..=0.6f64,
        0.0..=0.4f64,
        0.0..=0.4f64,
        0.0..=0.5f64,
        1usize..=4,
    )
        .prop_map(
            |(seed, p_type1, p_drop, p_spurious, p_overwrite, values)| SynthConfig {
                seed,
                conversations: 12,
                turns_per_conversation: 1..=9,
                domains: 2,
                slots_per_domain: 3,
                values_per_slot: values,
                p_type1,
                p_drop,
                p_spurious,
                p_overwrite,
            },
        )
}

fn lambdas(values: &[f64]) -> Vec<Lambda> {
    values.iter().map(|v| Lambda::new(*v).unwrap()).collect()
}

const SWEEP: [f64; 7] = [0.0, 0.25, 0.5, 0.75, 1.0, 2.0, 50.0];

proptest! {
    #[test]
    fn difference_laws(a in state(), b in state()) {
        let d = set_difference(&a, &b);
        prop_assert!(d.intersection(&b).is_empty());
        prop_assert_eq!(d.union(&a.intersection(&b)), a);
    }

    #[test]
    fn projection_distributes_over_union(a in state(), b in state()) {
        let lhs = project_pairs(&a.union(&b));
        let rhs: std::collections::BTreeSet<_> =
            project_pairs(&a).union(&project_pairs(&b)).cloned().collect();
        prop_assert_eq!(lhs, rhs);
        prop_assert!(project_pairs(&a).len() <= a.len());
    }

    #[test]
    fn normalization_is_idempotent(
        d in "[ A-Za-z]{0,6}", s in "[ A-Za-z]{0,6}", v in "[ A-Za-z0-9]{0,6}",
        lowercase in any::<bool>(), trim in any::<bool>(),
    ) {
        let policy = NormalizationPolicy { lowercase, trim_whitespace: trim, ..Default::default() };
        if let Ok(once) = normalize_triplet(&d, &s, &v, &policy) {
            let twice = normalize_triplet(&once.domain, &once.slot, &once.value, &policy).unwrap();
            prop_assert_eq!(once, twice);
        }
    }

    #[test]
    fn aga_is_blind_to_extraneous_predictions(gt in state(), pred in state(), extra in state()) {
        let policy = NormalizationPolicy::default();
        let outside: BeliefState = set_difference(&set_difference(&extra, &gt), &pred);
        let grown = pred.union(&outside);
        prop_assert_eq!(aga_turn(&gt, &grown, &policy), aga_turn(&gt, &pred, &policy));
        if !outside.is_empty() {
            if let (Some(before), Some(after)) =
                (aga_turn_jaccard(&gt, &pred, &policy), aga_turn_jaccard(&gt, &grown, &policy))
            {
                if before > 0.0 {
                    prop_assert!(after < before);
                } else {
                    prop_assert_eq!(after, 0.0);
                }
            }
        }
    }

    #[test]
    fn slot_accuracy_null_prediction_law(gt in state()) {
        let ont = dst_eval::Ontology::new(
            (0..30).map(|i| dst_eval::DomainSlot::new("x", format!("s{i}"))),
        ).unwrap();
        let sa = slot_accuracy_turn(&gt, &BeliefState::new(), &ont).unwrap();
        prop_assert_eq!(sa, (30 - gt.len()) as f64 / 30.0);
    }

    #[test]
    fn dataset_invariants(config in synth_config()) {
        let corpus = generate(&config).unwrap();
        let metric_config = MetricConfig { lambdas: lambdas(&SWEEP), ..Default::default() };
        let r = evaluate_dataset(&corpus, &metric_config).unwrap();
        let fga: Vec<f64> = r.fga.iter().map(|(_, v)| *v).collect();
        let turn_level = r.m2 as f64 / r.n_turns as f64;

        prop_assert_eq!(fga[0].to_bits(), r.jga.to_bits());
        prop_assert!((fga[6] - turn_level).abs() <= 1e-9);
        for w in fga.windows(2) {
            prop_assert!(w[0] <= w[1], "{:?}", fga);
        }
        for v in &fga {
            prop_assert!(r.jga <= *v && *v <= turn_level, "{} {} {}", r.jga, v, turn_level);
        }
        prop_assert!(r.m1 <= r.m2);

        let stats = propagation_stats(&corpus);
        prop_assert_eq!(stats.exact_count, r.m1);
        prop_assert_eq!(stats.exact_count + stats.type2_count, r.m2);
        prop_assert_eq!(stats.total_turns(), r.n_turns);
    }

    #[test]
    fn exact_turns_are_locally_correct(config in synth_config()) {
        for conv in generate(&config).unwrap() {
            for v in TurnClassifier::new(&conv) {
                if v.class == TurnClass::ExactMatch {
                    prop_assert!(v.local_match);
                }
                prop_assert_eq!(v.local_match, v.class != TurnClass::Type1);
            }
            // the free function agrees with the classifier's view
            let turns = conv.turns();
            for t in 1..turns.len() {
                let lm = local_match(
                    t,
                    &turns[t].ground_truth,
                    &turns[t].prediction,
                    &turns[t - 1].ground_truth,
                    &turns[t - 1].prediction,
                );
                let class = classify_turns(&conv)[t];
                prop_assert_eq!(lm || class == TurnClass::ExactMatch, class != TurnClass::Type1);
            }
        }
    }

    #[test]
    fn stats_are_additive(a in synth_config(), b in synth_config()) {
        let ca = generate(&a).unwrap();
        let cb = generate(&b).unwrap();
        let mut sum = propagation_stats(&ca);
        sum += &propagation_stats(&cb);
        let joined: Vec<_> = ca.into_iter().chain(cb).collect();
        prop_assert_eq!(propagation_stats(&joined), sum);
    }

    #[test]
    fn synthetic_files_round_trip(config in synth_config()) {
        let corpus = generate(&config).unwrap();
        let parsed = parse_predictions(&write_predictions(&corpus), &NormalizationPolicy::default()).unwrap();
        prop_assert_eq!(parsed.conversations, corpus);
    }
}

#[test]
fn streaming_classifier_matches_prefix_rescan_oracle() {
    let config = SynthConfig {
        seed: 2024,
        conversations: 1000,
        turns_per_conversation: 1..=12,
        domains: 2,
        slots_per_domain: 3,
        values_per_slot: 3,
        p_type1: 0.3,
        p_drop: 0.15,
        p_spurious: 0.15,
        p_overwrite: 0.3,
    };
    let corpus = generate(&config).unwrap();
    for lam in lambdas(&[0.0, 0.25, 0.5, 1.0, 50.0]) {
        for conv in &corpus {
            let streamed: Vec<f64> = TurnClassifier::new(conv).map(|v| v.weight(lam)).collect();
            let oracle = oracle_weights(conv, lam);
            for (s, o) in streamed.iter().zip(&oracle) {
                assert!(
                    (s - o).abs() <= 1e-12,
                    "{} λ={lam}: {streamed:?} vs {oracle:?}",
                    conv.id()
                );
            }
            let (a, b) = (fga_conversation(conv, lam), oracle_fga(conv, lam));
            assert!((a - b).abs() <= 1e-12, "{} λ={lam}: {a} vs {b}", conv.id());
        }
    }
}

#[test]
fn parallel_and_sequential_evaluation_agree() {
    let corpus = generate(&SynthConfig {
        seed: 5,
        conversations: 500,
        ..Default::default()
    })
    .unwrap();
    let seq = MetricConfig {
        parallel: false,
        lambdas: lambdas(&SWEEP),
        ..Default::default()
    };
    let par = MetricConfig {
        parallel: true,
        ..seq.clone()
    };
    let a = evaluate_dataset(&corpus, &seq).unwrap();
    let b = evaluate_dataset(&corpus, &par).unwrap();
    assert_eq!(a, b);
    for ((_, x), (_, y)) in a.fga.iter().zip(&b.fga) {
        assert_eq!(x.to_bits(), y.to_bits());
    }
}
