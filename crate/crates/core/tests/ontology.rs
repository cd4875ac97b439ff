use dst_eval::ingest::parse_ontology;
use dst_eval::metrics::slot_accuracy_turn;
use dst_eval::{fixtures, BeliefState, NormalizationPolicy};

const MULTIWOZ: &[u8] = include_bytes!("data/multiwoz_slots.json");

#[test]
fn multiwoz_slot_list_has_thirty_pairs() {
    // the file lists hotel-area twice
    let ont = parse_ontology(MULTIWOZ, &NormalizationPolicy::default()).unwrap();
    assert_eq!(ont.len(), 30);
}

#[test]
fn worked_example_slot_accuracy() {
    let ont = parse_ontology(MULTIWOZ, &NormalizationPolicy::default()).unwrap();
    let conv = fixtures::worked_example();
    let turns = conv.turns();
    // turn 2 misses one triplet
    let sa = slot_accuracy_turn(&turns[2].ground_truth, &turns[2].prediction, &ont).unwrap();
    assert_eq!(sa, 29.0 / 30.0);
    // turn 4 misses one and adds one on a different pair
    let sa = slot_accuracy_turn(&turns[4].ground_truth, &turns[4].prediction, &ont).unwrap();
    assert_eq!(sa, 28.0 / 30.0);
    let empty = slot_accuracy_turn(&turns[5].ground_truth, &BeliefState::new(), &ont).unwrap();
    assert_eq!(empty, (30 - turns[5].ground_truth.len()) as f64 / 30.0);
}
