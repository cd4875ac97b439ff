//! Small hand-built conversations used as worked examples in docs and tests.

use crate::model::{BeliefState, Conversation, Triplet};

fn state(items: &[(&str, &str, &str)]) -> BeliefState {
    items
        .iter()
        .map(|(d, s, v)| Triplet::new(*d, *s, *v).expect("fixture tokens are non-empty"))
        .collect()
}

fn extend(base: &BeliefState, items: &[(&str, &str, &str)]) -> BeliefState {
    base.union(&state(items))
}

/// Six-turn hotel/attraction/taxi booking whose turns classify as
/// exact, exact, type-1, type-2, type-1, type-2.
///
/// * turn 2 misses the requested `hotel-book day`;
/// * turn 3 gets the new attraction area right but still lacks the day;
/// * turn 4 adds an attraction name the annotators never wrote down;
/// * turn 5 books the taxi correctly on top of both earlier mistakes.
pub fn worked_example() -> Conversation {
    let gt0 = state(&[
        ("hotel", "pricerange", "cheap"),
        ("hotel", "type", "guesthouse"),
    ]);
    let gt1 = extend(&gt0, &[("hotel", "parking", "yes")]);
    let gt2 = extend(
        &gt1,
        &[
            ("hotel", "book stay", "3"),
            ("hotel", "book day", "tuesday"),
        ],
    );
    let gt3 = extend(&gt2, &[("attraction", "area", "centre")]);
    let gt4 = extend(&gt3, &[("attraction", "type", "church")]);
    let gt5 = extend(&gt4, &[("taxi", "leaveat", "17:00")]);

    let pred2 = extend(&gt1, &[("hotel", "book stay", "3")]);
    let pred3 = extend(&pred2, &[("attraction", "area", "centre")]);
    let pred4 = extend(
        &pred3,
        &[
            ("attraction", "type", "church"),
            ("attraction", "name", "all saints church"),
        ],
    );
    let pred5 = extend(&pred4, &[("taxi", "leaveat", "17:00")]);

    Conversation::from_states(
        "worked-example",
        vec![
            (gt0.clone(), gt0),
            (gt1.clone(), gt1),
            (gt2, pred2),
            (gt3, pred3),
            (gt4, pred4),
            (gt5, pred5),
        ],
    )
    .expect("fixture is well formed")
}

/// Four turns whose non-empty ground truth totals 21 triplets, 16 of them
/// predicted: the first turn has nothing to score, then 4/6, 5/7 and 7/8.
pub fn aga_example() -> Conversation {
    let gt1 = state(&[
        ("restaurant", "area", "centre"),
        ("restaurant", "food", "indian"),
        ("restaurant", "pricerange", "cheap"),
        ("restaurant", "book people", "4"),
        ("restaurant", "book day", "friday"),
        ("restaurant", "book time", "19:00"),
    ]);
    let gt2 = extend(&gt1, &[("hotel", "area", "north")]);
    let gt3 = extend(&gt2, &[("hotel", "stars", "4")]);

    let pred1 = state(&[
        ("restaurant", "area", "centre"),
        ("restaurant", "food", "indian"),
        ("restaurant", "pricerange", "cheap"),
        ("restaurant", "book people", "4"),
    ]);
    let pred2 = extend(&pred1, &[("hotel", "area", "north")]);
    let pred3 = extend(
        &pred2,
        &[
            ("restaurant", "book day", "friday"),
            ("hotel", "stars", "4"),
        ],
    );

    Conversation::from_states(
        "aga-example",
        vec![
            (state(&[("hotel", "parking", "none")]), BeliefState::new()),
            (gt1, pred1),
            (gt2, pred2),
            (gt3, pred3),
        ],
    )
    .expect("fixture is well formed")
}

/// The ground truth overwrites a value and the prediction keeps both the old
/// and the new one: a locally correct mismatch with no earlier type-1 error.
pub fn overwrite_example() -> Conversation {
    let centre = state(&[("hotel", "area", "centre")]);
    Conversation::from_states(
        "overwrite-example",
        vec![
            (centre.clone(), centre),
            (
                state(&[("hotel", "area", "north")]),
                state(&[("hotel", "area", "centre"), ("hotel", "area", "north")]),
            ),
        ],
    )
    .expect("fixture is well formed")
}
