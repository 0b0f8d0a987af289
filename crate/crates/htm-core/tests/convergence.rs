//! Sequence-learning convergence: on the fixed cyclic glyph sequence the
//! bursting-column count must fall monotonically (allowing plateaus) after
//! the first presentations and reach zero or near-zero once the sequence is
//! learned.

use htm_core::experiments::{default_sequence_order, sequence, FieldSpec, SequenceSpec};

#[test]
fn bursting_decays_to_zero_on_repeated_sequence() {
    let spec = SequenceSpec {
        glyph_dir: None,
        order: default_sequence_order(),
        presentations: 12,
        noise_density: 0.0,
        seed: 42,
        config: None,
        field: FieldSpec::default(),
    };
    let r = sequence(&spec).unwrap();
    // non-increasing from presentation 2 on (the first presentation is all
    // bursts by construction)
    for p in 2..r.bursting.len() {
        assert!(
            r.bursting[p] <= r.bursting[p - 1],
            "bursting went up at presentation {}: {:?}",
            p + 1,
            r.bursting
        );
    }
    let tail = *r.bursting.last().unwrap();
    assert!(
        tail <= 1,
        "expected the learned sequence to stop bursting, got {:?}",
        r.bursting
    );
}

#[test]
fn learned_region_predicts_next_step_columns() {
    let spec = SequenceSpec {
        glyph_dir: None,
        order: default_sequence_order(),
        presentations: 10,
        noise_density: 0.0,
        seed: 7,
        config: None,
        field: FieldSpec::default(),
    };
    let r = sequence(&spec).unwrap();
    assert!(
        r.first_order.iter().skip(5).all(|&a| a >= 0.95),
        "first-order accuracy should saturate: {:?}",
        r.first_order
    );
}
