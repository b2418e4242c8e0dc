//! End-to-end acceptance suite. Each criterion prints one PASS/FAIL line and
//! has its own test so failures stay attributable.

use bernoulli_lab::acceptance::{self, CriterionOutcome, DEFAULT_SEED};

fn check(outcome: CriterionOutcome) {
    let line = acceptance::summary_lines(std::slice::from_ref(&outcome))
        .pop()
        .unwrap();
    println!("{line}");
    if let Some(err) = &outcome.error {
        panic!("criterion {} errored: {err}", outcome.id);
    }
    assert!(
        outcome.passed,
        "criterion {} ({}) failed: {}",
        outcome.id,
        outcome.name,
        serde_json::to_string_pretty(&outcome.measured).unwrap()
    );
}

#[test]
fn criterion_1_critical_radius() {
    check(acceptance::criterion_1_critical_radius(DEFAULT_SEED));
}

#[test]
fn criterion_2_annulus_convergence() {
    check(acceptance::criterion_2_annulus_convergence(DEFAULT_SEED));
}

#[test]
fn criterion_3_oracle_tie() {
    check(acceptance::criterion_3_oracle_tie(DEFAULT_SEED));
}

#[test]
fn criterion_4_comparison() {
    check(acceptance::criterion_4_comparison(DEFAULT_SEED));
}

#[test]
fn criterion_5_cut_paste() {
    check(acceptance::criterion_5_cut_paste(DEFAULT_SEED));
}

#[test]
fn criterion_6_free_boundary_gradient() {
    check(acceptance::criterion_6_free_boundary_gradient(DEFAULT_SEED));
}

#[test]
fn criterion_7_equicontinuity() {
    check(acceptance::criterion_7_equicontinuity(DEFAULT_SEED));
}

#[test]
fn criterion_8_holder() {
    check(acceptance::criterion_8_holder(DEFAULT_SEED));
}

#[test]
fn criterion_9_barrier() {
    check(acceptance::criterion_9_barrier(DEFAULT_SEED));
}

#[test]
fn suite_has_the_documented_shape() {
    // structural checks that do not re-run the heavy criteria
    assert_eq!(acceptance::CRITERIA_COUNT, 9);
    let outcome = acceptance::criterion_1_critical_radius(DEFAULT_SEED);
    assert_eq!(outcome.seed, DEFAULT_SEED);
    assert!(outcome.measured.get("runtime_limit_s").is_some());
}

#[test]
fn seeded_criteria_are_deterministic() {
    // same seed, same measured values up to runtime fields
    let strip = |mut v: serde_json::Value| -> serde_json::Value {
        if let Some(map) = v.as_object_mut() {
            map.remove("runtime_ok");
        }
        v
    };
    let a = strip(acceptance::criterion_5_cut_paste(DEFAULT_SEED).measured);
    let b = strip(acceptance::criterion_5_cut_paste(DEFAULT_SEED).measured);
    assert_eq!(a, b);
    let c = strip(acceptance::criterion_5_cut_paste(DEFAULT_SEED + 1).measured);
    assert_ne!(b, c, "seed must matter");
}
