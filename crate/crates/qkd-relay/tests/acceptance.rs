//! Acceptance suite: one test per release-gating criterion, each printing
//! a single pass/fail line (visible with `--nocapture`).
//!
//! The same checks back the `qkd-relay check` CLI verb.

use qkd_relay::acceptance::{self, CriterionReport};

fn assert_criterion(report: CriterionReport) {
    println!("{}", report.line());
    assert!(report.passed, "{}", report.line());
}

#[test]
fn criterion_01_counting_exactness() {
    assert_criterion(acceptance::criterion_01_counting_exactness());
}

#[test]
fn criterion_02_naive_fraction() {
    assert_criterion(acceptance::criterion_02_naive_fraction());
}

#[test]
fn criterion_03_bridged_half() {
    assert_criterion(acceptance::criterion_03_bridged_half());
}

#[test]
fn criterion_04_key_agreement() {
    assert_criterion(acceptance::criterion_04_key_agreement());
}

#[test]
fn criterion_05_distance_extension() {
    assert_criterion(acceptance::criterion_05_distance_extension());
}

#[test]
fn criterion_06_origin_scaling() {
    assert_criterion(acceptance::criterion_06_origin_scaling());
}

#[test]
fn criterion_07_eavesdropper_detection() {
    assert_criterion(acceptance::criterion_07_eavesdropper_detection());
}

#[test]
fn criterion_08_scheduler_optimality() {
    assert_criterion(acceptance::criterion_08_scheduler_optimality());
}

#[test]
fn criterion_09_transcript_privacy() {
    assert_criterion(acceptance::criterion_09_transcript_privacy());
}

#[test]
fn criterion_10_reproducibility() {
    assert_criterion(acceptance::criterion_10_reproducibility());
}
