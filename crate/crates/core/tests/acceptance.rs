use csdlab_core::acceptance::{self, CriterionOutcome, DEFAULT_SEED};

fn check(outcome: CriterionOutcome) {
    println!("{outcome}");
    assert!(outcome.passed, "{outcome}");
}

#[test]
fn criterion_01_divergence_oracle_equivalence() {
    check(acceptance::divergence_oracles(DEFAULT_SEED));
}

#[test]
fn criterion_02_divergence_ordering() {
    check(acceptance::divergence_ordering(DEFAULT_SEED));
}

#[test]
fn criterion_03a_redundancy_slope() {
    check(acceptance::redundancy_slope());
}

#[test]
fn criterion_03b_redundancy_ratio_converges() {
    check(acceptance::redundancy_ratio_converges());
}

#[test]
fn criterion_03c_redundancy_ratio_from_above() {
    check(acceptance::redundancy_ratio_from_above());
}

#[test]
fn criterion_04_singular_contrast() {
    check(acceptance::singular_contrast());
}

#[test]
fn criterion_05_one_shot_bound() {
    check(acceptance::one_shot_bound(DEFAULT_SEED));
}

#[test]
fn criterion_06_sampler_exactness() {
    check(acceptance::sampler_exactness(DEFAULT_SEED));
}

#[test]
fn criterion_07_cdf_identity() {
    check(acceptance::cdf_identity(DEFAULT_SEED));
}

#[test]
fn criterion_08_clt_behaviour() {
    check(acceptance::clt_behaviour(DEFAULT_SEED));
}

#[test]
fn criterion_09_tilting_correctness() {
    check(acceptance::tilting_correctness(DEFAULT_SEED));
}

#[test]
fn criterion_10a_gibbs_instances() {
    check(acceptance::gibbs_instances(DEFAULT_SEED));
}

#[test]
fn criterion_10b_ball_bound() {
    check(acceptance::ball_bound(DEFAULT_SEED));
}

#[test]
fn criterion_11_typicality() {
    check(acceptance::typicality(DEFAULT_SEED));
}
