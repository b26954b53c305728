use csdlab_core::acceptance::random_channel;
use csdlab_core::blocks::{
    block_csd, block_level_distribution, clt_check, expected_block_csd, redundancy_curve, sample_y_block,
    verify_cdf_identity, BlockMode,
};
use csdlab_core::channel::{llr_stats, Channel, DiscreteJointChannel};
use csdlab_core::fixtures;
use csdlab_core::sampler::{exactness_test, pfr_decode, pfr_encode, CommonRandomness, DEFAULT_MAX_PROPOSALS};
use csdlab_core::tilting::{block_tilt_stats, moment_bound_check, stochastic_dominance_check, tilted_measure};
use csdlab_core::width::channel_simulation_divergence;
use csdlab_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn t_grid() -> Vec<f64> {
    (0..100).map(|i| -4.0 + 8.0 * i as f64 / 99.0).collect()
}

fn binomial_pmf(n: u64, k: u64, p: f64) -> f64 {
    let ln_choose: f64 = (1..=k).map(|i| ((n - k + i) as f64).ln() - (i as f64).ln()).sum();
    (ln_choose + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln()).exp()
}

#[test]
fn bsc_block_of_twenty_has_binomial_levels() {
    let c = fixtures::bsc_011();
    let block = vec![0usize; 20];
    let d = block_level_distribution(&c, &block).unwrap();
    let levels = d.levels();
    let masses = d.masses_prior();
    let finite: Vec<usize> = (0..levels.len()).filter(|&i| levels[i].is_finite()).collect();
    assert_eq!(finite.len(), 21);
    // Level with k agreements: k ln 2(1−p) + (20−k) ln 2p, prior mass C(20,k)/2^20.
    for k in 0..=20u64 {
        let level = k as f64 * (2.0 * 0.89f64).ln() + (20 - k) as f64 * (2.0 * 0.11f64).ln();
        let i = finite
            .iter()
            .copied()
            .find(|&i| (levels[i] - level).abs() < 1e-9)
            .unwrap_or_else(|| panic!("level for k = {k} missing"));
        assert!((masses[i] - binomial_pmf(20, k, 0.5)).abs() < 1e-12);
    }
}

#[test]
fn single_letter_block_matches_slice_divergence() {
    let c = fixtures::bsc_011();
    let block = block_csd(&block_level_distribution(&c, &[0]).unwrap());
    let slice = channel_simulation_divergence(c.marginal_x(), c.posterior(0)).unwrap();
    assert!((block - slice).abs() < 1e-12);
    assert!((block - 0.78).abs() < 1e-12);
}

#[test]
fn identity_and_independent_blocks_are_exact() {
    for n in [1, 3, 7, 20] {
        let e = expected_block_csd(&fixtures::identity(), n, BlockMode::Exact).unwrap();
        assert!((e.dcs.value - n as f64).abs() < 1e-12);
        assert_eq!(e.dcs.stderr, 0.0);
        let e = expected_block_csd(&fixtures::independent(), n, BlockMode::Exact).unwrap();
        assert!(e.dcs.value.abs() < 1e-12);
    }
    let curve = redundancy_curve(&fixtures::independent(), &[1, 2, 4, 8], BlockMode::Exact).unwrap();
    assert!(curve.iter().all(|p| p.gap.abs() < 1e-12));
}

#[test]
fn cdf_identity_on_bsc_and_identity() {
    let bsc = fixtures::bsc_011();
    for (n, seed) in [(1, 1), (8, 2)] {
        let block = sample_y_block(&bsc, n, seed);
        assert!(verify_cdf_identity(&bsc, &block, &t_grid()).unwrap() < 1e-9);
    }
    let id = fixtures::identity();
    assert!(verify_cdf_identity(&id, &[0, 1, 1], &t_grid()).unwrap() < 1e-12);
}

#[test]
fn gaussian_clt_distance_is_small() {
    let pts = clt_check(&Channel::Gaussian(fixtures::gaussian()), &[1024], 100_000, 5).unwrap();
    assert!(pts[0].ks < 0.05, "KS = {}", pts[0].ks);
}

#[test]
fn clt_rejects_independent_channel() {
    let r = clt_check(&Channel::Discrete(fixtures::independent()), &[16], 100, 0);
    assert!(matches!(r, Err(Error::SingularChannel)));
}

#[test]
fn llr_variance_is_zero_for_singular_channels() {
    let s = llr_stats(&Channel::Discrete(fixtures::identity()));
    assert!(s.per_y_variance.iter().all(|&v| v == 0.0));
    let s = llr_stats(&Channel::Discrete(fixtures::independent()));
    assert!(s.mean_i.abs() < 1e-12 && s.var < 1e-24);
}

#[test]
fn first_index_decodes_to_first_proposal() {
    let c = fixtures::random_4x4();
    for seed in 0..20 {
        let z = CommonRandomness::new(&c, seed);
        assert_eq!(pfr_decode(1, &z).unwrap(), z.proposal_symbol(1));
    }
}

#[test]
fn round_trip_over_random_inputs_and_seeds() {
    let c = fixtures::random_4x4();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..10_000 {
        let x = rng.random_range(0..c.num_x());
        let z = CommonRandomness::new(&c, rng.random());
        let r = pfr_encode(&c, x, &z, DEFAULT_MAX_PROPOSALS).unwrap();
        assert_eq!(pfr_decode(r.index, &z).unwrap(), r.y_out);
        assert_eq!(pfr_encode(&c, x, &z, DEFAULT_MAX_PROPOSALS).unwrap(), r);
    }
}

#[test]
fn exactness_on_independent_and_point_mass_inputs() {
    assert!(exactness_test(&fixtures::independent(), 100_000, 3).unwrap() < 0.01);
    let point = DiscreteJointChannel::new(vec![vec![0.2, 0.5, 0.3]]).unwrap();
    assert!(exactness_test(&point, 100_000, 4).unwrap() < 0.01);
}

#[test]
fn tilt_two_on_bsc_squares_the_ratios() {
    let c = fixtures::bsc_011();
    let m = tilted_measure(&c, 2.0, 0).unwrap();
    let (a, b) = ((2.0f64 * 0.89).powi(2), (2.0f64 * 0.11).powi(2));
    assert!((m.pmf[0] - a / (a + b)).abs() < 1e-12);
    assert!((m.pmf[1] - b / (a + b)).abs() < 1e-12);
}

#[test]
fn block_tilt_stats_compose_by_counts() {
    let c = fixtures::bsc_011();
    let block = [0, 1, 1, 0, 1, 1, 1];
    let mixed = block_tilt_stats(&c, 0.8, &block).unwrap();
    let zero = block_tilt_stats(&c, 0.8, &[0]).unwrap();
    let one = block_tilt_stats(&c, 0.8, &[1]).unwrap();
    let s = 2.0 * zero.s_n_sq + 5.0 * one.s_n_sq;
    let m = 2.0 * zero.mu3 + 5.0 * one.mu3;
    assert!((mixed.s_n_sq - s).abs() <= 1e-12 * s);
    assert!((mixed.mu3 - m).abs() <= 1e-12 * m);
    let ind = block_tilt_stats(&fixtures::independent(), 0.8, &[0, 1, 1]).unwrap();
    assert!(ind.s_n_sq < 1e-24 && ind.mu3 < 1e-36);
}

#[test]
fn dominance_and_moments_on_random_channels() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let grid: Vec<f64> = (0..50).map(|i| 0.2 + 1.6 * i as f64 / 49.0).collect();
    for _ in 0..100 {
        let c = random_channel(&mut rng, 8, 8);
        let y = rng.random_range(0..8);
        let l2 = rng.random_range(0.1..2.5);
        let l1 = l2 - rng.random_range(0.01..0.5);
        assert!(stochastic_dominance_check(&c, y, l1, l2).unwrap().holds);
        for k in 1..=6 {
            assert!(moment_bound_check(&c, y, k, &grid).unwrap().holds, "k = {k}");
        }
    }
}

#[test]
fn dominance_sweep_on_bsc() {
    let c = fixtures::bsc_011();
    for i in 0..20 {
        let l2 = 0.1 + 0.1 * i as f64;
        for y in 0..2 {
            assert!(stochastic_dominance_check(&c, y, l2 - 0.05, l2).unwrap().holds);
        }
    }
    let r = stochastic_dominance_check(&fixtures::independent(), 0, 0.5, 1.0).unwrap();
    assert!(r.holds);
    assert_eq!(r.worst_margin, 0.0);
}
