use csdlab_core::blocks::{block_csd, block_level_distribution};
use csdlab_core::channel::{mutual_information, Channel, ChannelSpec, DiscreteJointChannel};
use csdlab_core::fixtures;
use csdlab_core::sampler::{pfr_decode, pfr_encode, CommonRandomness, DEFAULT_MAX_PROPOSALS};
use csdlab_core::tilting::cumulant;
use csdlab_core::width::{divergence_gap, expected_conditional_dcs, width_function};
use proptest::prelude::*;

fn distribution(k: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, k).prop_map(|w| {
        let s: f64 = w.iter().sum();
        w.into_iter().map(|v| v / s).collect()
    })
}

fn channel(max: usize) -> impl Strategy<Value = DiscreteJointChannel> {
    (2..=max, 2..=max)
        .prop_flat_map(|(nx, ny)| distribution(nx * ny).prop_map(move |w| (nx, ny, w)))
        .prop_map(|(nx, ny, w)| {
            let joint = (0..nx).map(|x| w[x * ny..(x + 1) * ny].to_vec()).collect();
            DiscreteJointChannel::new(joint).unwrap()
        })
}

fn pair(max: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (2..=max).prop_flat_map(|k| (distribution(k), distribution(k)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn gap_is_nonnegative_and_matches_width_entropy((p, q) in pair(8)) {
        let r = divergence_gap(&p, &q).unwrap();
        prop_assert!(r.d_kl_direct >= -1e-12);
        prop_assert!(r.d_cs >= r.d_kl_direct - 1e-9);
        prop_assert!(r.identity_residual() < 1e-9);
        prop_assert!((r.d_kl_direct - r.d_kl_integral).abs() < 1e-9);
    }

    #[test]
    fn width_function_is_a_density((p, q) in pair(8)) {
        let w = width_function(&p, &q).unwrap();
        prop_assert!((w.integral() - 1.0).abs() < 1e-12);
        let values = w.values();
        prop_assert!(values.windows(2).all(|v| v[0] >= v[1]));
    }

    #[test]
    fn expected_dcs_dominates_mutual_information(c in channel(4)) {
        let e = expected_conditional_dcs(&c);
        let i = mutual_information(&Channel::Discrete(c));
        prop_assert!(e >= i - 1e-9, "E D_CS {e} < I {i}");
    }

    #[test]
    fn cumulant_vanishes_at_one_and_is_convex(c in channel(4), lambda in -1.0f64..3.0) {
        for y in 0..c.num_y() {
            prop_assert!(cumulant(&c, 1.0, y).unwrap().value.abs() < 1e-12);
            prop_assert!(cumulant(&c, 0.0, y).unwrap().value <= 1e-12);
            prop_assert!(cumulant(&c, lambda, y).unwrap().d2 >= -1e-12);
        }
    }

    #[test]
    fn block_divergence_ignores_order(c in channel(3), seed in any::<u64>()) {
        let block = csdlab_core::blocks::sample_y_block(&c, 6, seed);
        let mut reversed = block.clone();
        reversed.reverse();
        let a = block_csd(&block_level_distribution(&c, &block).unwrap());
        let b = block_csd(&block_level_distribution(&c, &reversed).unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn encoded_index_decodes_to_output(c in channel(4), x_raw in 0usize..16, seed in any::<u64>()) {
        let x = x_raw % c.num_x();
        let z = CommonRandomness::new(&c, seed);
        let r = pfr_encode(&c, x, &z, DEFAULT_MAX_PROPOSALS).unwrap();
        prop_assert_eq!(pfr_decode(r.index, &z).unwrap(), r.y_out);
        prop_assert!(c.joint()[x][r.y_out] > 0.0);
    }
}

#[test]
fn fixture_files_match_bundled_channels() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    for (name, channel) in fixtures::all() {
        let text = std::fs::read_to_string(dir.join(format!("{name}.json"))).unwrap();
        let spec: ChannelSpec = serde_json::from_str(&text).unwrap();
        let from_file = spec.build().unwrap();
        match (&from_file, &channel) {
            (Channel::Discrete(a), Channel::Discrete(b)) => {
                for (ra, rb) in a.joint().iter().zip(b.joint()) {
                    for (va, vb) in ra.iter().zip(rb) {
                        assert!((va - vb).abs() < 1e-15, "{name}");
                    }
                }
            }
            (Channel::Gaussian(a), Channel::Gaussian(b)) => {
                assert_eq!((a.sigma_x(), a.sigma_n()), (b.sigma_x(), b.sigma_n()));
            }
            _ => panic!("{name}: channel kinds differ"),
        }
    }
}
