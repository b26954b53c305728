//! Poisson functional representation for discrete channels.
//!
//! Encoder and decoder share a stream of proposals `(Tᵢ, Yᵢ)`: `Tᵢ` are the
//! arrival times of a unit-rate Poisson process and `Yᵢ ~ P_Y` i.i.d. Given
//! `X = x` the encoder sends `N* = argminᵢ Tᵢ / r(x, Yᵢ)`, and `Y_{N*}` is an
//! exact sample of `P_{Y|X=x}`.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::DiscreteJointChannel;
use crate::numeric::{derive_seed, neg_x_ln_x, sum, Estimate, IntegerCategorical};
use crate::{nats_to_bits, Error, Result};

/// Default proposal budget. With finite `r_max` the search certifies after
/// about `r_max` proposals on average, so this is never reached by a sane
/// channel.
pub const DEFAULT_MAX_PROPOSALS: u64 = 1 << 24;

const SYMBOL_STREAM: u64 = 0;
const ARRIVAL_STREAM: u64 = 1;

/// Shared randomness: a seed and the output marginal it samples from.
#[derive(Debug, Clone, PartialEq)]
pub struct CommonRandomness {
    seed: u64,
    symbols: IntegerCategorical,
}

impl CommonRandomness {
    pub fn new(channel: &DiscreteJointChannel, seed: u64) -> Self {
        Self {
            seed,
            symbols: IntegerCategorical::new(channel.marginal_y()),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `Yᵢ` for `i ≥ 1`, fetched directly from the counter-based stream.
    pub fn proposal_symbol(&self, index: u64) -> usize {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(SYMBOL_STREAM);
        rng.set_word_pos(2 * u128::from(index - 1));
        self.symbols.sample(rng.next_u64())
    }

    /// Iterator over the arrival times `T₁ < T₂ < …`.
    pub fn arrivals(&self) -> Arrivals {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(ARRIVAL_STREAM);
        Arrivals { rng, time: 0.0 }
    }
}

/// Unit-rate Poisson arrival times.
pub struct Arrivals {
    rng: ChaCha8Rng,
    time: f64,
}

impl Iterator for Arrivals {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        // Uniform on (0, 1) from the top 53 bits, then an Exp(1) increment.
        let u = ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64);
        self.time += -u.ln();
        Some(self.time)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationResult {
    /// The selected proposal index, starting at one.
    pub index: u64,
    pub y_out: usize,
    pub proposals_examined: u64,
}

pub fn pfr_encode(channel: &DiscreteJointChannel, x: usize, z: &CommonRandomness, max_proposals: u64) -> Result<SimulationResult> {
    if x >= channel.num_x() {
        return Err(Error::InvalidArgument(format!("input symbol {x} out of range")));
    }
    let ratios: Vec<f64> = (0..channel.num_y()).map(|y| channel.ratio(x, y)).collect();
    let r_max = ratios.iter().copied().fold(0.0, f64::max);
    let mut best = f64::INFINITY;
    let mut chosen: Option<(u64, usize)> = None;
    for (i, t) in (1..).zip(z.arrivals()) {
        if t / r_max >= best {
            let (index, y_out) = chosen.expect("a finite best score has a selection");
            return Ok(SimulationResult {
                index,
                y_out,
                proposals_examined: i - 1,
            });
        }
        if i > max_proposals {
            return Err(Error::ProposalBudgetExceeded { budget: max_proposals });
        }
        let y = z.proposal_symbol(i);
        let r = ratios[y];
        if r > 0.0 && t / r < best {
            best = t / r;
            chosen = Some((i, y));
        }
    }
    unreachable!("the arrival stream is infinite")
}

pub fn pfr_decode(index: u64, z: &CommonRandomness) -> Result<usize> {
    if index == 0 {
        return Err(Error::InvalidArgument("proposal indices start at 1".into()));
    }
    Ok(z.proposal_symbol(index))
}

/// `H(N* | Z)` in bits, averaged over `num_seeds` seeds. For each seed the
/// conditional law of `N*` is computed exactly by encoding every input symbol.
pub fn conditional_index_entropy(
    channel: &DiscreteJointChannel,
    num_seeds: usize,
    seed0: u64,
    max_proposals: u64,
) -> Result<Estimate> {
    if num_seeds < 100 {
        return Err(Error::InvalidArgument(format!("need at least 100 seeds, got {num_seeds}")));
    }
    let entropies: Vec<f64> = (0..num_seeds)
        .into_par_iter()
        .map(|s| {
            let z = CommonRandomness::new(channel, derive_seed(seed0, s as u64));
            let mut pmf: Vec<(u64, f64)> = Vec::with_capacity(channel.num_x());
            for x in 0..channel.num_x() {
                let index = pfr_encode(channel, x, &z, max_proposals)?.index;
                let px = channel.marginal_x()[x];
                match pmf.iter_mut().find(|e| e.0 == index) {
                    Some(e) => e.1 += px,
                    None => pmf.push((index, px)),
                }
            }
            Ok(nats_to_bits(sum(pmf.iter().map(|e| neg_x_ln_x(e.1)))))
        })
        .collect::<Result<_>>()?;
    Ok(Estimate::from_samples(&entropies))
}

/// Total-variation distance between the empirical law of `(X, y_out)` over
/// `samples` independent runs and the channel's joint law.
pub fn exactness_test(channel: &DiscreteJointChannel, samples: usize, seed: u64) -> Result<f64> {
    let counts = simulate_joint_counts(channel, samples, seed)?;
    let ny = channel.num_y();
    let n = samples as f64;
    Ok(0.5
        * sum(counts
            .iter()
            .enumerate()
            .map(|(k, &c)| (c as f64 / n - channel.joint()[k / ny][k % ny]).abs())))
}

/// Counts of `(x, y_out)` pairs, flattened row-major.
pub fn simulate_joint_counts(channel: &DiscreteJointChannel, samples: usize, seed: u64) -> Result<Vec<u64>> {
    let ny = channel.num_y();
    let cells = channel.num_x() * ny;
    let inputs = IntegerCategorical::new(channel.marginal_x());
    (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 2 * i as u64));
            let x = inputs.sample(rng.next_u64());
            let z = CommonRandomness::new(channel, derive_seed(seed, 2 * i as u64 + 1));
            let out = pfr_encode(channel, x, &z, DEFAULT_MAX_PROPOSALS)?;
            Ok(x * ny + out.y_out)
        })
        .try_fold(
            || vec![0u64; cells],
            |mut acc, cell: Result<usize>| {
                acc[cell?] += 1;
                Ok(acc)
            },
        )
        .try_reduce(
            || vec![0u64; cells],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                Ok(a)
            },
        )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn independent_channel_always_picks_first() {
        let c = DiscreteJointChannel::independent(&[0.3, 0.7], &[0.4, 0.6]).unwrap();
        for seed in 0..50 {
            let z = CommonRandomness::new(&c, seed);
            for x in 0..2 {
                let r = pfr_encode(&c, x, &z, 100).unwrap();
                assert_eq!(r.index, 1);
                assert_eq!(pfr_decode(1, &z).unwrap(), r.y_out);
            }
        }
    }

    #[test]
    fn encoding_is_deterministic_and_decodable() {
        let c = DiscreteJointChannel::bsc(0.11).unwrap();
        for seed in 0..200 {
            let z = CommonRandomness::new(&c, seed);
            for x in 0..2 {
                let a = pfr_encode(&c, x, &z, DEFAULT_MAX_PROPOSALS).unwrap();
                let b = pfr_encode(&c, x, &z, DEFAULT_MAX_PROPOSALS).unwrap();
                assert_eq!(a, b);
                assert_eq!(pfr_decode(a.index, &z).unwrap(), a.y_out);
            }
        }
    }

    #[test]
    fn arrivals_increase() {
        let c = DiscreteJointChannel::bsc(0.25).unwrap();
        let t: Vec<f64> = CommonRandomness::new(&c, 9).arrivals().take(1000).collect();
        assert!(t.windows(2).all(|w| w[0] < w[1]));
        // The mean gap of a unit-rate process is one.
        assert!((t[999] / 1000.0 - 1.0).abs() < 0.15);
    }

    #[test]
    fn proposal_stream_is_random_access() {
        let c = DiscreteJointChannel::bsc(0.11).unwrap();
        let z = CommonRandomness::new(&c, 42);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        rng.set_stream(SYMBOL_STREAM);
        let cat = IntegerCategorical::new(c.marginal_y());
        for i in 1..=64 {
            assert_eq!(z.proposal_symbol(i), cat.sample(rng.next_u64()));
        }
    }

    #[test]
    fn tiny_budget_is_reported() {
        let c = DiscreteJointChannel::identity(4).unwrap();
        let hit = (0..100).any(|seed| {
            let z = CommonRandomness::new(&c, seed);
            matches!(pfr_encode(&c, 0, &z, 1), Err(Error::ProposalBudgetExceeded { budget: 1 }))
        });
        assert!(hit);
    }

    #[test]
    fn requires_enough_seeds() {
        let c = DiscreteJointChannel::bsc(0.11).unwrap();
        assert!(conditional_index_entropy(&c, 99, 0, DEFAULT_MAX_PROPOSALS).is_err());
    }
}
