//! Typicality events on output blocks and the Chebyshev constant bounding the
//! probability of their union.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tilted_measure;
use crate::channel::{llr_stats, DiscreteJointChannel};
use crate::numeric::{derive_seed, sum, IntegerCategorical};
use crate::{Error, Result};

/// `{λ̲, λ̲ + ε, …, λ̲ + kε, λ̄}` with `k` the largest integer such that
/// `λ̲ + kε < λ̄`.
pub fn k_epsilon_grid(lambda_lo: f64, lambda_hi: f64, epsilon: f64) -> Vec<f64> {
    let mut grid = Vec::new();
    let mut k = 0u64;
    loop {
        let l = lambda_lo + k as f64 * epsilon;
        if l >= lambda_hi {
            break;
        }
        grid.push(l);
        k += 1;
    }
    grid.push(lambda_hi);
    grid
}

/// Per-letter moments needed by the typicality events, indexed by
/// `(λ index, y, j − 1)`.
struct MomentTable {
    lambdas: Vec<f64>,
    /// `E_{Q^λ_{X|y}}|ln r|^j` for `j = 1, 2, 3`.
    abs: Vec<Vec<[f64; 3]>>,
    /// `E_{Q^λ_{X|y}}(ln r)^j`.
    raw: Vec<Vec<[f64; 3]>>,
    /// `E_Y` of the above.
    abs_target: Vec<[f64; 3]>,
    raw_target: Vec<[f64; 3]>,
    /// `κ_y = E_{P_{X|y}} ln r`.
    kappa: Vec<f64>,
    mutual_information: f64,
}

impl MomentTable {
    fn new(channel: &DiscreteJointChannel, lambda_grid: &[f64]) -> Result<Self> {
        let ny = channel.num_y();
        let py = channel.marginal_y();
        let mut abs = Vec::with_capacity(lambda_grid.len());
        let mut raw = Vec::with_capacity(lambda_grid.len());
        let mut abs_target = Vec::with_capacity(lambda_grid.len());
        let mut raw_target = Vec::with_capacity(lambda_grid.len());
        for &lambda in lambda_grid {
            let mut a = Vec::with_capacity(ny);
            let mut r = Vec::with_capacity(ny);
            for y in 0..ny {
                let m = tilted_measure(channel, lambda, y)?;
                a.push([m.abs_moment(1), m.abs_moment(2), m.abs_moment(3)]);
                r.push([m.raw_moment(1), m.raw_moment(2), m.raw_moment(3)]);
            }
            let target = |v: &Vec<[f64; 3]>| -> [f64; 3] {
                std::array::from_fn(|j| sum((0..ny).map(|y| py[y] * v[y][j])))
            };
            abs_target.push(target(&a));
            raw_target.push(target(&r));
            abs.push(a);
            raw.push(r);
        }
        let kappa = (0..ny)
            .map(|y| Ok(tilted_measure(channel, 1.0, y)?.raw_moment(1)))
            .collect::<Result<_>>()?;
        Ok(Self {
            lambdas: lambda_grid.to_vec(),
            abs,
            raw,
            abs_target,
            raw_target,
            kappa,
            mutual_information: llr_stats(&channel.clone().into()).mean_i,
        })
    }

    fn evaluate(&self, counts: &[usize], epsilon: f64, conditional_mean: Option<f64>) -> TypicalityFlags {
        let n: usize = counts.iter().sum();
        let nf = n as f64;
        let avg = |v: &[f64]| sum(counts.iter().zip(v).map(|(&c, &x)| c as f64 * x)) / nf;
        let mean = conditional_mean.unwrap_or_else(|| avg(&self.kappa));
        let mean_deviation = (mean - self.mutual_information).abs();
        let mut moment_events = Vec::with_capacity(6 * self.lambdas.len());
        for (li, &lambda) in self.lambdas.iter().enumerate() {
            for j in 0..3 {
                for raw in [false, true] {
                    let (table, target) = if raw {
                        (&self.raw[li], self.raw_target[li][j])
                    } else {
                        (&self.abs[li], self.abs_target[li][j])
                    };
                    let per_y: Vec<f64> = table.iter().map(|m| m[j]).collect();
                    let deviation = (avg(&per_y) - target).abs();
                    moment_events.push(MomentEvent {
                        lambda,
                        j: j as u8 + 1,
                        raw,
                        deviation,
                        fired: deviation > epsilon,
                    });
                }
            }
        }
        let mean_event = mean_deviation > epsilon;
        let atypical = mean_event || moment_events.iter().any(|e| e.fired);
        TypicalityFlags {
            mean_event,
            mean_deviation,
            moment_events,
            atypical,
        }
    }
}

/// One of the moment concentration events at a single `(λ, j)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEvent {
    pub lambda: f64,
    pub j: u8,
    /// Raw moments `(ln r)^j` if set, absolute moments `|ln r|^j` otherwise.
    pub raw: bool,
    pub deviation: f64,
    pub fired: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypicalityFlags {
    /// The conditional-mean event: `|ι − I| > ε`.
    pub mean_event: bool,
    pub mean_deviation: f64,
    pub moment_events: Vec<MomentEvent>,
    /// Whether any event fired.
    pub atypical: bool,
}

/// Evaluates every typicality event for `y_block`. `conditional_mean` is the
/// decoder-set conditional mean `E[(1/n) Σ ln r | Yⁿ, Z]`; without it the
/// conditioning set is the full space and the mean is `(1/n) Σ κ_{yᵢ}`.
pub fn typicality_check(
    channel: &DiscreteJointChannel,
    y_block: &[usize],
    epsilon: f64,
    lambda_grid: &[f64],
    conditional_mean: Option<f64>,
) -> Result<TypicalityFlags> {
    validate(epsilon, lambda_grid)?;
    if y_block.is_empty() {
        return Err(Error::InvalidArgument("empty output block".into()));
    }
    let table = MomentTable::new(channel, lambda_grid)?;
    let mut counts = vec![0usize; channel.num_y()];
    for &y in y_block {
        *counts
            .get_mut(y)
            .ok_or_else(|| Error::InvalidArgument(format!("output symbol {y} out of range")))? += 1;
    }
    Ok(table.evaluate(&counts, epsilon, conditional_mean))
}

fn validate(epsilon: f64, lambda_grid: &[f64]) -> Result<()> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidEpsilon {
            epsilon,
            reason: "must be positive and finite".into(),
        });
    }
    if lambda_grid.is_empty() {
        return Err(Error::InvalidArgument("empty λ grid".into()));
    }
    Ok(())
}

/// `C = Var[ln r]/ε² + Σ_{λ ∈ grid} Σ_{j=1..3} 2 E_{P_Y Q^λ}|ln r|^{2j} / ε²`,
/// the union of the Chebyshev bounds on every event.
pub fn typicality_constant(channel: &DiscreteJointChannel, epsilon: f64, lambda_grid: &[f64]) -> Result<f64> {
    validate(epsilon, lambda_grid)?;
    let var = llr_stats(&channel.clone().into()).var;
    let py = channel.marginal_y();
    let mut terms = vec![var];
    for &lambda in lambda_grid {
        for y in 0..channel.num_y() {
            let m = tilted_measure(channel, lambda, y)?;
            for j in 1..=3 {
                terms.push(2.0 * py[y] * m.abs_moment(2 * j));
            }
        }
    }
    Ok(sum(terms) / (epsilon * epsilon))
}

/// Monte-Carlo estimate of the atypical probability at one blocklength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TypicalitySweep {
    pub n: usize,
    pub blocks: usize,
    pub atypical_blocks: usize,
    pub frequency: f64,
    /// `C`.
    pub constant: f64,
    /// Whether `n · frequency ≤ C`.
    pub holds: bool,
}

pub fn typicality_sweep(
    channel: &DiscreteJointChannel,
    n: usize,
    epsilon: f64,
    lambda_grid: &[f64],
    blocks: usize,
    seed: u64,
) -> Result<TypicalitySweep> {
    validate(epsilon, lambda_grid)?;
    if n == 0 || blocks == 0 {
        return Err(Error::InvalidArgument("blocklength and block count must be positive".into()));
    }
    let table = MomentTable::new(channel, lambda_grid)?;
    let constant = typicality_constant(channel, epsilon, lambda_grid)?;
    let cat = IntegerCategorical::new(channel.marginal_y());
    let atypical_blocks = (0..blocks)
        .into_par_iter()
        .filter(|&b| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, b as u64));
            let mut counts = vec![0usize; channel.num_y()];
            for _ in 0..n {
                counts[cat.sample(rng.next_u64())] += 1;
            }
            table.evaluate(&counts, epsilon, None).atypical
        })
        .count();
    let frequency = atypical_blocks as f64 / blocks as f64;
    Ok(TypicalitySweep {
        n,
        blocks,
        atypical_blocks,
        frequency,
        constant,
        holds: frequency * n as f64 <= constant,
    })
}
