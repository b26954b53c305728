//! Exact block computations for i.i.d. product channels.
//!
//! Given an output block `yⁿ`, the law of `S = Σᵢ ln r(Xᵢ|yᵢ)` under
//! `P_X^{×n}` is obtained by convolving the per-letter laws level by level.
//! Everything the block width function needs is a function of that law.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{llr_stats, Channel, DiscreteJointChannel, GaussianChannel};
use crate::numeric::{
    derive_seed, ks_distance_normal, levels_coincide, log_add_exp, sum, CompensatedSum, Estimate, IntegerCategorical,
};
use crate::width::WidthFunction;
use crate::{nats_to_bits, Error, Result};

/// Default cap on the number of distinct levels of a block law.
pub const DEFAULT_LEVEL_CAP: usize = 2_000_000;

/// The exact law of `S = Σᵢ ln r(Xᵢ|yᵢ)` under the prior product measure.
///
/// Finite levels are stored sorted and distinct. The zero-ratio bucket
/// (`S = −∞`) is kept implicitly through the log of the finite prior mass.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelDistribution {
    levels: Vec<f64>,
    log_prior: Vec<f64>,
    log_finite_mass: f64,
    n: usize,
}

impl LevelDistribution {
    /// The law of the empty sum.
    pub fn unit() -> Self {
        Self {
            levels: vec![0.0],
            log_prior: vec![0.0],
            log_finite_mass: 0.0,
            n: 0,
        }
    }

    /// Per-letter law of `ln r(X|y)` for `X ~ P_X`.
    pub fn letter(channel: &DiscreteJointChannel, y: usize) -> Self {
        let mut atoms: Vec<(f64, f64)> = (0..channel.num_x())
            .filter(|&x| channel.joint()[x][y] > 0.0)
            .map(|x| (channel.log_ratio(x, y), channel.marginal_x()[x].ln()))
            .collect();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (levels, log_prior) = merge_sorted(atoms);
        let finite = sum((0..channel.num_x()).filter(|&x| channel.joint()[x][y] > 0.0).map(|x| channel.marginal_x()[x]));
        Self {
            levels,
            log_prior,
            log_finite_mass: finite.ln(),
            n: 1,
        }
    }

    /// Law of the sum of independent variables with laws `self` and `other`.
    pub fn convolve(&self, other: &Self, cap: usize) -> Result<Self> {
        // Each atom of the smaller factor contributes one sorted run.
        let (big, small) = if self.levels.len() >= other.levels.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut atoms = Vec::with_capacity(big.levels.len() * small.levels.len());
        for (&b, &lb) in small.levels.iter().zip(&small.log_prior) {
            atoms.extend(big.levels.iter().zip(&big.log_prior).map(|(&a, &la)| (a + b, la + lb)));
        }
        // The stable sort detects the runs and merges them.
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (levels, log_prior) = merge_sorted(atoms);
        if levels.len() > cap {
            return Err(Error::BlockTooLarge {
                levels: levels.len(),
                cap,
            });
        }
        Ok(Self {
            levels,
            log_prior,
            log_finite_mass: self.log_finite_mass + other.log_finite_mass,
            n: self.n + other.n,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Sorted distinct finite levels, in nats.
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// `ln P[S = ℓ]` per finite level.
    pub fn log_prior_masses(&self) -> &[f64] {
        &self.log_prior
    }

    /// `P[S = ℓ]` per finite level.
    pub fn masses_prior(&self) -> Vec<f64> {
        self.log_prior.iter().map(|l| l.exp()).collect()
    }

    /// `Q[S = ℓ] = e^ℓ P[S = ℓ]` per finite level.
    pub fn masses_post(&self) -> Vec<f64> {
        self.levels.iter().zip(&self.log_prior).map(|(l, p)| (l + p).exp()).collect()
    }

    /// `P[S = −∞]`. The posterior puts no mass there.
    pub fn zero_ratio_mass(&self) -> f64 {
        -self.log_finite_mass.exp_m1()
    }

    /// The P-width function of the block pair.
    pub fn width_function(&self) -> WidthFunction {
        WidthFunction::from_sorted_log_atoms(self.levels.clone(), self.log_prior.clone(), self.zero_ratio_mass())
    }

    /// `P[S ≥ threshold]` in log domain.
    pub fn log_prior_tail(&self, threshold: f64) -> f64 {
        let j = self.first_at_or_above(threshold);
        crate::numeric::log_sum_exp(self.log_prior[j..].iter().copied())
    }

    /// Index of the first level `≥ threshold`, with coincident levels counted
    /// as equal.
    pub(crate) fn first_at_or_above(&self, threshold: f64) -> usize {
        self.levels.partition_point(|&l| l < threshold && !levels_coincide(l, threshold))
    }
}

fn merge_sorted(atoms: Vec<(f64, f64)>) -> (Vec<f64>, Vec<f64>) {
    let mut levels: Vec<f64> = Vec::with_capacity(atoms.len());
    let mut masses: Vec<f64> = Vec::with_capacity(atoms.len());
    let mut anchor = f64::NAN;
    for (l, lp) in atoms {
        if !levels.is_empty() && levels_coincide(anchor, l) {
            let m = masses.last_mut().expect("parallel vectors");
            *m = log_add_exp(*m, lp);
        } else {
            anchor = l;
            levels.push(l);
            masses.push(lp);
        }
    }
    (levels, masses)
}

/// Exact law of `Σᵢ ln r(Xᵢ|yᵢ)` for the block `y_block`. The block is sorted
/// first, so any permutation of it yields bit-identical output.
pub fn block_level_distribution(channel: &DiscreteJointChannel, y_block: &[usize]) -> Result<LevelDistribution> {
    block_level_distribution_capped(channel, y_block, DEFAULT_LEVEL_CAP)
}

pub fn block_level_distribution_capped(
    channel: &DiscreteJointChannel,
    y_block: &[usize],
    cap: usize,
) -> Result<LevelDistribution> {
    if y_block.is_empty() {
        return Err(Error::InvalidArgument("empty output block".into()));
    }
    if let Some(&y) = y_block.iter().find(|&&y| y >= channel.num_y()) {
        return Err(Error::InvalidArgument(format!("output symbol {y} out of range")));
    }
    let mut sorted = y_block.to_vec();
    sorted.sort_unstable();
    let letters: Vec<LevelDistribution> = (0..channel.num_y()).map(|y| LevelDistribution::letter(channel, y)).collect();
    let mut dist = LevelDistribution::unit();
    for &y in &sorted {
        dist = dist.convolve(&letters[y], cap)?;
    }
    Ok(dist)
}

/// Block `D_CS` in bits.
pub fn block_csd(dist: &LevelDistribution) -> f64 {
    if dist.len() == 1 {
        // One level ℓ carrying all posterior mass: the width is e^{−ℓ} on
        // (0, e^ℓ] and D_CS = ℓ exactly.
        return nats_to_bits(dist.levels[0]);
    }
    nats_to_bits(dist.width_function().d_cs_nats())
}

/// Block KL divergence `D(P_{Xⁿ|yⁿ} ‖ P_{Xⁿ}) = E_Q[S]` in bits.
pub fn block_kl(dist: &LevelDistribution) -> f64 {
    if dist.len() == 1 {
        return nats_to_bits(dist.levels[0]);
    }
    nats_to_bits(sum(dist.levels.iter().zip(&dist.log_prior).map(|(l, p)| (l + p).exp() * l)))
}

/// Whether every output symbol induces the same per-letter level law, in which
/// case block divergences depend on `n` only.
pub fn is_y_symmetric(channel: &DiscreteJointChannel) -> bool {
    let first = LevelDistribution::letter(channel, 0);
    (1..channel.num_y()).all(|y| {
        let other = LevelDistribution::letter(channel, y);
        other.len() == first.len()
            && levels_coincide(other.log_finite_mass, first.log_finite_mass)
            && first.levels.iter().zip(&other.levels).all(|(&a, &b)| levels_coincide(a, b))
            && first.log_prior.iter().zip(&other.log_prior).all(|(&a, &b)| levels_coincide(a, b))
    })
}

/// How [`expected_block_csd`] averages over `Yⁿ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum BlockMode {
    /// One block suffices because the channel is y-symmetric.
    Exact,
    /// Average over `samples` i.i.d. draws of `Yⁿ`.
    MonteCarlo { samples: usize, seed: u64 },
}

impl BlockMode {
    pub fn label(&self) -> &'static str {
        match self {
            BlockMode::Exact => "exact",
            BlockMode::MonteCarlo { .. } => "monte_carlo",
        }
    }
}

/// `E_{Yⁿ}[D_CS]` together with the paired gap `E_{Yⁿ}[D_CS − D_KL]`, in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockExpectation {
    pub dcs: Estimate,
    pub gap: Estimate,
}

/// Draws an i.i.d. output block from `P_Y`.
pub fn sample_y_block(channel: &DiscreteJointChannel, n: usize, seed: u64) -> Vec<usize> {
    let cat = IntegerCategorical::new(channel.marginal_y());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| cat.sample(rng.next_u64())).collect()
}

pub fn expected_block_csd(channel: &DiscreteJointChannel, n: usize, mode: BlockMode) -> Result<BlockExpectation> {
    expected_block_csd_capped(channel, n, mode, DEFAULT_LEVEL_CAP)
}

pub fn expected_block_csd_capped(
    channel: &DiscreteJointChannel,
    n: usize,
    mode: BlockMode,
    cap: usize,
) -> Result<BlockExpectation> {
    if n == 0 {
        return Err(Error::InvalidArgument("blocklength must be positive".into()));
    }
    match mode {
        BlockMode::Exact => {
            if !is_y_symmetric(channel) {
                return Err(Error::SymmetryRequired);
            }
            let dist = block_level_distribution_capped(channel, &vec![0; n], cap)?;
            let dcs = block_csd(&dist);
            Ok(BlockExpectation {
                dcs: Estimate::exact(dcs),
                gap: Estimate::exact(dcs - block_kl(&dist)),
            })
        }
        BlockMode::MonteCarlo { samples, seed } => {
            if samples == 0 {
                return Err(Error::InvalidArgument("monte-carlo mode needs at least one sample".into()));
            }
            let draws: Vec<(f64, f64)> = (0..samples)
                .into_par_iter()
                .map(|i| {
                    let y_block = sample_y_block(channel, n, derive_seed(seed, i as u64));
                    let dist = block_level_distribution_capped(channel, &y_block, cap)?;
                    let dcs = block_csd(&dist);
                    Ok((dcs, dcs - block_kl(&dist)))
                })
                .collect::<Result<_>>()?;
            let dcs: Vec<f64> = draws.iter().map(|d| d.0).collect();
            let gap: Vec<f64> = draws.iter().map(|d| d.1).collect();
            Ok(BlockExpectation {
                dcs: Estimate::from_samples(&dcs),
                gap: Estimate::from_samples(&gap),
            })
        }
    }
}

/// One point of the redundancy curve; all quantities in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RedundancyCurvePoint {
    pub n: usize,
    pub expected_dcs: f64,
    /// `n · I(X;Y)`.
    pub block_mi: f64,
    /// `E[D_CS] − n I`, evaluated as the paired mean of `D_CS − D_KL`.
    pub gap: f64,
    /// `gap / lb n`, absent for `n = 1`.
    pub gap_over_lbn: Option<f64>,
    pub stderr: f64,
}

pub fn redundancy_curve(channel: &DiscreteJointChannel, n_list: &[usize], mode: BlockMode) -> Result<Vec<RedundancyCurvePoint>> {
    redundancy_curve_capped(channel, n_list, mode, DEFAULT_LEVEL_CAP)
}

pub fn redundancy_curve_capped(
    channel: &DiscreteJointChannel,
    n_list: &[usize],
    mode: BlockMode,
    cap: usize,
) -> Result<Vec<RedundancyCurvePoint>> {
    if n_list.is_empty() || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("n_list must be non-empty and strictly increasing".into()));
    }
    let mi = crate::channel::mutual_information(&Channel::Discrete(channel.clone()));
    n_list
        .par_iter()
        .enumerate()
        .map(|(k, &n)| {
            let mode = match mode {
                BlockMode::Exact => BlockMode::Exact,
                BlockMode::MonteCarlo { samples, seed } => BlockMode::MonteCarlo {
                    samples,
                    seed: derive_seed(seed, k as u64),
                },
            };
            let e = expected_block_csd_capped(channel, n, mode, cap)?;
            let gap = e.gap.value;
            Ok(RedundancyCurvePoint {
                n,
                expected_dcs: e.dcs.value,
                block_mi: n as f64 * mi,
                gap,
                gap_over_lbn: (n >= 2).then(|| gap / (n as f64).log2()),
                stderr: e.gap.stderr,
            })
        })
        .collect()
}

/// Least-squares slope of `ys` against `xs`.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = sum(xs.iter().copied()) / n;
    let my = sum(ys.iter().copied()) / n;
    let sxy = sum(xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)));
    let sxx = sum(xs.iter().map(|x| (x - mx).powi(2)));
    sxy / sxx
}

/// Both sides of the finite-n CDF identity for `(ln H_n − b)/√n` at one `t`,
/// where `b` is the block KL divergence in nats.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdfSides {
    /// `∫_0^{e^τ} w(h) dh` with `τ = b + √n t`.
    pub width_side: f64,
    /// `Q[S < τ] + Σ_{ℓ ≥ τ} Q[S = ℓ] e^{τ − ℓ}`.
    pub level_side: f64,
}

pub fn cdf_sides(dist: &LevelDistribution, t: f64) -> CdfSides {
    let b = sum(dist.levels.iter().zip(&dist.log_prior).map(|(l, p)| (l + p).exp() * l));
    let tau = b + (dist.n as f64).sqrt() * t;
    let w = dist.width_function();
    let levels = w.log_levels();
    let widths = w.log_widths();

    let mut width_side = CompensatedSum::new();
    for j in 0..levels.len() {
        let prev = if j == 0 { f64::NEG_INFINITY } else { levels[j - 1] };
        if levels[j] <= tau {
            width_side.add((levels[j] + widths[j]).exp() * -(prev - levels[j]).exp_m1());
        } else {
            if prev < tau {
                width_side.add((tau + widths[j]).exp() * -(prev - tau).exp_m1());
            }
            break;
        }
    }

    let mut level_side = CompensatedSum::new();
    for (&l, &p) in dist.levels.iter().zip(&dist.log_prior) {
        if l < tau {
            level_side.add((l + p).exp());
        } else {
            level_side.add((tau + p).exp());
        }
    }
    CdfSides {
        width_side: width_side.value(),
        level_side: level_side.value(),
    }
}

/// Sup over `t_grid` of the discrepancy between the two sides of the CDF
/// identity.
pub fn verify_cdf_identity(channel: &DiscreteJointChannel, y_block: &[usize], t_grid: &[f64]) -> Result<f64> {
    let dist = block_level_distribution(channel, y_block)?;
    Ok(t_grid
        .iter()
        .map(|&t| {
            let s = cdf_sides(&dist, t);
            (s.width_side - s.level_side).abs()
        })
        .fold(0.0, f64::max))
}

/// Kolmogorov–Smirnov distance of the normalised centred sum at one `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CltPoint {
    pub n: usize,
    pub ks: f64,
    pub samples: usize,
    /// `E_Y[σ²_Y]`, the variance of the limit law.
    pub limit_variance: f64,
}

/// Samples `Σᵢ (ln r(Xᵢ|Yᵢ) − κ_{Yᵢ}) / √n` under the joint law and measures
/// its distance to `N(0, E_Y[σ²_Y])`.
pub fn clt_check(channel: &Channel, n_list: &[usize], samples: usize, seed: u64) -> Result<Vec<CltPoint>> {
    if samples == 0 || n_list.iter().any(|&n| n == 0) {
        return Err(Error::InvalidArgument("samples and blocklengths must be positive".into()));
    }
    let stats = llr_stats(channel);
    let limit_variance = stats.mean_conditional_variance;
    if limit_variance <= 0.0 {
        return Err(Error::SingularChannel);
    }
    let sampler: Box<dyn Fn(usize, u64) -> f64 + Sync> = match channel {
        Channel::Discrete(c) => {
            let table = CenteredTable::new(c);
            Box::new(move |n, s| table.normalized_sum(n, s))
        }
        Channel::Gaussian(g) => {
            let g = *g;
            Box::new(move |n, s| gaussian_normalized_sum(&g, n, s))
        }
    };
    n_list
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let mut values: Vec<f64> = (0..samples)
                .into_par_iter()
                .map(|i| sampler(n, derive_seed(seed, (k * samples + i) as u64)))
                .collect();
            Ok(CltPoint {
                n,
                ks: ks_distance_normal(&mut values, limit_variance),
                samples,
                limit_variance,
            })
        })
        .collect()
}

struct CenteredTable {
    joint: IntegerCategorical,
    /// `ln r(x|y) − κ_y` indexed by the flattened `(x, y)` pair.
    centered: Vec<f64>,
}

impl CenteredTable {
    fn new(c: &DiscreteJointChannel) -> Self {
        let ny = c.num_y();
        let flat: Vec<f64> = c.joint().iter().flatten().copied().collect();
        let kappa: Vec<f64> = (0..ny)
            .map(|y| {
                let post = c.posterior(y);
                sum((0..c.num_x()).filter(|&x| post[x] > 0.0).map(|x| post[x] * c.log_ratio(x, y)))
            })
            .collect();
        let centered = (0..flat.len())
            .map(|k| {
                let (x, y) = (k / ny, k % ny);
                if flat[k] > 0.0 {
                    c.log_ratio(x, y) - kappa[y]
                } else {
                    0.0
                }
            })
            .collect();
        Self {
            joint: IntegerCategorical::new(&flat),
            centered,
        }
    }

    fn normalized_sum(&self, n: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut acc = CompensatedSum::new();
        for _ in 0..n {
            acc.add(self.centered[self.joint.sample(rng.next_u64())]);
        }
        acc.value() / (n as f64).sqrt()
    }
}

fn gaussian_normalized_sum(g: &GaussianChannel, n: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = CompensatedSum::new();
    for _ in 0..n {
        let zx: f64 = StandardNormal.sample(&mut rng);
        let zn: f64 = StandardNormal.sample(&mut rng);
        let x = g.sigma_x() * zx;
        let y = x + g.sigma_n() * zn;
        acc.add(g.log_ratio(x, y) - g.conditional_kl_nats(y));
    }
    acc.value() / (n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::width::{channel_simulation_divergence, kl_divergence, KlMethod};

    fn binomial_pmf(n: u64, k: u64, p: f64) -> f64 {
        let mut ln_c = 0.0;
        for i in 0..k {
            ln_c += ((n - i) as f64).ln() - ((i + 1) as f64).ln();
        }
        (ln_c + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln()).exp()
    }

    #[test]
    fn single_letter_bsc() {
        let p = 0.11;
        let c = DiscreteJointChannel::bsc(p).unwrap();
        let d = block_level_distribution(&c, &[0]).unwrap();
        assert_eq!(d.len(), 2);
        assert!((d.levels()[0] - (2.0 * p).ln()).abs() < 1e-15);
        assert!((d.levels()[1] - (2.0 * (1.0 - p)).ln()).abs() < 1e-15);
        assert!(d.masses_prior().iter().all(|m| (m - 0.5).abs() < 1e-15));
        assert!((block_csd(&d) - (1.0 - 2.0 * p)).abs() < 1e-14);
    }

    #[test]
    fn identity_block_has_one_level() {
        let c = DiscreteJointChannel::identity(2).unwrap();
        for n in [1usize, 5, 17] {
            let y: Vec<usize> = (0..n).map(|i| i % 2).collect();
            let d = block_level_distribution(&c, &y).unwrap();
            assert_eq!(d.len(), 1);
            assert!((d.levels()[0] - n as f64 * std::f64::consts::LN_2).abs() < 1e-12);
            assert!((d.masses_prior()[0] - 0.5f64.powi(n as i32)).abs() < 1e-15);
            assert!((d.zero_ratio_mass() - (1.0 - 0.5f64.powi(n as i32))).abs() < 1e-15);
            assert!((block_csd(&d) - n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn bsc_block_levels_follow_binomial() {
        let p = 0.11;
        let c = DiscreteJointChannel::bsc(p).unwrap();
        let d = block_level_distribution(&c, &[0; 20]).unwrap();
        assert_eq!(d.len(), 21);
        let prior = d.masses_prior();
        let post = d.masses_post();
        // Level k counts the agreements between xⁿ and yⁿ.
        for k in 0..=20u64 {
            let expect_prior = binomial_pmf(20, k, 0.5);
            let expect_post = binomial_pmf(20, k, 1.0 - p);
            assert!((prior[k as usize] - expect_prior).abs() < 1e-15);
            assert!((post[k as usize] - expect_post).abs() < 1e-13);
        }
    }

    #[test]
    fn two_letter_block_matches_brute_force() {
        let c = DiscreteJointChannel::bsc(0.11).unwrap();
        for y in [[0usize, 0], [0, 1], [1, 1]] {
            let mut prior = Vec::new();
            let mut target = Vec::new();
            for x1 in 0..2 {
                for x2 in 0..2 {
                    prior.push(c.marginal_x()[x1] * c.marginal_x()[x2]);
                    target.push(c.posterior(y[0])[x1] * c.posterior(y[1])[x2]);
                }
            }
            let expect = channel_simulation_divergence(&prior, &target).unwrap();
            let d = block_level_distribution(&c, &y).unwrap();
            assert!((block_csd(&d) - expect).abs() < 1e-13);
            let kl = kl_divergence(&prior, &target, KlMethod::Direct).unwrap();
            assert!((block_kl(&d) - kl).abs() < 1e-13);
        }
    }

    #[test]
    fn permutation_leaves_law_unchanged() {
        let c = DiscreteJointChannel::new(vec![
            vec![0.10, 0.03, 0.05, 0.02],
            vec![0.04, 0.12, 0.02, 0.06],
            vec![0.03, 0.05, 0.15, 0.02],
            vec![0.06, 0.02, 0.04, 0.19],
        ])
        .unwrap();
        let a = block_level_distribution(&c, &[3, 1, 0, 2, 2, 1]).unwrap();
        let b = block_level_distribution(&c, &[2, 1, 3, 1, 0, 2]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn cap_is_enforced() {
        let c = DiscreteJointChannel::new(vec![
            vec![0.10, 0.03, 0.05, 0.02],
            vec![0.04, 0.12, 0.02, 0.06],
            vec![0.03, 0.05, 0.15, 0.02],
            vec![0.06, 0.02, 0.04, 0.19],
        ])
        .unwrap();
        let err = block_level_distribution_capped(&c, &[0; 8], 50).unwrap_err();
        assert!(matches!(err, Error::BlockTooLarge { cap: 50, .. }));
    }

    #[test]
    fn exact_mode_requires_symmetry() {
        let c = DiscreteJointChannel::new(vec![vec![0.4, 0.1], vec![0.2, 0.3]]).unwrap();
        assert_eq!(expected_block_csd(&c, 4, BlockMode::Exact).unwrap_err(), Error::SymmetryRequired);
        let e = expected_block_csd(&c, 4, BlockMode::MonteCarlo { samples: 50, seed: 1 }).unwrap();
        assert!(e.dcs.value > 0.0);
    }

    #[test]
    fn cdf_identity_single_letter() {
        let c = DiscreteJointChannel::bsc(0.11).unwrap();
        let grid: Vec<f64> = (0..100).map(|i| -3.0 + 6.0 * i as f64 / 99.0).collect();
        assert!(verify_cdf_identity(&c, &[1], &grid).unwrap() < 1e-12);
    }
}
