//! Exponential tilting of the likelihood ratio and the large-deviations
//! machinery built on it: operating intervals, regularity constants,
//! typicality events and information balls.
//!
//! For an output symbol `y` the tilted law is
//! `Q^λ(x) ∝ p(x) 1[r(x|y) > 0] e^{λ ln r(x|y)}`, so `Q⁰` is the prior
//! restricted to the support of `r(·|y)` and `Q¹` is the posterior.

mod ball;
mod constants;
mod typicality;

pub use ball::*;
pub use constants::*;
pub use typicality::*;

use serde::{Deserialize, Serialize};

use crate::channel::DiscreteJointChannel;
use crate::numeric::{log_sum_exp, sum};
use crate::{Error, Result};

/// `(ln p(x), ln r(x|y))` over the support of `r(·|y)`, with the input symbol.
pub(crate) fn support(channel: &DiscreteJointChannel, y: usize) -> Vec<(usize, f64, f64)> {
    (0..channel.num_x())
        .filter(|&x| channel.joint()[x][y] > 0.0)
        .map(|x| (x, channel.marginal_x()[x].ln(), channel.log_ratio(x, y)))
        .collect()
}

fn check_y(channel: &DiscreteJointChannel, y: usize) -> Result<()> {
    if y >= channel.num_y() {
        return Err(Error::InvalidArgument(format!("output symbol {y} out of range")));
    }
    Ok(())
}

/// `Λ(λ, y)` and its first three derivatives in `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CumulantData {
    pub lambda: f64,
    pub y: usize,
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

/// The derivatives are the mean, variance and third central moment of
/// `ln r` under `Q^λ`.
pub fn cumulant(channel: &DiscreteJointChannel, lambda: f64, y: usize) -> Result<CumulantData> {
    let m = tilted_measure(channel, lambda, y)?;
    let d1 = m.raw_moment(1);
    let d2 = m.central_moment(2);
    let d3 = m.central_moment(3);
    Ok(CumulantData {
        lambda,
        y,
        value: m.log_normalizer,
        d1,
        d2,
        d3,
    })
}

/// `Q^λ_{X|y}` as a pmf over the input alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TiltedMeasure {
    pub lambda: f64,
    pub y: usize,
    pub pmf: Vec<f64>,
    /// `Λ(λ, y)`.
    pub log_normalizer: f64,
    /// `ln r(x|y)` per input symbol, `−∞` off the support.
    pub log_ratio: Vec<f64>,
}

pub fn tilted_measure(channel: &DiscreteJointChannel, lambda: f64, y: usize) -> Result<TiltedMeasure> {
    check_y(channel, y)?;
    let atoms = support(channel, y);
    if atoms.is_empty() {
        return Err(Error::EmptySupport { y });
    }
    let log_normalizer = log_sum_exp(atoms.iter().map(|&(_, lp, l)| lp + lambda * l));
    let mut pmf = vec![0.0; channel.num_x()];
    let mut log_ratio = vec![f64::NEG_INFINITY; channel.num_x()];
    for &(x, lp, l) in &atoms {
        pmf[x] = (lp + lambda * l - log_normalizer).exp();
        log_ratio[x] = l;
    }
    Ok(TiltedMeasure {
        lambda,
        y,
        pmf,
        log_normalizer,
        log_ratio,
    })
}

impl TiltedMeasure {
    fn on_support(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.pmf.iter().zip(&self.log_ratio).filter(|(q, _)| **q > 0.0).map(|(&q, &l)| (q, l))
    }

    /// `E_Q[(ln r)^k]`.
    pub fn raw_moment(&self, k: i32) -> f64 {
        sum(self.on_support().map(|(q, l)| q * l.powi(k)))
    }

    /// `E_Q[|ln r|^k]`.
    pub fn abs_moment(&self, k: i32) -> f64 {
        sum(self.on_support().map(|(q, l)| q * l.abs().powi(k)))
    }

    /// `E_Q[(ln r − E_Q ln r)^k]`.
    pub fn central_moment(&self, k: i32) -> f64 {
        let mean = self.raw_moment(1);
        sum(self.on_support().map(|(q, l)| q * (l - mean).powi(k)))
    }

    /// `Q[ln r ≥ a]`.
    pub fn tail(&self, a: f64) -> f64 {
        sum(self.on_support().filter(|&(_, l)| l >= a).map(|(q, _)| q))
    }

    /// Distinct on-support values of `ln r`, ascending.
    pub fn support_levels(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.on_support().map(|(_, l)| l).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }
}

/// Sums of tilted variances and third absolute moments over a block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockTiltStats {
    pub lambda: f64,
    pub y_block: Vec<usize>,
    /// `s_n²(λ, yⁿ) = Σᵢ Var_{Q^λ}[ln r(·|yᵢ)]`.
    pub s_n_sq: f64,
    /// `μ_n⁽³⁾(λ, yⁿ) = Σᵢ E_{Q^λ}|ln r(·|yᵢ)|³`.
    pub mu3: f64,
}

pub fn block_tilt_stats(channel: &DiscreteJointChannel, lambda: f64, y_block: &[usize]) -> Result<BlockTiltStats> {
    let per_y: Vec<(f64, f64)> = (0..channel.num_y())
        .map(|y| {
            let m = tilted_measure(channel, lambda, y)?;
            Ok((m.central_moment(2), m.abs_moment(3)))
        })
        .collect::<Result<_>>()?;
    for &y in y_block {
        check_y(channel, y)?;
    }
    Ok(BlockTiltStats {
        lambda,
        y_block: y_block.to_vec(),
        s_n_sq: sum(y_block.iter().map(|&y| per_y[y].0)),
        mu3: sum(y_block.iter().map(|&y| per_y[y].1)),
    })
}

/// Outcome of a bound check: whether it held and the smallest margin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub holds: bool,
    pub worst_margin: f64,
}

/// Slack allowed in the comparisons of [`stochastic_dominance_check`].
pub const DOMINANCE_TOLERANCE: f64 = 1e-12;
/// Slack allowed in [`moment_bound_check`].
pub const MOMENT_BOUND_TOLERANCE: f64 = 1e-9;

/// Whether `Q^{λ₂}[ln r ≥ a] ≥ Q^{λ₁}[ln r ≥ a]` at every support level `a`.
pub fn stochastic_dominance_check(channel: &DiscreteJointChannel, y: usize, lambda1: f64, lambda2: f64) -> Result<CheckReport> {
    if !(lambda1 < lambda2) {
        return Err(Error::InvalidArgument(format!("need λ₁ < λ₂, got {lambda1}, {lambda2}")));
    }
    let q1 = tilted_measure(channel, lambda1, y)?;
    let q2 = tilted_measure(channel, lambda2, y)?;
    let worst = q1
        .support_levels()
        .into_iter()
        .map(|a| q2.tail(a) - q1.tail(a))
        .fold(f64::INFINITY, f64::min);
    Ok(CheckReport {
        holds: worst >= -DOMINANCE_TOLERANCE,
        worst_margin: worst,
    })
}

/// Whether `sup_λ E_{Q^λ}|ln r|^k ≤ E_{Q^{λ̄}}|ln r|^k + E_{Q^{λ̲}}|ln r|^k`
/// over `lambda_grid`, where `λ̲`, `λ̄` are the grid's extremes.
pub fn moment_bound_check(channel: &DiscreteJointChannel, y: usize, k: i32, lambda_grid: &[f64]) -> Result<CheckReport> {
    if !(1..=6).contains(&k) {
        return Err(Error::InvalidArgument(format!("moment order {k} outside 1..=6")));
    }
    if lambda_grid.is_empty() {
        return Err(Error::InvalidArgument("empty λ grid".into()));
    }
    let lo = lambda_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = lambda_grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let envelope = tilted_measure(channel, lo, y)?.abs_moment(k) + tilted_measure(channel, hi, y)?.abs_moment(k);
    let mut worst = f64::INFINITY;
    for &lambda in lambda_grid {
        let m = tilted_measure(channel, lambda, y)?.abs_moment(k);
        worst = worst.min(envelope - m);
    }
    Ok(CheckReport {
        holds: worst >= -MOMENT_BOUND_TOLERANCE,
        worst_margin: worst,
    })
}

/// `E_Y[g(Q^λ_{X|Y})]` for a per-measure statistic `g`.
pub(crate) fn expect_over_y(channel: &DiscreteJointChannel, lambda: f64, g: impl Fn(&TiltedMeasure) -> f64) -> Result<f64> {
    let terms: Vec<f64> = (0..channel.num_y())
        .map(|y| Ok(channel.marginal_y()[y] * g(&tilted_measure(channel, lambda, y)?)))
        .collect::<Result<_>>()?;
    Ok(sum(terms))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bsc() -> DiscreteJointChannel {
        DiscreteJointChannel::bsc(0.11).unwrap()
    }

    #[test]
    fn independent_channel_has_flat_cumulant() {
        let c = DiscreteJointChannel::independent(&[0.3, 0.7], &[0.4, 0.6]).unwrap();
        for &lambda in &[-2.0, 0.0, 0.5, 3.0] {
            let d = cumulant(&c, lambda, 1).unwrap();
            assert!(d.value.abs() < 1e-15 && d.d1.abs() < 1e-15 && d.d2.abs() < 1e-15 && d.d3.abs() < 1e-15);
        }
    }

    #[test]
    fn zero_tilt_gives_log_support_mass() {
        let c = DiscreteJointChannel::new(vec![vec![0.2, 0.0], vec![0.1, 0.3], vec![0.0, 0.4]]).unwrap();
        let d = cumulant(&c, 0.0, 0).unwrap();
        assert!((d.value - (c.marginal_x()[0] + c.marginal_x()[1]).ln()).abs() < 1e-15);
        let q = tilted_measure(&c, 0.0, 0).unwrap();
        let f = c.marginal_x()[0] + c.marginal_x()[1];
        assert!((q.pmf[0] - c.marginal_x()[0] / f).abs() < 1e-15);
        assert_eq!(q.pmf[2], 0.0);
    }

    #[test]
    fn unit_tilt_is_the_posterior() {
        let c = bsc();
        for y in 0..2 {
            let q = tilted_measure(&c, 1.0, y).unwrap();
            for x in 0..2 {
                assert!((q.pmf[x] - c.posterior(y)[x]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn tilt_two_on_bsc() {
        let p = 0.11f64;
        let q = tilted_measure(&bsc(), 2.0, 0).unwrap();
        let a = (2.0 * (1.0 - p)).powi(2);
        let b = (2.0 * p).powi(2);
        assert!((q.pmf[0] - a / (a + b)).abs() < 1e-14);
        assert!((q.pmf[1] - b / (a + b)).abs() < 1e-14);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let c = bsc();
        let h = 1e-4;
        let v = |l: f64| cumulant(&c, l, 0).unwrap().value;
        let d = cumulant(&c, 0.7, 0).unwrap();
        let fd1 = (v(0.7 + h) - v(0.7 - h)) / (2.0 * h);
        let fd2 = (v(0.7 + h) - 2.0 * v(0.7) + v(0.7 - h)) / (h * h);
        let d1 = |l: f64| cumulant(&c, l, 0).unwrap().d2;
        let fd3 = (d1(0.7 + h) - d1(0.7 - h)) / (2.0 * h);
        assert!(((fd1 - d.d1) / d.d1).abs() < 1e-5);
        assert!(((fd2 - d.d2) / d.d2).abs() < 1e-5);
        assert!(((fd3 - d.d3) / d.d3).abs() < 1e-5);
    }

    #[test]
    fn large_tilts_stay_finite() {
        let c = bsc();
        for &lambda in &[-50.0, 50.0] {
            let d = cumulant(&c, lambda, 0).unwrap();
            assert!(d.value.is_finite() && d.d1.is_finite() && d.d2 >= 0.0);
        }
    }

    #[test]
    fn block_stats_scale_with_repetition() {
        let c = bsc();
        let one = block_tilt_stats(&c, 0.8, &[1]).unwrap();
        let many = block_tilt_stats(&c, 0.8, &[1; 7]).unwrap();
        assert!((many.s_n_sq - 7.0 * one.s_n_sq).abs() < 1e-13);
        assert!((many.mu3 - 7.0 * one.mu3).abs() < 1e-13);
        let ind = DiscreteJointChannel::independent(&[0.5, 0.5], &[0.5, 0.5]).unwrap();
        let s = block_tilt_stats(&ind, 0.8, &[0, 1, 1]).unwrap();
        assert_eq!((s.s_n_sq, s.mu3), (0.0, 0.0));
    }

    #[test]
    fn dominance_and_moment_bounds_on_bsc() {
        let c = bsc();
        for i in 0..20 {
            let l2 = 0.2 + 0.1 * i as f64;
            assert!(stochastic_dominance_check(&c, 0, l2 - 0.05, l2).unwrap().holds);
        }
        let grid: Vec<f64> = (0..50).map(|i| 0.6 + 0.8 * i as f64 / 49.0).collect();
        assert!(moment_bound_check(&c, 0, 3, &grid).unwrap().holds);
        let ind = DiscreteJointChannel::independent(&[0.5, 0.5], &[0.5, 0.5]).unwrap();
        assert_eq!(stochastic_dominance_check(&ind, 0, 0.5, 1.0).unwrap().worst_margin, 0.0);
    }
}
