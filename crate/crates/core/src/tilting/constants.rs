//! Operating interval, typicality tolerance and the regularity constants.

use serde::{Deserialize, Serialize};

use super::expect_over_y;
use crate::channel::DiscreteJointChannel;
use crate::{Error, Result};

/// Default grid resolution for [`find_operating_interval`].
pub const DEFAULT_GRID_RESOLUTION: f64 = 1e-3;
/// Upper end allowed for the operating interval.
pub const MAX_LAMBDA: f64 = 2.0;
/// Number of λ points used when minimising over the operating interval.
const INTERVAL_GRID_POINTS: usize = 201;
/// Number of `s²/n` points used when minimising `M̲_n`.
const VARIANCE_GRID_POINTS: usize = 17;

/// `E_Y Var_{Q^λ}[ln r | Y]`.
pub fn mean_tilted_variance(channel: &DiscreteJointChannel, lambda: f64) -> Result<f64> {
    expect_over_y(channel, lambda, |m| m.central_moment(2))
}

/// `E_Y E_{Q^λ}[ln r | Y]`.
pub fn mean_tilted_mean(channel: &DiscreteJointChannel, lambda: f64) -> Result<f64> {
    expect_over_y(channel, lambda, |m| m.raw_moment(1))
}

/// `E_Y E_{Q^λ}[|ln r|^k | Y]`.
pub fn mean_tilted_abs_moment(channel: &DiscreteJointChannel, lambda: f64, k: i32) -> Result<f64> {
    expect_over_y(channel, lambda, |m| m.abs_moment(k))
}

/// An interval `[λ̲, λ̄] ∋ 1` on which the mean tilted variance stays at least
/// half its value at `λ = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingInterval {
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    pub resolution: f64,
    pub variance_at_one: f64,
    /// Smallest mean tilted variance on the searched grid.
    pub min_variance: f64,
}

impl OperatingInterval {
    /// `n_points` equally spaced values from `λ̲` to `λ̄`.
    pub fn grid(&self, n_points: usize) -> Vec<f64> {
        let n = n_points.max(2);
        (0..n)
            .map(|i| self.lambda_lo + (self.lambda_hi - self.lambda_lo) * i as f64 / (n - 1) as f64)
            .collect()
    }
}

/// Grid search on `1 ± k·resolution`: returns the widest symmetric interval
/// whose every grid point keeps `E_Y Var_{Q^λ} ≥ ½ E_Y Var_{Q¹}`, with
/// `λ̲ ≥ resolution` and `λ̄ ≤ 2`.
pub fn find_operating_interval(channel: &DiscreteJointChannel, grid_resolution: f64) -> Result<OperatingInterval> {
    if !(grid_resolution > 0.0 && grid_resolution < 0.5) {
        return Err(Error::InvalidArgument(format!("grid resolution {grid_resolution} outside (0, 0.5)")));
    }
    let v1 = mean_tilted_variance(channel, 1.0)?;
    if v1 <= 0.0 || !crate::channel::is_nonsingular(&channel.clone().into()).nonsingular {
        return Err(Error::SingularChannel);
    }
    let floor = 0.5 * v1;
    let k_max = ((1.0 - grid_resolution) / grid_resolution).floor().min(((MAX_LAMBDA - 1.0) / grid_resolution).floor()) as usize;
    let mut k = 0;
    let mut min_variance = v1;
    while k < k_max {
        let step = (k + 1) as f64 * grid_resolution;
        let lo = mean_tilted_variance(channel, 1.0 - step)?;
        let hi = mean_tilted_variance(channel, 1.0 + step)?;
        if lo < floor || hi < floor {
            break;
        }
        min_variance = min_variance.min(lo).min(hi);
        k += 1;
    }
    if k == 0 {
        return Err(Error::InvalidArgument(format!(
            "no grid interval at resolution {grid_resolution} keeps the tilted variance above half its value"
        )));
    }
    Ok(OperatingInterval {
        lambda_lo: 1.0 - k as f64 * grid_resolution,
        lambda_hi: 1.0 + k as f64 * grid_resolution,
        resolution: grid_resolution,
        variance_at_one: v1,
        min_variance,
    })
}

/// Verifies `I + 3ε ≤ E_Y E_{Q^{λ̄}} ln r` and `I − 3ε ≥ E_Y E_{Q^{λ̲}} ln r`.
pub fn check_epsilon(channel: &DiscreteJointChannel, interval: &OperatingInterval, epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidEpsilon {
            epsilon,
            reason: "must be positive and finite".into(),
        });
    }
    let i = mean_tilted_mean(channel, 1.0)?;
    let hi = mean_tilted_mean(channel, interval.lambda_hi)?;
    let lo = mean_tilted_mean(channel, interval.lambda_lo)?;
    if i + 3.0 * epsilon > hi {
        return Err(Error::InvalidEpsilon {
            epsilon,
            reason: format!("I + 3ε = {} exceeds the upper tilted mean {hi}", i + 3.0 * epsilon),
        });
    }
    if i - 3.0 * epsilon < lo {
        return Err(Error::InvalidEpsilon {
            epsilon,
            reason: format!("I − 3ε = {} is below the lower tilted mean {lo}", i - 3.0 * epsilon),
        });
    }
    Ok(())
}

/// The largest `ε = ε₀ 2^{−k}` passing [`check_epsilon`] whose lower variance
/// constant `m̲₂` is at least half the smallest mean tilted variance, where
/// `ε₀` saturates the tilted-mean inequalities.
pub fn choose_epsilon(channel: &DiscreteJointChannel, interval: &OperatingInterval) -> Result<f64> {
    let i = mean_tilted_mean(channel, 1.0)?;
    let hi = mean_tilted_mean(channel, interval.lambda_hi)?;
    let lo = mean_tilted_mean(channel, interval.lambda_lo)?;
    let mut epsilon = ((hi - i).min(i - lo) / 3.0) * (1.0 - 1e-9);
    let inf_var = interval_min_variance(channel, interval)?;
    for _ in 0..60 {
        if check_epsilon(channel, interval, epsilon).is_ok() {
            let m = moment_envelope(channel, interval, epsilon)?;
            if inf_var - 2.0 * epsilon - m.m3_hi * epsilon >= 0.5 * inf_var {
                return Ok(epsilon);
            }
        }
        epsilon *= 0.5;
    }
    Err(Error::InvalidEpsilon {
        epsilon,
        reason: "no admissible ε found".into(),
    })
}

fn interval_min_variance(channel: &DiscreteJointChannel, interval: &OperatingInterval) -> Result<f64> {
    let mut min = f64::INFINITY;
    for lambda in interval.grid(INTERVAL_GRID_POINTS) {
        min = min.min(mean_tilted_variance(channel, lambda)?);
    }
    Ok(min)
}

struct MomentEnvelope {
    m2_hi: f64,
    m3_hi: f64,
}

/// `A_k = E_Y E_{Q^{λ̲}}|ℓ|^k + E_Y E_{Q^{λ̄}}|ℓ|^k + 2ε`, then
/// `m̄₂ = A₂ + A₁²` and `m̄₃ = A₃ + 3A₁A₂ + 2A₁³`.
fn moment_envelope(channel: &DiscreteJointChannel, interval: &OperatingInterval, epsilon: f64) -> Result<MomentEnvelope> {
    let a = |k: i32| -> Result<f64> {
        Ok(mean_tilted_abs_moment(channel, interval.lambda_lo, k)?
            + mean_tilted_abs_moment(channel, interval.lambda_hi, k)?
            + 2.0 * epsilon)
    };
    let (a1, a2, a3) = (a(1)?, a(2)?, a(3)?);
    Ok(MomentEnvelope {
        m2_hi: a2 + a1 * a1,
        m3_hi: a3 + 3.0 * a1 * a2 + 2.0 * a1.powi(3),
    })
}

/// `M̲_n(λ, s, μ)` together with its auxiliary quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MLower {
    pub t: f64,
    pub gamma: f64,
    pub value: f64,
}

/// `t = 2√(2π) λ μ / s²`, `γ = 1 − (1 + (1+2t)²) / (λ (1+2t) √e s)` and
/// `M̲_n = (1+2t) γ √n / (2λ √(2π) s e^{2t})`.
pub fn m_lower_parts(lambda: f64, s: f64, mu3: f64, n: f64) -> MLower {
    let sqrt_2pi = (2.0 * std::f64::consts::PI).sqrt();
    let t = lambda * 2.0 * sqrt_2pi * mu3 / (s * s);
    let u = 1.0 + 2.0 * t;
    let gamma = 1.0 - (1.0 + u * u) / (lambda * u * std::f64::consts::E.sqrt() * s);
    let value = u * gamma * n.sqrt() / (2.0 * lambda * sqrt_2pi * s * (2.0 * t).exp());
    MLower { t, gamma, value }
}

pub fn m_lower(lambda: f64, s: f64, mu3: f64, n: f64) -> f64 {
    m_lower_parts(lambda, s, mu3, n).value
}

/// `ln M̲_n`, finite whenever `γ > 0` even where `M̲_n` underflows.
pub fn log_m_lower(lambda: f64, s: f64, mu3: f64, n: f64) -> f64 {
    let p = m_lower_parts(lambda, s, mu3, n);
    let sqrt_2pi = (2.0 * std::f64::consts::PI).sqrt();
    (1.0 + 2.0 * p.t).ln() + p.gamma.ln() + 0.5 * n.ln() - (2.0 * lambda * sqrt_2pi * s).ln() - 2.0 * p.t
}

/// The constants of the regularity conditions and the large-deviations bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularityConstants {
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    pub m2_lo: f64,
    pub m2_hi: f64,
    pub m3_hi: f64,
    /// `M̲`; may underflow to zero, see `log_m_lo`.
    #[serde(rename = "M_lo")]
    pub m_lo: f64,
    /// `ln M̲`.
    #[serde(rename = "log_M_lo")]
    pub log_m_lo: f64,
    pub n0: u64,
    pub epsilon: f64,
}

impl RegularityConstants {
    /// `1 / (M̲ λ̲² √m̲₂)`; the ball radius sits this much over `n` below `ι(A)`.
    pub fn radius_scale(&self) -> f64 {
        (-self.log_m_lo - 2.0 * self.lambda_lo.ln() - 0.5 * self.m2_lo.ln()).exp()
    }

    /// Smallest `n` for which the Gibbs bound applies:
    /// `n > max(n₀, 1 / (M̲ λ̲² √m̲₂ ε))`.
    pub fn gibbs_min_n(&self) -> u64 {
        let b = self.radius_scale() / self.epsilon;
        let b = if b.is_finite() { b.floor() as u64 } else { u64::MAX - 1 };
        self.n0.max(b) + 1
    }
}

/// Assembles all constants for an interval and tolerance.
pub fn regularity_constants(channel: &DiscreteJointChannel, interval: &OperatingInterval, epsilon: f64) -> Result<RegularityConstants> {
    check_epsilon(channel, interval, epsilon)?;
    let env = moment_envelope(channel, interval, epsilon)?;
    let inf_var = interval_min_variance(channel, interval)?;
    let m2_lo = inf_var - 2.0 * epsilon - env.m3_hi * epsilon;
    if m2_lo <= 0.0 {
        return Err(Error::InvalidEpsilon {
            epsilon,
            reason: format!("lower variance constant {m2_lo} is not positive"),
        });
    }
    let lambdas = interval.grid(INTERVAL_GRID_POINTS);

    // γ grows with n and is smallest at s² = n m̲₂, μ = n m̄₃.
    let gamma_ok = |n: u64| {
        lambdas.iter().all(|&l| {
            let nf = n as f64;
            m_lower_parts(l, (nf * m2_lo).sqrt(), nf * env.m3_hi, nf).gamma > 0.5
        })
    };
    let mut hi = 1u64;
    while !gamma_ok(hi) {
        hi = hi.checked_mul(2).ok_or_else(|| Error::InvalidArgument("n₀ does not exist".into()))?;
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if gamma_ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let n0 = hi;

    // With s² = n v and μ = n m̄₃, M̲_n depends on n only through γ, which
    // increases, so the infimum over n > n₀ sits at n₀ + 1.
    let n = (n0 + 1) as f64;
    let mut log_m_lo = f64::INFINITY;
    for &l in &lambdas {
        for j in 0..VARIANCE_GRID_POINTS {
            let v = m2_lo * (env.m2_hi / m2_lo).powf(j as f64 / (VARIANCE_GRID_POINTS - 1) as f64);
            log_m_lo = log_m_lo.min(log_m_lower(l, (n * v).sqrt(), n * env.m3_hi, n));
        }
    }
    Ok(RegularityConstants {
        lambda_lo: interval.lambda_lo,
        lambda_hi: interval.lambda_hi,
        m2_lo,
        m2_hi: env.m2_hi,
        m3_hi: env.m3_hi,
        m_lo: log_m_lo.exp(),
        log_m_lo,
        n0,
        epsilon,
    })
}

/// Operating interval at the default resolution, the default `ε` and the
/// resulting constants.
pub fn default_regularity_constants(channel: &DiscreteJointChannel) -> Result<RegularityConstants> {
    let interval = find_operating_interval(channel, DEFAULT_GRID_RESOLUTION)?;
    let epsilon = choose_epsilon(channel, &interval)?;
    regularity_constants(channel, &interval, epsilon)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bsc_interval_contains_one() {
        let c = DiscreteJointChannel::bsc(0.11).unwrap();
        let iv = find_operating_interval(&c, 1e-3).unwrap();
        assert!(iv.lambda_lo < 1.0 && 1.0 < iv.lambda_hi);
        assert!(iv.min_variance >= 0.5 * iv.variance_at_one);
    }

    #[test]
    fn identity_is_singular() {
        let c = DiscreteJointChannel::identity(2).unwrap();
        assert_eq!(find_operating_interval(&c, 1e-3).unwrap_err(), Error::SingularChannel);
    }

    #[test]
    fn near_singular_interval_is_narrow() {
        let c = DiscreteJointChannel::bsc(1e-6).unwrap();
        let iv = find_operating_interval(&c, 1e-3).unwrap();
        assert!(iv.lambda_hi - iv.lambda_lo < 0.5);
        assert!(iv.min_variance > 0.0);
    }

    #[test]
    fn m_lower_without_third_moment() {
        let (l, s, n) = (0.9, 3.0, 40.0);
        let gamma = 1.0 - 2.0 / (l * std::f64::consts::E.sqrt() * s);
        let expect = gamma * f64::sqrt(n) / (2.0 * l * (2.0 * std::f64::consts::PI).sqrt() * s);
        assert!((m_lower(l, s, 0.0, n) - expect).abs() < 1e-15);
        assert!((m_lower(l, s, 0.7, 4.0 * n) / m_lower(l, s, 0.7, n) - 2.0).abs() < 1e-15);
        assert!((log_m_lower(l, s, 0.7, n) - m_lower(l, s, 0.7, n).ln()).abs() < 1e-12);
    }

    #[test]
    fn constants_are_ordered() {
        let c = DiscreteJointChannel::bsc(0.11).unwrap();
        let k = default_regularity_constants(&c).unwrap();
        assert!(k.lambda_lo < 1.0 && 1.0 < k.lambda_hi);
        assert!(0.0 < k.m2_lo && k.m2_lo <= k.m2_hi && k.m3_hi > 0.0);
        assert!(k.log_m_lo.is_finite());
        assert!(k.n0 >= 1);
    }

    #[test]
    fn epsilon_violations_are_reported() {
        let c = DiscreteJointChannel::bsc(0.11).unwrap();
        let iv = find_operating_interval(&c, 1e-3).unwrap();
        assert!(matches!(check_epsilon(&c, &iv, 10.0), Err(Error::InvalidEpsilon { .. })));
        assert!(check_epsilon(&c, &iv, choose_epsilon(&c, &iv).unwrap()).is_ok());
    }
}
