//! Width functions and the divergences derived from them.
//!
//! For a pair `Q ≪ P` with `r = dQ/dP`, the P-width function is
//! `w_P(h) = P[r ≥ h]`. In the discrete case it is a nonincreasing step
//! function with jumps at the distinct positive values of `r`. Levels are kept
//! as `ln h` and masses as `ln w`, which keeps block width functions with
//! ratios near `e^5000` representable.

use serde::{Deserialize, Serialize};

use crate::channel::{DiscreteJointChannel, GaussianChannel};
use crate::numeric::{levels_coincide, log_add_exp, neg_x_ln_x, simpson_vec, std_normal_cdf, sum, CompensatedSum, LogAccumulator};
use crate::{nats_to_bits, Error, Result, LB_E};

/// Tolerance on the total mass of a distribution handed to [`width_function`].
pub const DISTRIBUTION_TOLERANCE: f64 = 1e-9;

/// A discrete P-width function.
///
/// Segment `j` (1-based) is `(h_{j−1}, h_j]` with `h_0 = 0`, on which the width
/// equals `m_j = P[r ≥ h_j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WidthFunction {
    /// `ln h_j`, strictly increasing.
    log_levels: Vec<f64>,
    /// `ln P[r = h_j]`.
    log_atoms: Vec<f64>,
    /// `ln m_j = ln P[r ≥ h_j]`.
    log_widths: Vec<f64>,
    /// `ln Q[r ≥ h_j]`.
    log_target_widths: Vec<f64>,
    /// `P[r = 0]`.
    zero_ratio_mass: f64,
}

impl WidthFunction {
    /// Builds a width function from `(ln r, ln P-mass)` atoms sorted by level
    /// with distinct levels. `zero_ratio_mass` is the P-mass where `r = 0`.
    pub(crate) fn from_sorted_log_atoms(log_levels: Vec<f64>, log_atoms: Vec<f64>, zero_ratio_mass: f64) -> Self {
        debug_assert_eq!(log_levels.len(), log_atoms.len());
        let k = log_levels.len();
        let mut log_widths = vec![f64::NEG_INFINITY; k];
        let mut log_target_widths = vec![f64::NEG_INFINITY; k];
        let mut tail = LogAccumulator::new();
        let mut target_tail = LogAccumulator::new();
        for j in (0..k).rev() {
            tail.add(log_atoms[j]);
            target_tail.add(log_levels[j] + log_atoms[j]);
            log_widths[j] = tail.value();
            log_target_widths[j] = target_tail.value();
        }
        // The lowest level carries all of Q, whose total mass is one.
        if let Some(first) = log_target_widths.first_mut() {
            *first = 0.0;
        }
        Self {
            log_levels,
            log_atoms,
            log_widths,
            log_target_widths,
            zero_ratio_mass,
        }
    }

    /// Number of positive levels.
    pub fn len(&self) -> usize {
        self.log_levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_levels.is_empty()
    }

    /// `[0, h_1, …, h_k]`.
    pub fn breakpoints(&self) -> Vec<f64> {
        std::iter::once(0.0).chain(self.log_levels.iter().map(|l| l.exp())).collect()
    }

    /// `[m_1, …, m_k]`: the width on `(h_{j−1}, h_j]`.
    pub fn values(&self) -> Vec<f64> {
        self.log_widths.iter().map(|l| l.exp()).collect()
    }

    pub fn log_levels(&self) -> &[f64] {
        &self.log_levels
    }

    pub fn log_widths(&self) -> &[f64] {
        &self.log_widths
    }

    pub fn zero_ratio_mass(&self) -> f64 {
        self.zero_ratio_mass
    }

    /// `w_P(h)`; `w_P(0) = 1`.
    pub fn eval(&self, h: f64) -> f64 {
        if h <= 0.0 {
            return 1.0;
        }
        let t = h.ln();
        let j = self.log_levels.partition_point(|&l| l < t && !levels_coincide(l, t));
        self.log_widths.get(j).map_or(0.0, |l| l.exp())
    }

    /// `w_Q(h) = Q[r ≥ h]`.
    pub fn eval_target(&self, h: f64) -> f64 {
        if h <= 0.0 {
            return 1.0;
        }
        let t = h.ln();
        let j = self.log_levels.partition_point(|&l| l < t && !levels_coincide(l, t));
        self.log_target_widths.get(j).map_or(0.0, |l| l.exp())
    }

    /// `h_j − h_{j−1}` divided by `h_j`.
    #[inline]
    fn relative_segment(&self, j: usize) -> f64 {
        if j == 0 {
            1.0
        } else {
            -(self.log_levels[j - 1] - self.log_levels[j]).exp_m1()
        }
    }

    /// `∫ w_P dh`, which equals `Q[r > 0]`, i.e. one.
    pub fn integral(&self) -> f64 {
        sum((0..self.len()).map(|j| (self.log_levels[j] + self.log_widths[j]).exp() * self.relative_segment(j)))
    }

    /// `−∫ w ln w dh` in nats.
    pub fn d_cs_nats(&self) -> f64 {
        sum((0..self.len()).map(|j| {
            (self.log_levels[j] + self.log_widths[j]).exp() * self.relative_segment(j) * -self.log_widths[j]
        }))
    }

    /// `1 + ∫ w ln h dh` in nats.
    pub fn kl_integral_nats(&self) -> f64 {
        let mut acc = CompensatedSum::new();
        acc.add(1.0);
        for j in 0..self.len() {
            acc.add((self.log_levels[j] + self.log_widths[j]).exp() * self.antiderivative_ratio(j));
        }
        acc.value()
    }

    /// `[F(h_j) − F(h_{j−1})] / h_j` with `F(h) = h (ln h − 1)`.
    fn antiderivative_ratio(&self, j: usize) -> f64 {
        let lj = self.log_levels[j];
        if j == 0 {
            return lj - 1.0;
        }
        let delta = lj - self.log_levels[j - 1];
        let d = (-delta).exp();
        (lj - 1.0) * -(-delta).exp_m1() + d * delta
    }

    /// Differential entropy of `ln H`, whose density is `e^t w(e^t)`, in nats.
    pub fn log_width_entropy_nats(&self) -> f64 {
        sum((0..self.len()).map(|j| {
            let scale = (self.log_levels[j] + self.log_widths[j]).exp();
            -scale * (self.log_widths[j] * self.relative_segment(j) + self.antiderivative_ratio(j))
        }))
    }

    /// `D(Q ‖ P)` in nats from the level atoms.
    pub fn kl_direct_nats(&self) -> f64 {
        sum((0..self.len()).map(|j| (self.log_levels[j] + self.log_atoms[j]).exp() * self.log_levels[j]))
    }
}

/// Builds the P-width function of a discrete pair. Both vectors must be
/// probability vectors over the same alphabet.
pub fn width_function(prior: &[f64], target: &[f64]) -> Result<WidthFunction> {
    if prior.len() != target.len() || prior.is_empty() {
        return Err(Error::InvalidArgument("prior and target must be non-empty and of equal length".into()));
    }
    for (name, v) in [("prior", prior), ("target", target)] {
        if v.iter().any(|&p| !p.is_finite() || p < 0.0) {
            return Err(Error::InvalidArgument(format!("{name} has a negative or non-finite entry")));
        }
        let total = sum(v.iter().copied());
        if (total - 1.0).abs() > DISTRIBUTION_TOLERANCE {
            return Err(Error::InvalidArgument(format!("{name} sums to {total}")));
        }
    }
    let mut atoms = Vec::with_capacity(prior.len());
    let mut zero = CompensatedSum::new();
    for (index, (&p, &q)) in prior.iter().zip(target).enumerate() {
        match (p > 0.0, q > 0.0) {
            (false, true) => return Err(Error::AbsoluteContinuityViolation { index, mass: q }),
            (false, false) => {}
            (true, false) => zero.add(p),
            (true, true) => atoms.push((q.ln() - p.ln(), p.ln())),
        }
    }
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut levels: Vec<f64> = Vec::with_capacity(atoms.len());
    let mut masses: Vec<f64> = Vec::with_capacity(atoms.len());
    for (l, lp) in atoms {
        match levels.last() {
            Some(&prev) if levels_coincide(prev, l) => {
                let m = masses.last_mut().expect("parallel vectors");
                *m = log_add_exp(*m, lp);
            }
            _ => {
                levels.push(l);
                masses.push(lp);
            }
        }
    }
    let zero = zero.value();
    let mut w = WidthFunction::from_sorted_log_atoms(levels, masses, zero);
    // P has total mass one, so the width on the first segment is P[r > 0].
    if let Some(first) = w.log_widths.first_mut() {
        *first = (-zero).ln_1p();
    }
    Ok(w)
}

/// `D_CS(Q ‖ P)` in bits.
pub fn channel_simulation_divergence(prior: &[f64], target: &[f64]) -> Result<f64> {
    Ok(nats_to_bits(width_function(prior, target)?.d_cs_nats()))
}

/// How [`kl_divergence`] evaluates `D(Q ‖ P)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KlMethod {
    /// `Σ q lb(q/p)`.
    Direct,
    /// `lb e + ∫ w_P lb h dh`.
    Integral,
}

/// `D(Q ‖ P)` in bits.
pub fn kl_divergence(prior: &[f64], target: &[f64], method: KlMethod) -> Result<f64> {
    match method {
        KlMethod::Direct => {
            if prior.len() != target.len() {
                return Err(Error::InvalidArgument("prior and target differ in length".into()));
            }
            let mut acc = CompensatedSum::new();
            for (index, (&p, &q)) in prior.iter().zip(target).enumerate() {
                if q > 0.0 {
                    if p <= 0.0 {
                        return Err(Error::AbsoluteContinuityViolation { index, mass: q });
                    }
                    acc.add(q * (q / p).log2());
                }
            }
            Ok(acc.value())
        }
        KlMethod::Integral => Ok(nats_to_bits(width_function(prior, target)?.kl_integral_nats())),
    }
}

/// All divergences of a pair, in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub d_cs: f64,
    pub d_kl_direct: f64,
    pub d_kl_integral: f64,
    /// `d_cs − d_kl_direct`.
    pub gap: f64,
    /// `h(ln H)`.
    pub log_width_entropy: f64,
}

impl DivergenceReport {
    /// `|gap − (h(ln H) − lb e)|`.
    pub fn identity_residual(&self) -> f64 {
        (self.gap - (self.log_width_entropy - LB_E)).abs()
    }
}

pub fn divergence_gap(prior: &[f64], target: &[f64]) -> Result<DivergenceReport> {
    let w = width_function(prior, target)?;
    let d_cs = nats_to_bits(w.d_cs_nats());
    let d_kl_direct = kl_divergence(prior, target, KlMethod::Direct)?;
    Ok(DivergenceReport {
        d_cs,
        d_kl_direct,
        d_kl_integral: nats_to_bits(w.kl_integral_nats()),
        gap: d_cs - d_kl_direct,
        log_width_entropy: nats_to_bits(w.log_width_entropy_nats()),
    })
}

/// `E_Y[D_CS(P_{X|Y} ‖ P_X)]` in bits.
pub fn expected_conditional_dcs(channel: &DiscreteJointChannel) -> f64 {
    let terms = (0..channel.num_y()).map(|y| {
        let d = channel_simulation_divergence(channel.marginal_x(), channel.posterior(y))
            .expect("posteriors are dominated by the input marginal");
        channel.marginal_y()[y] * d
    });
    sum(terms)
}

/// Below `ln h = −TAIL_LOG_LEVEL` the Gaussian width is replaced by one; the
/// neglected prior mass is far below `1e-10`.
const TAIL_LOG_LEVEL: f64 = 35.0;

/// Quadrature settings for the Gaussian pair `(P_{X|Y=y}, P_X)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianQuadrature {
    /// Stop refining once successive estimates differ by less than this (nats).
    pub tol: f64,
    pub max_panels: usize,
}

impl Default for GaussianQuadrature {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_panels: 1 << 22,
        }
    }
}

/// Gaussian width `w(e^t) = P_X[|X − y| ≤ u/√β]` with `t = α − u²`.
pub fn gaussian_width(channel: &GaussianChannel, y: f64, u: f64) -> f64 {
    let (_, beta) = channel.log_ratio_peak(y);
    let half = u / beta.sqrt();
    let sx = channel.sigma_x();
    let lo = (y - half) / sx;
    let hi = (y + half) / sx;
    if lo > 0.0 {
        std_normal_cdf(-lo) - std_normal_cdf(-hi)
    } else {
        std_normal_cdf(hi) - std_normal_cdf(lo)
    }
}

/// [`DivergenceReport`] for `P = P_X`, `Q = P_{X|Y=y}` on the Gaussian channel.
/// `d_kl_direct` is the closed form; every other field comes from quadrature.
/// The integrals run over `u = √(α − ln h)`, in which the integrands are smooth.
pub fn gaussian_divergence_report(channel: &GaussianChannel, y: f64, quad: GaussianQuadrature) -> DivergenceReport {
    let (alpha, _) = channel.log_ratio_peak(y);
    let upper = (alpha + TAIL_LOG_LEVEL).max(0.0).sqrt();
    let integrand = |u: f64| {
        let t = alpha - u * u;
        let w = gaussian_width(channel, y, u);
        let jac = 2.0 * u * t.exp();
        let ln_w = if w > 0.0 { w.ln() } else { 0.0 };
        [
            jac * neg_x_ln_x(w),
            jac * w * t,
            -jac * w * (t + ln_w),
        ]
    };
    let [dcs, kl, ent] = simpson_vec(integrand, 0.0, upper, quad.tol, quad.max_panels);
    // Below the cut the width is one and ∫t e^t dt = e^c (c − 1).
    let c = alpha - upper * upper;
    let tail_t = c.exp() * (c - 1.0);
    let kl_integral = 1.0 + kl + tail_t;
    let entropy = ent - tail_t;
    let d_cs = nats_to_bits(dcs);
    let d_kl_direct = nats_to_bits(channel.conditional_kl_nats(y));
    DivergenceReport {
        d_cs,
        d_kl_direct,
        d_kl_integral: nats_to_bits(kl_integral),
        gap: d_cs - d_kl_direct,
        log_width_entropy: nats_to_bits(entropy),
    }
}

/// `∫ w_P dh` for the Gaussian pair; should equal one.
pub fn gaussian_width_integral(channel: &GaussianChannel, y: f64, quad: GaussianQuadrature) -> f64 {
    let (alpha, _) = channel.log_ratio_peak(y);
    let upper = (alpha + TAIL_LOG_LEVEL).max(0.0).sqrt();
    let [mass] = simpson_vec(
        |u| [2.0 * u * (alpha - u * u).exp() * gaussian_width(channel, y, u)],
        0.0,
        upper,
        quad.tol,
        quad.max_panels,
    );
    mass + (alpha - upper * upper).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_pair_is_one_level() {
        let p = [0.2, 0.3, 0.5];
        let w = width_function(&p, &p).unwrap();
        assert_eq!(w.len(), 1);
        assert!(w.log_levels()[0].abs() < 1e-15);
        assert!((w.values()[0] - 1.0).abs() < 1e-15);
        let r = divergence_gap(&p, &p).unwrap();
        assert!(r.d_cs.abs() < 1e-15);
        assert!(r.d_kl_direct.abs() < 1e-15 && r.d_kl_integral.abs() < 1e-15);
        assert!((r.log_width_entropy - LB_E).abs() < 1e-12);
    }

    #[test]
    fn point_mass_target() {
        let p = [0.5, 0.5];
        let q = [1.0, 0.0];
        let w = width_function(&p, &q).unwrap();
        assert_eq!(w.breakpoints(), vec![0.0, 2.0]);
        assert!((w.values()[0] - 0.5).abs() < 1e-15);
        assert_eq!(w.eval(0.0), 1.0);
        assert!((w.eval(1.0) - 0.5).abs() < 1e-15);
        assert!((w.eval(2.0) - 0.5).abs() < 1e-15);
        assert_eq!(w.eval(2.5), 0.0);
        assert!((w.integral() - 1.0).abs() < 1e-15);
        let r = divergence_gap(&p, &q).unwrap();
        assert!((r.d_cs - 1.0).abs() < 1e-14);
        assert!((r.d_kl_direct - 1.0).abs() < 1e-14);
        assert!((r.d_kl_integral - 1.0).abs() < 1e-14);
        assert!(r.gap.abs() < 1e-14);
        assert!(r.identity_residual() < 1e-12);
    }

    #[test]
    fn bsc_slice() {
        let p = 0.11;
        let w = width_function(&[0.5, 0.5], &[1.0 - p, p]).unwrap();
        let h = w.breakpoints();
        assert!((h[1] - 2.0 * p).abs() < 1e-15 && (h[2] - 2.0 * (1.0 - p)).abs() < 1e-15);
        let m = w.values();
        assert!((m[0] - 1.0).abs() < 1e-15 && (m[1] - 0.5).abs() < 1e-15);
        let d = channel_simulation_divergence(&[0.5, 0.5], &[1.0 - p, p]).unwrap();
        assert!((d - (1.0 - 2.0 * p)).abs() < 1e-14);
    }

    #[test]
    fn target_width_mirrors_target_tail() {
        let w = width_function(&[0.5, 0.25, 0.25], &[0.1, 0.6, 0.3]).unwrap();
        // r = (0.2, 2.4, 1.2): Q[r ≥ 1.2] = 0.9.
        assert!((w.eval_target(1.0) - 0.9).abs() < 1e-15);
        assert!((w.eval_target(2.0) - 0.6).abs() < 1e-15);
        assert_eq!(w.eval_target(3.0), 0.0);
    }

    #[test]
    fn rejects_non_dominated_pairs() {
        let err = width_function(&[1.0, 0.0], &[0.5, 0.5]).unwrap_err();
        assert_eq!(err, Error::AbsoluteContinuityViolation { index: 1, mass: 0.5 });
    }

    #[test]
    fn gaussian_width_integrates_to_one() {
        let g = GaussianChannel::new(1.0, 1.0).unwrap();
        for &y in &[0.0, 1.5, -3.0] {
            let m = gaussian_width_integral(&g, y, GaussianQuadrature::default());
            assert!((m - 1.0).abs() < 1e-9, "y = {y}: {m}");
        }
    }

    #[test]
    fn gaussian_report_satisfies_identities() {
        let g = GaussianChannel::new(1.0, 1.0).unwrap();
        for &y in &[0.0, 0.7, 2.5] {
            let r = gaussian_divergence_report(&g, y, GaussianQuadrature::default());
            assert!((r.d_kl_direct - r.d_kl_integral).abs() < 1e-7, "{r:?}");
            assert!(r.identity_residual() < 1e-5, "{r:?}");
            assert!(r.d_cs >= r.d_kl_direct);
        }
    }
}
