//! Conditional mean log-likelihood ratios, information balls and the two
//! ball bounds.

use serde::{Deserialize, Serialize};

use super::{tilted_measure, RegularityConstants};
use crate::blocks::block_level_distribution;
use crate::channel::DiscreteJointChannel;
use crate::numeric::{log_sum_exp, sum, CompensatedSum, LogAccumulator};
use crate::{Error, Result, LB_E};

/// Largest `|𝒳|ⁿ` that [`BlockEnumeration`] will materialise.
pub const MAX_ENUMERATION: usize = 1 << 20;
/// Slack in the two ball inequalities.
pub const GIBBS_TOLERANCE: f64 = 1e-12;
/// Default bisection tolerance in `λ`.
pub const DEFAULT_LAMBDA_TOL: f64 = 1e-10;

/// Every `xⁿ` of a block with `S(xⁿ) = Σᵢ ln r(xᵢ|yᵢ)` and its prior mass.
/// Sequences are indexed in mixed radix with `x₁` least significant.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockEnumeration {
    pub n: usize,
    pub num_x: usize,
    /// `S(xⁿ)`, `−∞` where some letter has zero ratio.
    pub sums: Vec<f64>,
    pub prior: Vec<f64>,
}

impl BlockEnumeration {
    pub fn new(channel: &DiscreteJointChannel, y_block: &[usize]) -> Result<Self> {
        let nx = channel.num_x();
        let n = y_block.len();
        if n == 0 {
            return Err(Error::InvalidArgument("empty output block".into()));
        }
        if let Some(&y) = y_block.iter().find(|&&y| y >= channel.num_y()) {
            return Err(Error::InvalidArgument(format!("output symbol {y} out of range")));
        }
        let size = (0..n).try_fold(1usize, |acc, _| acc.checked_mul(nx).filter(|&s| s <= MAX_ENUMERATION));
        let size = size.ok_or_else(|| Error::InvalidArgument(format!("|X|^n exceeds {MAX_ENUMERATION}")))?;
        let mut sums = vec![0.0; size];
        let mut prior = vec![0.0; size];
        let mut digits = vec![0usize; n];
        for k in 0..size {
            let mut s = CompensatedSum::new();
            let mut p = 1.0;
            for (i, &x) in digits.iter().enumerate() {
                s.add(channel.log_ratio(x, y_block[i]));
                p *= channel.marginal_x()[x];
            }
            sums[k] = s.value();
            prior[k] = p;
            for d in digits.iter_mut() {
                *d += 1;
                if *d < nx {
                    break;
                }
                *d = 0;
            }
        }
        Ok(Self { n, num_x: nx, sums, prior })
    }

    pub fn len(&self) -> usize {
        self.sums.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sums.is_empty()
    }

    /// The sequence with mixed-radix index `k`.
    pub fn sequence(&self, mut k: usize) -> Vec<usize> {
        (0..self.n)
            .map(|_| {
                let d = k % self.num_x;
                k /= self.num_x;
                d
            })
            .collect()
    }

    /// `P(S)` for a membership vector.
    pub fn mass(&self, members: &[bool]) -> f64 {
        sum(self.prior.iter().zip(members).filter(|(_, &m)| m).map(|(&p, _)| p))
    }

    /// `ι(S) = E[S(Xⁿ)/n | Xⁿ ∈ S]` under the prior.
    pub fn conditional_mean(&self, members: &[bool]) -> Result<f64> {
        let mass = self.mass(members);
        if mass <= 0.0 {
            return Err(Error::EmptySet);
        }
        let mut acc = CompensatedSum::new();
        for k in (0..self.len()).filter(|&k| members[k] && self.prior[k] > 0.0) {
            if self.sums[k] == f64::NEG_INFINITY {
                return Ok(f64::NEG_INFINITY);
            }
            acc.add(self.prior[k] * self.sums[k]);
        }
        Ok(acc.value() / (mass * self.n as f64))
    }

    /// Membership of the ball `{xⁿ : S(xⁿ)/n ≥ radius}`.
    pub fn ball(&self, radius: f64) -> Vec<bool> {
        let threshold = radius * self.n as f64;
        self.sums.iter().map(|&s| s >= threshold).collect()
    }

    fn finite_average_range(&self) -> (f64, f64) {
        let n = self.n as f64;
        self.sums
            .iter()
            .filter(|s| s.is_finite())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &s| (lo.min(s / n), hi.max(s / n)))
    }
}

/// Sets of input blocks.
pub enum Subset<'a> {
    /// The whole space.
    All,
    /// `{xⁿ : S(xⁿ)/n ≥ ι}`, evaluated from the block level law at any `n`.
    Threshold(f64),
    /// Membership vector over mixed-radix indices.
    Members(&'a [bool]),
    Predicate(&'a dyn Fn(&[usize]) -> bool),
}

/// `ι_{yⁿ}(S)` in nats.
pub fn conditional_mean_llr(channel: &DiscreteJointChannel, y_block: &[usize], subset: &Subset<'_>) -> Result<f64> {
    match subset {
        Subset::All => {
            if y_block.is_empty() {
                return Err(Error::InvalidArgument("empty output block".into()));
            }
            let per_y: Vec<f64> = (0..channel.num_y())
                .map(|y| {
                    sum((0..channel.num_x()).map(|x| {
                        let l = channel.log_ratio(x, y);
                        if l == f64::NEG_INFINITY {
                            f64::NEG_INFINITY
                        } else {
                            channel.marginal_x()[x] * l
                        }
                    }))
                })
                .collect();
            let mut acc = CompensatedSum::new();
            for &y in y_block {
                let v = *per_y
                    .get(y)
                    .ok_or_else(|| Error::InvalidArgument(format!("output symbol {y} out of range")))?;
                if v == f64::NEG_INFINITY {
                    return Ok(f64::NEG_INFINITY);
                }
                acc.add(v);
            }
            Ok(acc.value() / y_block.len() as f64)
        }
        Subset::Threshold(iota) => {
            let dist = block_level_distribution(channel, y_block)?;
            let n = y_block.len() as f64;
            let j = dist.first_at_or_above(iota * n);
            let lp = &dist.log_prior_masses()[j..];
            if lp.is_empty() {
                return Err(Error::EmptySet);
            }
            let log_tail = log_sum_exp(lp.iter().copied());
            let mean = sum(dist.levels()[j..].iter().zip(lp).map(|(l, p)| (p - log_tail).exp() * l));
            Ok(mean / n)
        }
        Subset::Members(members) => {
            let e = BlockEnumeration::new(channel, y_block)?;
            if members.len() != e.len() {
                return Err(Error::InvalidArgument("membership vector has the wrong length".into()));
            }
            e.conditional_mean(members)
        }
        Subset::Predicate(pred) => {
            let e = BlockEnumeration::new(channel, y_block)?;
            let members: Vec<bool> = (0..e.len()).map(|k| pred(&e.sequence(k))).collect();
            e.conditional_mean(&members)
        }
    }
}

/// `ι_{yⁿ,z} = ι_A − 1 / (M̲ λ̲² √m̲₂ n)`.
pub fn ball_radius(iota_a: f64, constants: &RegularityConstants, n: usize) -> f64 {
    iota_a - constants.radius_scale() / n as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GibbsReport {
    pub n: usize,
    pub iota_a: f64,
    pub radius: f64,
    pub iota_b: f64,
    pub p_a: f64,
    pub p_b: f64,
    /// `ι(B) ≤ ι(A)`.
    pub iota_ok: bool,
    /// `P(B) ≥ P(A)`.
    pub prob_ok: bool,
    /// Whether `n` is large enough for the Gibbs bound to apply with these
    /// constants.
    pub in_regime: bool,
}

impl GibbsReport {
    pub fn passed(&self) -> bool {
        self.iota_ok && self.prob_ok
    }
}

/// Builds the ball for `A` with the radius given by the constants and
/// compares the two sets.
pub fn gibbs_check(
    enumeration: &BlockEnumeration,
    a: &[bool],
    constants: &RegularityConstants,
) -> Result<GibbsReport> {
    let iota_a = enumeration.conditional_mean(a)?;
    let radius = ball_radius(iota_a, constants, enumeration.n);
    let mut report = gibbs_check_with_radius(enumeration, a, radius)?;
    report.in_regime = enumeration.n as u64 >= constants.gibbs_min_n();
    Ok(report)
}

/// As [`gibbs_check`] with an explicit radius. Fails with `RadiusOutOfRange`
/// when the ball would contain no finite-ratio sequence.
pub fn gibbs_check_with_radius(enumeration: &BlockEnumeration, a: &[bool], radius: f64) -> Result<GibbsReport> {
    if a.len() != enumeration.len() {
        return Err(Error::InvalidArgument("membership vector has the wrong length".into()));
    }
    let iota_a = enumeration.conditional_mean(a)?;
    let b = enumeration.ball(radius);
    let p_b = enumeration.mass(&b);
    if p_b <= 0.0 {
        let (lo, hi) = enumeration.finite_average_range();
        return Err(Error::RadiusOutOfRange { radius, lo, hi });
    }
    let iota_b = enumeration.conditional_mean(&b)?;
    let p_a = enumeration.mass(a);
    Ok(GibbsReport {
        n: enumeration.n,
        iota_a,
        radius,
        iota_b,
        p_a,
        p_b,
        iota_ok: iota_b <= iota_a + GIBBS_TOLERANCE,
        prob_ok: p_b >= p_a - GIBBS_TOLERANCE,
        in_regime: false,
    })
}

/// `Λ'(λ, yⁿ) = (1/n) Σᵢ Λ'(λ, yᵢ)`.
pub fn block_cumulant_derivative(channel: &DiscreteJointChannel, lambda: f64, counts: &[usize]) -> Result<f64> {
    let n: usize = counts.iter().sum();
    let terms: Vec<f64> = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(y, &c)| Ok(c as f64 * tilted_measure(channel, lambda, y)?.raw_moment(1)))
        .collect::<Result<_>>()?;
    Ok(sum(terms) / n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallBoundReport {
    pub n: usize,
    pub radius: f64,
    /// Solution of `Λ'(λ, yⁿ) = radius`.
    pub lambda: f64,
    /// `ln P_{Xⁿ}(B)`.
    pub ln_exact: f64,
    /// `−nι − ½ ln n + ln(1/√(2π m̲₂) + m̄₃/m̲₂)`.
    pub ln_bound: f64,
    /// `lb(bound) − lb(P(B))`.
    pub slack_bits: f64,
    pub holds: bool,
}

/// Compares the exact prior probability of the ball of radius `radius` with
/// the refined large-deviations bound.
pub fn ball_probability_bound_check(
    channel: &DiscreteJointChannel,
    y_block: &[usize],
    constants: &RegularityConstants,
    radius: f64,
    lambda_solver_tol: f64,
) -> Result<BallBoundReport> {
    if y_block.is_empty() {
        return Err(Error::InvalidArgument("empty output block".into()));
    }
    let mut counts = vec![0usize; channel.num_y()];
    for &y in y_block {
        *counts
            .get_mut(y)
            .ok_or_else(|| Error::InvalidArgument(format!("output symbol {y} out of range")))? += 1;
    }
    let mut lo = constants.lambda_lo;
    let mut hi = constants.lambda_hi;
    let d_lo = block_cumulant_derivative(channel, lo, &counts)?;
    let d_hi = block_cumulant_derivative(channel, hi, &counts)?;
    if !(d_lo < radius && radius < d_hi) {
        return Err(Error::RadiusOutOfRange { radius, lo: d_lo, hi: d_hi });
    }
    while hi - lo > lambda_solver_tol {
        let mid = 0.5 * (lo + hi);
        if block_cumulant_derivative(channel, mid, &counts)? < radius {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lambda = 0.5 * (lo + hi);

    let n = y_block.len();
    let nf = n as f64;
    let dist = block_level_distribution(channel, y_block)?;
    let ln_exact = dist.log_prior_tail(radius * nf);
    let m2 = constants.m2_lo;
    let ln_bound =
        -nf * radius - 0.5 * nf.ln() + (1.0 / (2.0 * std::f64::consts::PI * m2).sqrt() + constants.m3_hi / m2).ln();
    Ok(BallBoundReport {
        n,
        radius,
        lambda,
        ln_exact,
        ln_bound,
        slack_bits: (ln_bound - ln_exact) * LB_E,
        holds: ln_exact <= ln_bound,
    })
}

/// `ln P_{Xⁿ}(B)` by enumeration, for cross-checking the level-law tail.
pub fn enumerated_log_ball_mass(enumeration: &BlockEnumeration, radius: f64) -> f64 {
    let threshold = radius * enumeration.n as f64;
    let mut acc = LogAccumulator::new();
    for (s, p) in enumeration.sums.iter().zip(&enumeration.prior) {
        if *s >= threshold && *p > 0.0 {
            acc.add(p.ln());
        }
    }
    acc.value()
}
