//! Channel models: finite joint distributions and the scalar Gaussian channel.
//!
//! The central object is the likelihood ratio `r(x|y) = p(x|y) / p(x)`, which
//! for a discrete joint law equals `p(x, y) / (p(x) p(y))`. Everything
//! downstream consumes either `r` or its logarithm.

use serde::{Deserialize, Serialize};

use crate::numeric::{levels_coincide, sum, CompensatedSum};
use crate::{nats_to_bits, Error, Result};

/// Tolerance on the total mass of a joint table.
pub const MASS_TOLERANCE: f64 = 1e-12;
/// Tables whose mass deviates from one by less than this are renormalised.
pub const RENORMALIZE_TOLERANCE: f64 = 1e-9;

/// A finite joint law `p(x, y)`; rows are indexed by `x`, columns by `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteJointChannel {
    joint: Vec<Vec<f64>>,
    marginal_x: Vec<f64>,
    marginal_y: Vec<f64>,
    /// `posterior[y][x] = p(x | y)`.
    posterior: Vec<Vec<f64>>,
    declared_symmetric: bool,
}

impl DiscreteJointChannel {
    /// Builds a channel from a joint table. Rows or columns with zero mass are
    /// rejected; a total mass within [`RENORMALIZE_TOLERANCE`] of one is
    /// renormalised.
    pub fn new(joint: Vec<Vec<f64>>) -> Result<Self> {
        let nx = joint.len();
        if nx == 0 {
            return Err(Error::InvalidChannel("empty joint table".into()));
        }
        let ny = joint[0].len();
        if ny == 0 || joint.iter().any(|row| row.len() != ny) {
            return Err(Error::InvalidChannel("joint table must be a non-empty rectangle".into()));
        }
        for (x, row) in joint.iter().enumerate() {
            for (y, &p) in row.iter().enumerate() {
                if !p.is_finite() || p < 0.0 {
                    return Err(Error::InvalidChannel(format!("entry ({x}, {y}) = {p} is not a probability")));
                }
            }
        }
        let total = sum(joint.iter().flatten().copied());
        if (total - 1.0).abs() >= RENORMALIZE_TOLERANCE {
            return Err(Error::InvalidChannel(format!("total mass {total} is not 1")));
        }
        let joint: Vec<Vec<f64>> = if (total - 1.0).abs() > MASS_TOLERANCE {
            joint.into_iter().map(|row| row.into_iter().map(|p| p / total).collect()).collect()
        } else {
            joint
        };

        let marginal_x: Vec<f64> = joint.iter().map(|row| sum(row.iter().copied())).collect();
        let marginal_y: Vec<f64> = (0..ny).map(|y| sum(joint.iter().map(|row| row[y]))).collect();
        if let Some(x) = marginal_x.iter().position(|&p| p <= 0.0) {
            return Err(Error::InvalidChannel(format!("row x = {x} has zero mass")));
        }
        if let Some(y) = marginal_y.iter().position(|&p| p <= 0.0) {
            return Err(Error::InvalidChannel(format!("column y = {y} has zero mass")));
        }
        let posterior = (0..ny)
            .map(|y| (0..nx).map(|x| joint[x][y] / marginal_y[y]).collect())
            .collect();
        Ok(Self {
            joint,
            marginal_x,
            marginal_y,
            posterior,
            declared_symmetric: false,
        })
    }

    /// Builds `p(x, y) = p(x) · W(y | x)` from an input law and a row-stochastic
    /// transition matrix.
    pub fn from_input_and_transition(px: &[f64], transition: &[Vec<f64>]) -> Result<Self> {
        if px.len() != transition.len() {
            return Err(Error::InvalidChannel("input law and transition rows disagree in size".into()));
        }
        let joint = px
            .iter()
            .zip(transition)
            .map(|(&p, row)| row.iter().map(|&w| p * w).collect())
            .collect();
        Self::new(joint)
    }

    /// Binary symmetric channel with crossover `p` and uniform input.
    pub fn bsc(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("crossover {p} outside [0, 1]")));
        }
        let ch = Self::new(vec![vec![0.5 * (1.0 - p), 0.5 * p], vec![0.5 * p, 0.5 * (1.0 - p)]])?;
        Ok(ch.with_declared_symmetry(true))
    }

    /// Noiseless channel `Y = X` with `X` uniform on `k` symbols.
    pub fn identity(k: usize) -> Result<Self> {
        let joint = (0..k)
            .map(|x| (0..k).map(|y| if x == y { 1.0 / k as f64 } else { 0.0 }).collect())
            .collect();
        Ok(Self::new(joint)?.with_declared_symmetry(true))
    }

    /// Product law `p(x) p(y)`.
    pub fn independent(px: &[f64], py: &[f64]) -> Result<Self> {
        let joint = px.iter().map(|&a| py.iter().map(|&b| a * b).collect()).collect();
        Ok(Self::new(joint)?.with_declared_symmetry(true))
    }

    /// Marks (or unmarks) the channel as y-permutation symmetric. The flag is
    /// still validated by [`crate::blocks::is_y_symmetric`] before use.
    pub fn with_declared_symmetry(mut self, symmetric: bool) -> Self {
        self.declared_symmetric = symmetric;
        self
    }

    pub fn declared_symmetric(&self) -> bool {
        self.declared_symmetric
    }

    pub fn num_x(&self) -> usize {
        self.marginal_x.len()
    }

    pub fn num_y(&self) -> usize {
        self.marginal_y.len()
    }

    pub fn joint(&self) -> &[Vec<f64>] {
        &self.joint
    }

    pub fn marginal_x(&self) -> &[f64] {
        &self.marginal_x
    }

    pub fn marginal_y(&self) -> &[f64] {
        &self.marginal_y
    }

    /// `p(· | y)` as a vector over `x`.
    pub fn posterior(&self, y: usize) -> &[f64] {
        &self.posterior[y]
    }

    /// `p(· | x)` as a vector over `y`.
    pub fn transition(&self, x: usize) -> Vec<f64> {
        self.joint[x].iter().map(|&p| p / self.marginal_x[x]).collect()
    }

    /// `r(x|y) = p(x|y)/p(x)`; also equals `p(y|x)/p(y)`.
    #[inline]
    pub fn ratio(&self, x: usize, y: usize) -> f64 {
        self.posterior[y][x] / self.marginal_x[x]
    }

    /// `ln r(x|y)`, `−∞` where `p(x|y) = 0`.
    #[inline]
    pub fn log_ratio(&self, x: usize, y: usize) -> f64 {
        let p = self.joint[x][y];
        if p == 0.0 {
            f64::NEG_INFINITY
        } else {
            p.ln() - self.marginal_x[x].ln() - self.marginal_y[y].ln()
        }
    }

    fn check_symbols(&self, x: usize, y: usize) -> Result<()> {
        if x >= self.num_x() || y >= self.num_y() {
            return Err(Error::InvalidArgument(format!(
                "symbol pair ({x}, {y}) outside a {}×{} alphabet",
                self.num_x(),
                self.num_y()
            )));
        }
        Ok(())
    }
}

/// `X ~ N(0, σₓ²)`, `Y = X + N(0, σₙ²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianChannel {
    sigma_x: f64,
    sigma_n: f64,
}

impl GaussianChannel {
    pub fn new(sigma_x: f64, sigma_n: f64) -> Result<Self> {
        if !(sigma_x > 0.0 && sigma_x.is_finite() && sigma_n > 0.0 && sigma_n.is_finite()) {
            return Err(Error::InvalidChannel(format!(
                "standard deviations must be positive and finite (got {sigma_x}, {sigma_n})"
            )));
        }
        Ok(Self { sigma_x, sigma_n })
    }

    pub fn sigma_x(&self) -> f64 {
        self.sigma_x
    }

    pub fn sigma_n(&self) -> f64 {
        self.sigma_n
    }

    pub fn sigma_y(&self) -> f64 {
        (self.sigma_x.powi(2) + self.sigma_n.powi(2)).sqrt()
    }

    /// `a = σₓ² / (σₓ² + σₙ²)`, so that `E[X | Y = y] = a y`.
    pub fn shrinkage(&self) -> f64 {
        let sx2 = self.sigma_x * self.sigma_x;
        sx2 / (sx2 + self.sigma_n * self.sigma_n)
    }

    /// `Var[X | Y] = σₓ² (1 − a)`.
    pub fn posterior_variance(&self) -> f64 {
        self.sigma_x.powi(2) * (1.0 - self.shrinkage())
    }

    /// Posterior mean and standard deviation of `X` given `Y = y`.
    pub fn posterior(&self, y: f64) -> (f64, f64) {
        (self.shrinkage() * y, self.posterior_variance().sqrt())
    }

    /// `ln r(x|y)`, quadratic and concave in `x` with its maximum at `x = y`.
    pub fn log_ratio(&self, x: f64, y: f64) -> f64 {
        let (alpha, beta) = self.log_ratio_peak(y);
        alpha - beta * (x - y).powi(2)
    }

    /// `(α, β)` with `ln r(x|y) = α − β (x − y)²`.
    pub fn log_ratio_peak(&self, y: f64) -> (f64, f64) {
        let a = self.shrinkage();
        let sx2 = self.sigma_x * self.sigma_x;
        let alpha = a * y * y / (2.0 * sx2) - 0.5 * (-a).ln_1p();
        let beta = a / (2.0 * sx2 * (1.0 - a));
        (alpha, beta)
    }

    /// `I(X;Y)` in nats.
    pub fn mutual_information_nats(&self) -> f64 {
        0.5 * (self.sigma_x.powi(2) / self.sigma_n.powi(2)).ln_1p()
    }

    /// `κ_y = D(P_{X|Y=y} ‖ P_X)` in nats.
    pub fn conditional_kl_nats(&self, y: f64) -> f64 {
        let a = self.shrinkage();
        let rho = 1.0 - a;
        let sx2 = self.sigma_x * self.sigma_x;
        0.5 * (rho + a * a * y * y / sx2 - 1.0 - rho.ln())
    }

    /// `σ²_y = Var[ln r(X|y) | Y = y]` in nats².
    pub fn conditional_llr_variance(&self, y: f64) -> f64 {
        let a = self.shrinkage();
        let sx2 = self.sigma_x * self.sigma_x;
        let v = self.posterior_variance();
        0.5 * a * a + a * a * y * y * v / (sx2 * sx2)
    }

    /// `E_Y[σ²_Y] = a²/2 + a(1 − a)`.
    pub fn mean_conditional_llr_variance(&self) -> f64 {
        let a = self.shrinkage();
        0.5 * a * a + a * (1.0 - a)
    }
}

/// Any supported channel.
#[derive(Debug, Clone, PartialEq)]
pub enum Channel {
    Discrete(DiscreteJointChannel),
    Gaussian(GaussianChannel),
}

impl From<DiscreteJointChannel> for Channel {
    fn from(c: DiscreteJointChannel) -> Self {
        Channel::Discrete(c)
    }
}

impl From<GaussianChannel> for Channel {
    fn from(c: GaussianChannel) -> Self {
        Channel::Gaussian(c)
    }
}

impl Channel {
    pub fn as_discrete(&self) -> Option<&DiscreteJointChannel> {
        match self {
            Channel::Discrete(c) => Some(c),
            Channel::Gaussian(_) => None,
        }
    }
}

/// A point of a channel alphabet: a symbol index or a real value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Point {
    Symbol(usize),
    Real(f64),
}

/// JSON channel description: `{"type":"discrete","joint":[[..],..]}` or
/// `{"type":"gaussian","sigma_x":..,"sigma_n":..}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ChannelSpec {
    Discrete {
        joint: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        symmetric: Option<bool>,
    },
    Gaussian { sigma_x: f64, sigma_n: f64 },
}

impl ChannelSpec {
    pub fn build(&self) -> Result<Channel> {
        match self {
            ChannelSpec::Discrete { joint, symmetric } => Ok(Channel::Discrete(
                DiscreteJointChannel::new(joint.clone())?.with_declared_symmetry(symmetric.unwrap_or(false)),
            )),
            ChannelSpec::Gaussian { sigma_x, sigma_n } => Ok(Channel::Gaussian(GaussianChannel::new(*sigma_x, *sigma_n)?)),
        }
    }
}

impl From<&Channel> for ChannelSpec {
    fn from(c: &Channel) -> Self {
        match c {
            Channel::Discrete(d) => ChannelSpec::Discrete {
                joint: d.joint.clone(),
                symmetric: d.declared_symmetric.then_some(true),
            },
            Channel::Gaussian(g) => ChannelSpec::Gaussian {
                sigma_x: g.sigma_x,
                sigma_n: g.sigma_n,
            },
        }
    }
}

/// Moments of the information density `ln r(X|Y)` under the joint law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogLikelihoodStats {
    /// `E[ln r]` in nats, i.e. the mutual information.
    pub mean_i: f64,
    /// `Var[ln r]` in nats².
    pub var: f64,
    /// `σ²_y = Var[ln r(X|y) | Y = y]` per output symbol (empty for the
    /// Gaussian channel, whose per-y variance is a function).
    pub per_y_variance: Vec<f64>,
    /// `E_Y[σ²_Y]`, the limit variance of the normalised block sum.
    pub mean_conditional_variance: f64,
}

/// Result of [`is_nonsingular`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Singularity {
    pub nonsingular: bool,
    /// An output symbol whose slice has at least two on-support ratio values.
    pub witness: Option<usize>,
}

/// `ln r(x|y)` in nats.
pub fn log_likelihood_ratio(channel: &Channel, x: Point, y: Point) -> Result<f64> {
    match (channel, x, y) {
        (Channel::Discrete(c), Point::Symbol(x), Point::Symbol(y)) => {
            c.check_symbols(x, y)?;
            Ok(c.log_ratio(x, y))
        }
        (Channel::Gaussian(g), Point::Real(x), Point::Real(y)) => Ok(g.log_ratio(x, y)),
        _ => Err(Error::InvalidArgument("point kinds do not match the channel alphabet".into())),
    }
}

/// Mutual information in nats.
pub fn mutual_information_nats(channel: &Channel) -> f64 {
    match channel {
        Channel::Discrete(c) => discrete_llr_mean(c),
        Channel::Gaussian(g) => g.mutual_information_nats(),
    }
}

/// Mutual information in bits.
pub fn mutual_information(channel: &Channel) -> f64 {
    nats_to_bits(mutual_information_nats(channel))
}

fn discrete_llr_mean(c: &DiscreteJointChannel) -> f64 {
    let mut acc = CompensatedSum::new();
    for x in 0..c.num_x() {
        for y in 0..c.num_y() {
            let p = c.joint[x][y];
            if p > 0.0 {
                acc.add(p * c.log_ratio(x, y));
            }
        }
    }
    acc.value().max(0.0)
}

/// Whether some output slice has a non-constant likelihood ratio on the
/// support of `P_{X|Y=y}`. The independent channel (`r ≡ 1`) is singular.
pub fn is_nonsingular(channel: &Channel) -> Singularity {
    match channel {
        Channel::Gaussian(_) => Singularity {
            nonsingular: true,
            witness: None,
        },
        Channel::Discrete(c) => {
            let witness = (0..c.num_y()).find(|&y| slice_has_spread(c, y));
            Singularity {
                nonsingular: witness.is_some(),
                witness,
            }
        }
    }
}

pub(crate) fn slice_has_spread(c: &DiscreteJointChannel, y: usize) -> bool {
    let mut on_support = (0..c.num_x()).filter(|&x| c.joint[x][y] > 0.0).map(|x| c.log_ratio(x, y));
    let Some(first) = on_support.next() else {
        return false;
    };
    on_support.any(|l| !levels_coincide(l, first))
}

/// Exact moments of the information density for discrete channels; closed
/// forms for the Gaussian channel.
pub fn llr_stats(channel: &Channel) -> LogLikelihoodStats {
    match channel {
        Channel::Gaussian(g) => {
            let a = g.shrinkage();
            LogLikelihoodStats {
                mean_i: g.mutual_information_nats(),
                // E_Y σ²_Y + Var_Y κ_Y = a(1 − a) + a²/2 + a²/2.
                var: a,
                per_y_variance: Vec::new(),
                mean_conditional_variance: g.mean_conditional_llr_variance(),
            }
        }
        Channel::Discrete(c) => {
            let mean = discrete_llr_mean(c);
            let mut var = CompensatedSum::new();
            let mut per_y_variance = Vec::with_capacity(c.num_y());
            let mut mean_cond = CompensatedSum::new();
            for y in 0..c.num_y() {
                let post = c.posterior(y);
                let kappa = sum((0..c.num_x()).filter(|&x| post[x] > 0.0).map(|x| post[x] * c.log_ratio(x, y)));
                let v = if slice_has_spread(c, y) {
                    sum((0..c.num_x())
                        .filter(|&x| post[x] > 0.0)
                        .map(|x| post[x] * (c.log_ratio(x, y) - kappa).powi(2)))
                } else {
                    0.0
                };
                per_y_variance.push(v);
                mean_cond.add(c.marginal_y[y] * v);
                for x in 0..c.num_x() {
                    let p = c.joint[x][y];
                    if p > 0.0 {
                        var.add(p * (c.log_ratio(x, y) - mean).powi(2));
                    }
                }
            }
            LogLikelihoodStats {
                mean_i: mean,
                var: var.value(),
                per_y_variance,
                mean_conditional_variance: mean_cond.value(),
            }
        }
    }
}
