//! Small numerical building blocks shared across modules.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

/// Relative tolerance under which two likelihood-ratio levels are merged.
pub const LEVEL_MERGE_RTOL: f64 = 1e-12;

/// Whether two levels coincide under the merging rule.
#[inline]
pub fn levels_coincide(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= LEVEL_MERGE_RTOL * a.abs().max(b.abs()).max(1.0)
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of a sequence.
pub fn sum(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().collect::<CompensatedSum>().value()
}

/// Accumulates `ln Σ exp(xᵢ)` with a moving shift and a compensated linear sum,
/// so that terms spanning thousands of nats are combined without underflow.
#[derive(Debug, Clone, Copy)]
pub struct LogAccumulator {
    shift: f64,
    sum: CompensatedSum,
}

impl Default for LogAccumulator {
    fn default() -> Self {
        Self {
            shift: f64::NEG_INFINITY,
            sum: CompensatedSum::new(),
        }
    }
}

impl LogAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, log_x: f64) {
        if log_x == f64::NEG_INFINITY {
            return;
        }
        if log_x > self.shift {
            let scale = (self.shift - log_x).exp();
            let old = self.sum.value();
            self.sum = CompensatedSum::new();
            self.sum.add(old * scale);
            self.shift = log_x;
        }
        self.sum.add((log_x - self.shift).exp());
    }

    pub fn value(&self) -> f64 {
        if self.shift == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.shift + self.sum.value().ln()
        }
    }
}

/// `ln Σ exp(xᵢ)`.
pub fn log_sum_exp(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = LogAccumulator::new();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

/// `ln(eᵃ + eᵇ)`.
#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// `ln(1 − eˣ)` for `x ≤ 0`.
#[inline]
pub fn log1m_exp(x: f64) -> f64 {
    if x > -std::f64::consts::LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

/// `−x ln x` with the convention `0 ln 0 = 0`.
#[inline]
pub fn neg_x_ln_x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -x * x.ln()
    }
}

/// A Monte-Carlo (or exact) estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { value, stderr: 0.0 }
    }

    /// Sample mean and standard error of the mean.
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len() as f64;
        let mean = sum(samples.iter().copied()) / n;
        if samples.len() < 2 {
            return Self { value: mean, stderr: 0.0 };
        }
        let var = sum(samples.iter().map(|x| (x - mean).powi(2))) / (n - 1.0);
        Self {
            value: mean,
            stderr: (var / n).sqrt(),
        }
    }
}

/// Standard normal CDF.
pub fn std_normal_cdf(x: f64) -> f64 {
    // statrs' erfc-based CDF keeps full relative accuracy in the tails.
    thread_local! {
        static STD: Normal = Normal::new(0.0, 1.0).expect("unit normal");
    }
    STD.with(|n| n.cdf(x))
}

/// Kolmogorov–Smirnov distance between the empirical law of `samples` and
/// `Normal(0, variance)`. Sorts `samples` in place. Ties are handled exactly.
pub fn ks_distance_normal(samples: &mut [f64], variance: f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    let sd = variance.sqrt();
    let mut worst: f64 = 0.0;
    let mut i = 0;
    while i < samples.len() {
        let x = samples[i];
        let mut j = i;
        while j + 1 < samples.len() && samples[j + 1] == x {
            j += 1;
        }
        let f = std_normal_cdf(x / sd);
        let below = i as f64 / n;
        let upto = (j + 1) as f64 / n;
        worst = worst.max((f - below).abs()).max((upto - f).abs());
        i = j + 1;
    }
    worst
}

/// Composite Simpson integration of a vector-valued integrand on `[a, b]`,
/// doubling the panel count until every component changes by less than `tol`
/// between successive refinements. Returns the final estimates.
pub fn simpson_vec<const K: usize, F>(f: F, a: f64, b: f64, tol: f64, max_panels: usize) -> [f64; K]
where
    F: Fn(f64) -> [f64; K],
{
    // Endpoints and interior points are kept so each refinement only evaluates
    // the new midpoints.
    let fa = f(a);
    let fb = f(b);
    let mut panels = 2usize;
    let mut h = (b - a) / panels as f64;
    let mut ends = [0.0; K];
    for k in 0..K {
        ends[k] = fa[k] + fb[k];
    }
    let mid = f(a + h);
    let mut odd = mid;
    let mut even = [0.0; K];
    let estimate = |ends: &[f64; K], odd: &[f64; K], even: &[f64; K], h: f64| {
        let mut out = [0.0; K];
        for k in 0..K {
            out[k] = h / 3.0 * (ends[k] + 4.0 * odd[k] + 2.0 * even[k]);
        }
        out
    };
    let mut prev = estimate(&ends, &odd, &even, h);
    loop {
        panels *= 2;
        h = (b - a) / panels as f64;
        for k in 0..K {
            even[k] += odd[k];
            odd[k] = 0.0;
        }
        let mut acc = [CompensatedSum::new(); K];
        let mut i = 1;
        while i < panels {
            let v = f(a + i as f64 * h);
            for k in 0..K {
                acc[k].add(v[k]);
            }
            i += 2;
        }
        for k in 0..K {
            odd[k] = acc[k].value();
        }
        let next = estimate(&ends, &odd, &even, h);
        let converged = (0..K).all(|k| (next[k] - prev[k]).abs() < tol);
        if (converged && panels >= 64) || panels >= max_panels {
            return next;
        }
        prev = next;
    }
}

/// SplitMix64 finaliser, used to derive independent per-task seeds from a
/// master seed and a task index.
#[inline]
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Samples a categorical index from a 64-bit uniform integer using fixed-point
/// cumulative thresholds, so the mapping involves no floating-point operations
/// on the random path.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegerCategorical {
    thresholds: Vec<u64>,
}

impl IntegerCategorical {
    pub fn new(probs: &[f64]) -> Self {
        let total = sum(probs.iter().copied());
        let mut cum = CompensatedSum::new();
        let mut thresholds = Vec::with_capacity(probs.len());
        let last_positive = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
        for (i, &p) in probs.iter().enumerate() {
            cum.add(p);
            let t = if i >= last_positive {
                u64::MAX
            } else {
                let frac = (cum.value() / total).clamp(0.0, 1.0);
                // 2^64 · frac, saturated.
                let scaled = frac * 18_446_744_073_709_551_616.0;
                if scaled >= 18_446_744_073_709_551_615.0 {
                    u64::MAX
                } else {
                    scaled as u64
                }
            };
            thresholds.push(t);
        }
        Self { thresholds }
    }

    #[inline]
    pub fn sample(&self, u: u64) -> usize {
        self.thresholds
            .iter()
            .position(|&t| u < t)
            .unwrap_or(self.thresholds.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.thresholds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thresholds.is_empty()
    }
}
