//! Experiment dispatch.

use std::time::Instant;

use clap::ValueEnum;
use csdlab_core::acceptance::{self, CriterionOutcome};
use csdlab_core::blocks::{
    is_y_symmetric, redundancy_curve_capped, sample_y_block, verify_cdf_identity, BlockMode,
};
use csdlab_core::channel::{is_nonsingular, mutual_information_nats, Channel, ChannelSpec, DiscreteJointChannel};
use csdlab_core::fixtures;
use csdlab_core::numeric::derive_seed;
use csdlab_core::sampler::conditional_index_entropy;
use csdlab_core::tilting::{
    ball_probability_bound_check, choose_epsilon, cumulant, find_operating_interval, k_epsilon_grid,
    moment_bound_check, regularity_constants, stochastic_dominance_check, typicality_sweep, OperatingInterval,
    RegularityConstants,
};
use csdlab_core::width::{divergence_gap, expected_conditional_dcs, gaussian_divergence_report, GaussianQuadrature};
use serde::Serialize;

use crate::config::{load_channel, Experiment, ExperimentConfig, SweepMode, Tolerances};
use crate::error::{CliError, CliResult};
use crate::output::{to_csv, to_json};
use crate::records::*;

const INDEX_SEEDS: usize = 500;
const CORRIDOR_BITS: f64 = 8.0;
const CONVEXITY_TOLERANCE: f64 = 1e-12;
const CDF_TOLERANCE: f64 = 1e-9;
const CHECK_CDF_MAX_N: usize = 6;
const DOMINANCE_GRID_POINTS: usize = 21;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TiltVerb {
    Cumulant,
    Dominance,
    Typicality,
    Ball,
}

impl TiltVerb {
    fn name(&self) -> &'static str {
        match self {
            TiltVerb::Cumulant => "cumulant",
            TiltVerb::Dominance => "dominance",
            TiltVerb::Typicality => "typicality",
            TiltVerb::Ball => "ball",
        }
    }
}

/// Serialised outputs in both formats and the violated assertions.
pub struct Report {
    pub json: Vec<u8>,
    pub csv: Vec<u8>,
    pub violations: Vec<String>,
}

struct Context<'a> {
    experiment: Experiment,
    config: &'a ExperimentConfig,
    channel: Option<ChannelSpec>,
    verb: Option<&'static str>,
    start: Instant,
}

impl Context<'_> {
    fn report<T: Serialize, R: Serialize>(&self, outputs: T, rows: &[R], violations: Vec<String>) -> CliResult<Report> {
        let record = ExperimentRecord {
            schema_version: SCHEMA_VERSION,
            experiment: self.experiment.name(),
            library_version: LIBRARY_VERSION,
            inputs: Inputs {
                config: self.config.clone(),
                channel: self.channel.clone(),
                verb: self.verb,
            },
            outputs,
            wall_clock_seconds: self.config.record_wall_clock.then(|| self.start.elapsed().as_secs_f64()),
        };
        Ok(Report {
            json: to_json(&record)?,
            csv: to_csv(rows)?,
            violations,
        })
    }
}

fn discrete<'a>(channel: &'a Channel, experiment: &str) -> CliResult<&'a DiscreteJointChannel> {
    channel
        .as_discrete()
        .ok_or_else(|| CliError::Config(format!("{experiment} needs a discrete channel")))
}

/// Runs one experiment. `verb` is required for `tilt-lab`.
pub fn run(experiment: Experiment, verb: Option<TiltVerb>, config: &ExperimentConfig) -> CliResult<Report> {
    config.validate(experiment)?;
    let start = Instant::now();
    let loaded = match &config.channel_path {
        Some(p) if experiment != Experiment::VerifyAll => Some(load_channel(p)?),
        _ => None,
    };
    let ctx = Context {
        experiment,
        config,
        channel: loaded.as_ref().map(|l| l.0.clone()),
        verb: verb.map(|v| v.name()),
        start,
    };
    let channel = loaded.map(|l| l.1);
    match experiment {
        Experiment::Divergence => divergence(&ctx, channel.as_ref().expect("validated")),
        Experiment::RedundancySweep => redundancy_sweep(&ctx, channel.as_ref().expect("validated")),
        Experiment::Simulate => simulate(&ctx, channel.as_ref().expect("validated")),
        Experiment::TiltLab => {
            let verb = verb.ok_or_else(|| CliError::Config("tilt-lab needs a verb".into()))?;
            tilt_lab(&ctx, verb, channel.as_ref().expect("validated"))
        }
        Experiment::VerifyAll => verify_all(&ctx),
    }
}

fn divergence_rows(channel: &Channel, config: &ExperimentConfig) -> CliResult<(Vec<DivergenceRow>, Vec<String>)> {
    let tol = &config.tolerances;
    let mut rows = Vec::new();
    let mut violations = Vec::new();
    let identity_tol = match channel {
        Channel::Discrete(c) => {
            for y in 0..c.num_y() {
                let r = divergence_gap(c.marginal_x(), c.posterior(y))?;
                rows.push(DivergenceRow {
                    y: y as f64,
                    p_y: Some(c.marginal_y()[y]),
                    d_cs: r.d_cs,
                    d_kl_direct: r.d_kl_direct,
                    d_kl_integral: r.d_kl_integral,
                    gap: r.gap,
                    log_width_entropy: r.log_width_entropy,
                    identity_residual: r.identity_residual(),
                });
            }
            tol.identity_discrete
        }
        Channel::Gaussian(g) => {
            let ys = if config.y_values.is_empty() { vec![0.0] } else { config.y_values.clone() };
            let quad = GaussianQuadrature {
                tol: tol.quadrature,
                ..GaussianQuadrature::default()
            };
            for y in ys {
                let r = gaussian_divergence_report(g, y, quad);
                rows.push(DivergenceRow {
                    y,
                    p_y: None,
                    d_cs: r.d_cs,
                    d_kl_direct: r.d_kl_direct,
                    d_kl_integral: r.d_kl_integral,
                    gap: r.gap,
                    log_width_entropy: r.log_width_entropy,
                    identity_residual: r.identity_residual(),
                });
            }
            tol.identity_gaussian
        }
    };
    for r in &rows {
        if r.identity_residual > identity_tol {
            violations.push(format!("y = {}: gap identity residual {:.3e} > {identity_tol:e}", r.y, r.identity_residual));
        }
        if (r.d_kl_direct - r.d_kl_integral).abs() > identity_tol {
            violations.push(format!("y = {}: KL routes differ by {:.3e}", r.y, (r.d_kl_direct - r.d_kl_integral).abs()));
        }
        if r.d_cs < r.d_kl_direct - tol.ordering {
            violations.push(format!("y = {}: D_CS {} < D_KL {}", r.y, r.d_cs, r.d_kl_direct));
        }
    }
    Ok((rows, violations))
}

fn divergence(ctx: &Context<'_>, channel: &Channel) -> CliResult<Report> {
    let (rows, violations) = divergence_rows(channel, ctx.config)?;
    let outputs = DivergenceOutputs {
        expected_dcs: channel.as_discrete().map(expected_conditional_dcs),
        rows: rows.clone(),
    };
    ctx.report(outputs, &rows, violations)
}

fn redundancy_sweep(ctx: &Context<'_>, channel: &Channel) -> CliResult<Report> {
    let c = discrete(channel, "redundancy-sweep")?;
    let cfg = ctx.config;
    let mode = match cfg.mode {
        SweepMode::Exact => BlockMode::Exact,
        SweepMode::MonteCarlo => BlockMode::MonteCarlo {
            samples: cfg.samples.expect("validated"),
            seed: cfg.seed,
        },
    };
    let curve = redundancy_curve_capped(c, &cfg.n_list, mode, cfg.tolerances.level_cap)?;
    let singular = !is_nonsingular(channel).nonsingular;
    let mut violations = Vec::new();
    let rows: Vec<RedundancyRow> = curve
        .iter()
        .map(|p| {
            if p.gap < -cfg.tolerances.gap_floor {
                violations.push(format!("n = {}: gap {} below -{}", p.n, p.gap, cfg.tolerances.gap_floor));
            }
            if singular && p.gap != 0.0 {
                violations.push(format!("n = {}: singular channel has nonzero gap {}", p.n, p.gap));
            }
            RedundancyRow {
                n: p.n,
                expected_dcs_bits: p.expected_dcs,
                block_mi_bits: p.block_mi,
                gap_bits: p.gap,
                gap_over_lbn: p.gap_over_lbn,
                stderr_bits: p.stderr,
                mode: mode.label(),
                seed: cfg.seed,
            }
        })
        .collect();
    ctx.report(&rows, &rows, violations)
}

#[derive(Debug, Clone, Serialize)]
struct SimulateRow {
    num_seeds: usize,
    #[serde(rename = "H_index_bits")]
    h_index_bits: f64,
    stderr: f64,
    #[serde(rename = "E_dcs_bits")]
    e_dcs_bits: f64,
    bound_satisfied: bool,
}

/// Whether a measured index entropy lies between `E_Y[D_CS] − 3σ` and the
/// upper corridor.
fn index_entropy_within_bounds(h: f64, stderr: f64, e: f64, tol: &Tolerances) -> bool {
    h >= e - 3.0 * stderr - tol.ordering && h <= e + (e + 1.0).log2() + CORRIDOR_BITS
}

fn simulate(ctx: &Context<'_>, channel: &Channel) -> CliResult<Report> {
    let c = discrete(channel, "simulate")?;
    let cfg = ctx.config;
    let num_seeds = cfg.samples.expect("validated");
    let h = conditional_index_entropy(c, num_seeds, cfg.seed, cfg.tolerances.max_proposals)?;
    let e = expected_conditional_dcs(c);
    let ok = index_entropy_within_bounds(h.value, h.stderr, e, &cfg.tolerances);
    let outputs = SimulateOutputs {
        channel: ctx.channel.clone().expect("loaded"),
        num_seeds,
        h_index_bits: h.value,
        stderr: h.stderr,
        e_dcs_bits: e,
        bound_satisfied: ok,
    };
    let row = SimulateRow {
        num_seeds,
        h_index_bits: h.value,
        stderr: h.stderr,
        e_dcs_bits: e,
        bound_satisfied: ok,
    };
    let violations = if ok {
        Vec::new()
    } else {
        vec![format!("H(N*|Z) = {} +- {} outside the bound corridor around E_Y[D_CS] = {e}", h.value, h.stderr)]
    };
    ctx.report(outputs, &[row], violations)
}

fn constants_for(c: &DiscreteJointChannel, cfg: &ExperimentConfig) -> CliResult<(OperatingInterval, RegularityConstants)> {
    let interval = find_operating_interval(c, cfg.lambda_grid_resolution)?;
    let epsilon = match cfg.epsilon {
        Some(e) => e,
        None => choose_epsilon(c, &interval)?,
    };
    let constants = regularity_constants(c, &interval, epsilon)?;
    Ok((interval, constants))
}

fn tilt_lab(ctx: &Context<'_>, verb: TiltVerb, channel: &Channel) -> CliResult<Report> {
    let c = discrete(channel, "tilt-lab")?;
    let cfg = ctx.config;
    let mut violations = Vec::new();
    match verb {
        TiltVerb::Cumulant => {
            let (interval, constants) = match constants_for(c, cfg) {
                Ok((i, k)) => (Some(i), Some(k)),
                Err(CliError::Library(csdlab_core::Error::SingularChannel)) => (None, None),
                Err(e) => return Err(e),
            };
            let lambdas = if cfg.lambda.is_empty() { vec![0.0, 0.5, 1.0, 1.5, 2.0] } else { cfg.lambda.clone() };
            let mut rows = Vec::new();
            for &lambda in &lambdas {
                for y in 0..c.num_y() {
                    let d = cumulant(c, lambda, y)?;
                    if d.d2 < -CONVEXITY_TOLERANCE {
                        violations.push(format!("Λ''({lambda}, {y}) = {} is negative", d.d2));
                    }
                    rows.push(CumulantRow {
                        lambda,
                        y,
                        value: d.value,
                        d1: d.d1,
                        d2: d.d2,
                        d3: d.d3,
                    });
                }
            }
            ctx.report(TiltOutputs { interval, constants, rows: rows.clone() }, &rows, violations)
        }
        TiltVerb::Dominance => {
            let (interval, constants) = constants_for(c, cfg)?;
            let grid = interval.grid(DOMINANCE_GRID_POINTS);
            let mut rows = Vec::new();
            for y in 0..c.num_y() {
                for w in grid.windows(2) {
                    let r = stochastic_dominance_check(c, y, w[0], w[1])?;
                    rows.push(CheckRow {
                        check: "dominance",
                        y,
                        k: None,
                        lambda1: w[0],
                        lambda2: w[1],
                        holds: r.holds,
                        worst_margin: r.worst_margin,
                    });
                }
                for k in 1..=6 {
                    let r = moment_bound_check(c, y, k, &grid)?;
                    rows.push(CheckRow {
                        check: "moment_bound",
                        y,
                        k: Some(k),
                        lambda1: interval.lambda_lo,
                        lambda2: interval.lambda_hi,
                        holds: r.holds,
                        worst_margin: r.worst_margin,
                    });
                }
            }
            for r in rows.iter().filter(|r| !r.holds) {
                violations.push(format!("{} check failed at y = {}, k = {:?}, margin {}", r.check, r.y, r.k, r.worst_margin));
            }
            let outputs = TiltOutputs {
                interval: Some(interval),
                constants: Some(constants),
                rows: rows.clone(),
            };
            ctx.report(outputs, &rows, violations)
        }
        TiltVerb::Typicality => {
            let (interval, constants) = constants_for(c, cfg)?;
            let grid = k_epsilon_grid(constants.lambda_lo, constants.lambda_hi, constants.epsilon);
            let ns = if cfg.n_list.is_empty() { vec![256, 1024] } else { cfg.n_list.clone() };
            let blocks = cfg.samples.unwrap_or(10_000);
            let mut rows = Vec::new();
            for (i, &n) in ns.iter().enumerate() {
                let s = typicality_sweep(c, n, constants.epsilon, &grid, blocks, derive_seed(cfg.seed, i as u64))?;
                if !s.holds {
                    violations.push(format!("n = {n}: n * frequency = {} exceeds C = {}", n as f64 * s.frequency, s.constant));
                }
                rows.push(s);
            }
            let outputs = TiltOutputs {
                interval: Some(interval),
                constants: Some(constants),
                rows: rows.clone(),
            };
            ctx.report(outputs, &rows, violations)
        }
        TiltVerb::Ball => {
            let (interval, constants) = constants_for(c, cfg)?;
            let ns = if cfg.n_list.is_empty() { vec![64, 256, 1024] } else { cfg.n_list.clone() };
            let radius = mutual_information_nats(channel) + cfg.radius_offset.unwrap_or(0.01);
            let mut rows = Vec::new();
            for (i, &n) in ns.iter().enumerate() {
                let y_block = sample_y_block(c, n, derive_seed(cfg.seed, i as u64));
                let r = ball_probability_bound_check(c, &y_block, &constants, radius, cfg.tolerances.lambda_solver)?;
                if !r.holds {
                    violations.push(format!("n = {n}: ln P(B) = {} exceeds the bound {}", r.ln_exact, r.ln_bound));
                }
                rows.push(r);
            }
            let outputs = TiltOutputs {
                interval: Some(interval),
                constants: Some(constants),
                rows: rows.clone(),
            };
            ctx.report(outputs, &rows, violations)
        }
    }
}

/// Divergence invariants, the one-shot bound and the CDF identity for one
/// configured channel.
fn channel_checks(name: &str, channel: &Channel, config: &ExperimentConfig) -> CliResult<CriterionOutcome> {
    let (rows, mut failures) = divergence_rows(channel, config)?;
    let worst = rows.iter().map(|r| r.identity_residual).fold(0.0, f64::max);
    let mut parts = vec![format!("max identity residual {worst:.3e} bits")];
    if let Channel::Discrete(c) = channel {
        let h = conditional_index_entropy(c, INDEX_SEEDS, config.seed, config.tolerances.max_proposals)?;
        let e = expected_conditional_dcs(c);
        parts.push(format!("H = {:.4} +- {:.4} vs E D_CS = {e:.4}", h.value, h.stderr));
        if !index_entropy_within_bounds(h.value, h.stderr, e, &config.tolerances) {
            failures.push("index entropy outside the bound corridor".into());
        }
        let mut worst = 0.0f64;
        let grid: Vec<f64> = (0..100).map(|i| -4.0 + 8.0 * i as f64 / 99.0).collect();
        for n in 1..=CHECK_CDF_MAX_N {
            let y_block = sample_y_block(c, n, derive_seed(config.seed, n as u64));
            worst = worst.max(verify_cdf_identity(c, &y_block, &grid)?);
        }
        parts.push(format!("CDF discrepancy {worst:.3e}"));
        if worst >= CDF_TOLERANCE {
            failures.push(format!("CDF identity discrepancy {worst:.3e}"));
        }
        parts.push(format!("y-symmetric: {}", is_y_symmetric(c)));
    }
    let passed = failures.is_empty();
    if !passed {
        parts.extend(failures);
    }
    Ok(CriterionOutcome {
        id: format!("channel:{name}"),
        name: "per-channel invariants".into(),
        passed,
        detail: parts.join("; "),
    })
}

fn verify_all(ctx: &Context<'_>) -> CliResult<Report> {
    let cfg = ctx.config;
    let mut channels: Vec<(String, Channel)> = Vec::new();
    for p in cfg.channel_path.iter().chain(&cfg.channel_paths) {
        let name = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        channels.push((name, load_channel(p)?.1));
    }
    if channels.is_empty() {
        channels = fixtures::all().into_iter().map(|(n, c)| (n.to_string(), c)).collect();
    }
    let criteria = acceptance::run_all(cfg.seed);
    let channel_outcomes = channels
        .iter()
        .map(|(n, c)| channel_checks(n, c, cfg))
        .collect::<CliResult<Vec<_>>>()?;
    let mut all: Vec<CriterionOutcome> = criteria.clone();
    all.extend(channel_outcomes.iter().cloned());
    let violations = all.iter().filter(|o| !o.passed).map(|o| o.to_string()).collect();
    let outputs = VerifyOutputs {
        seed: cfg.seed,
        all_passed: all.iter().all(|o| o.passed),
        criteria,
        channels: channel_outcomes,
    };
    ctx.report(outputs, &all, violations)
}
