use std::fs;
use std::path::{Path, PathBuf};

use csdlab_core::channel::{Channel, ChannelSpec};
use csdlab_core::tilting::DEFAULT_GRID_RESOLUTION;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Divergence,
    RedundancySweep,
    Simulate,
    TiltLab,
    VerifyAll,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Divergence => "divergence",
            Experiment::RedundancySweep => "redundancy-sweep",
            Experiment::Simulate => "simulate",
            Experiment::TiltLab => "tilt-lab",
            Experiment::VerifyAll => "verify-all",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    #[default]
    Exact,
    MonteCarlo,
}

/// Numerical tolerances; every default is the library's stated value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub identity_discrete: f64,
    pub identity_gaussian: f64,
    pub ordering: f64,
    pub gap_floor: f64,
    pub quadrature: f64,
    pub lambda_solver: f64,
    pub level_cap: usize,
    pub max_proposals: u64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            identity_discrete: 1e-9,
            identity_gaussian: 1e-5,
            ordering: 1e-9,
            gap_floor: 1e-6,
            quadrature: 1e-10,
            lambda_solver: csdlab_core::tilting::DEFAULT_LAMBDA_TOL,
            level_cap: csdlab_core::blocks::DEFAULT_LEVEL_CAP,
            max_proposals: csdlab_core::sampler::DEFAULT_MAX_PROPOSALS,
        }
    }
}

/// One experiment, as read from a JSON config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Relative paths are resolved against the config file's directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel_path: Option<PathBuf>,
    /// Extra channels for `verify-all`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub channel_paths: Vec<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Experiment>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub n_list: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default)]
    pub mode: SweepMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default = "default_resolution")]
    pub lambda_grid_resolution: f64,
    /// Tilt parameters for `tilt-lab cumulant`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lambda: Vec<f64>,
    /// Output values at which a Gaussian channel is evaluated.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub y_values: Vec<f64>,
    /// `tilt-lab ball` uses the radius `I + radius_offset` nats.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius_offset: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
    #[serde(default)]
    pub output_format: OutputFormat,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Adds `wall_clock_seconds` to JSON records; off by default so that
    /// reruns are byte-identical.
    #[serde(default)]
    pub record_wall_clock: bool,
}

fn default_resolution() -> f64 {
    DEFAULT_GRID_RESOLUTION
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            channel_path: None,
            channel_paths: Vec::new(),
            experiment: None,
            seed: 0,
            n_list: Vec::new(),
            samples: None,
            mode: SweepMode::Exact,
            epsilon: None,
            lambda_grid_resolution: DEFAULT_GRID_RESOLUTION,
            lambda: Vec::new(),
            y_values: Vec::new(),
            radius_offset: None,
            output_path: None,
            output_format: OutputFormat::Json,
            tolerances: Tolerances::default(),
            record_wall_clock: false,
        }
    }
}

impl ExperimentConfig {
    /// Reads a config file and resolves its channel paths.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: Self =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let resolve = |p: &PathBuf| if p.is_absolute() { p.clone() } else { base.join(p) };
        cfg.channel_path = cfg.channel_path.as_ref().map(resolve);
        cfg.channel_paths = cfg.channel_paths.iter().map(resolve).collect();
        Ok(cfg)
    }

    /// Field checks shared by all experiments, plus those of `experiment`.
    pub fn validate(&self, experiment: Experiment) -> CliResult<()> {
        if let Some(e) = self.experiment {
            if e != experiment {
                return Err(CliError::Config(format!(
                    "config is for `{}` but `{}` was requested",
                    e.name(),
                    experiment.name()
                )));
            }
        }
        if self.samples == Some(0) {
            return Err(CliError::Config("samples must be at least 1".into()));
        }
        if let Some(eps) = self.epsilon {
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(CliError::Config(format!("epsilon must be positive, got {eps}")));
            }
        }
        if !(self.lambda_grid_resolution > 0.0 && self.lambda_grid_resolution < 0.5) {
            return Err(CliError::Config(format!(
                "lambda_grid_resolution must lie in (0, 0.5), got {}",
                self.lambda_grid_resolution
            )));
        }
        if self.n_list.contains(&0) {
            return Err(CliError::Config("n_list entries must be positive".into()));
        }
        let needs_channel = experiment != Experiment::VerifyAll;
        if needs_channel && self.channel_path.is_none() {
            return Err(CliError::Config("channel_path is required".into()));
        }
        if experiment == Experiment::RedundancySweep {
            if self.n_list.is_empty() {
                return Err(CliError::Config("redundancy-sweep needs a non-empty n_list".into()));
            }
            if self.n_list.windows(2).any(|w| w[0] >= w[1]) {
                return Err(CliError::Config("n_list must be strictly increasing".into()));
            }
            if self.mode == SweepMode::MonteCarlo && self.samples.is_none() {
                return Err(CliError::Config("monte_carlo mode needs samples".into()));
            }
        }
        if experiment == Experiment::Simulate {
            match self.samples {
                None => return Err(CliError::Config("simulate needs samples (the number of seeds)".into())),
                Some(s) if s < 100 => {
                    return Err(CliError::Config(format!("simulate needs at least 100 seeds, got {s}")))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Reads and builds a channel spec file.
pub fn load_channel(path: &Path) -> CliResult<(ChannelSpec, Channel)> {
    let text = fs::read_to_string(path).map_err(|e| CliError::ChannelParse(format!("{}: {e}", path.display())))?;
    let spec: ChannelSpec =
        serde_json::from_str(&text).map_err(|e| CliError::ChannelParse(format!("{}: {e}", path.display())))?;
    let channel = spec
        .build()
        .map_err(|e| CliError::ChannelParse(format!("{}: {e}", path.display())))?;
    Ok((spec, channel))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_fields_are_rejected() {
        let r: Result<ExperimentConfig, _> = serde_json::from_str(r#"{"seed": 1, "sed": 2}"#);
        assert!(r.is_err());
    }

    #[test]
    fn defaults_fill_in() {
        let c: ExperimentConfig = serde_json::from_str(r#"{"channel_path": "a.json"}"#).unwrap();
        assert_eq!(c.lambda_grid_resolution, DEFAULT_GRID_RESOLUTION);
        assert_eq!(c.tolerances, Tolerances::default());
        assert_eq!(c.output_format, OutputFormat::Json);
    }

    #[test]
    fn zero_samples_is_a_config_error() {
        let c = ExperimentConfig {
            channel_path: Some("a.json".into()),
            samples: Some(0),
            ..Default::default()
        };
        assert!(matches!(c.validate(Experiment::Simulate), Err(CliError::Config(_))));
    }

    #[test]
    fn experiment_mismatch() {
        let c = ExperimentConfig {
            channel_path: Some("a.json".into()),
            experiment: Some(Experiment::Simulate),
            samples: Some(200),
            ..Default::default()
        };
        assert!(c.validate(Experiment::Simulate).is_ok());
        assert!(c.validate(Experiment::Divergence).is_err());
    }

    #[test]
    fn sweep_needs_increasing_n() {
        let c = ExperimentConfig {
            channel_path: Some("a.json".into()),
            n_list: vec![4, 4],
            ..Default::default()
        };
        assert!(c.validate(Experiment::RedundancySweep).is_err());
    }
}
