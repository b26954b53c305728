//! Serialised result records.

use csdlab_core::acceptance::CriterionOutcome;
use csdlab_core::channel::ChannelSpec;
use csdlab_core::tilting::{OperatingInterval, RegularityConstants};
use serde::Serialize;

use crate::config::ExperimentConfig;

pub const SCHEMA_VERSION: u32 = 1;
pub const LIBRARY_VERSION: &str = env!("CARGO_PKG_VERSION");

/// The JSON envelope around every experiment's outputs.
#[derive(Debug, Serialize)]
pub struct ExperimentRecord<T: Serialize> {
    pub schema_version: u32,
    pub experiment: &'static str,
    pub library_version: &'static str,
    pub inputs: Inputs,
    pub outputs: T,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_seconds: Option<f64>,
}

/// Everything needed to rerun a record.
#[derive(Debug, Clone, Serialize)]
pub struct Inputs {
    pub config: ExperimentConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verb: Option<&'static str>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DivergenceRow {
    /// Output symbol index, or the output value for a Gaussian channel.
    pub y: f64,
    /// `P_Y(y)`; empty for a Gaussian channel.
    pub p_y: Option<f64>,
    pub d_cs: f64,
    pub d_kl_direct: f64,
    pub d_kl_integral: f64,
    pub gap: f64,
    pub log_width_entropy: f64,
    pub identity_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DivergenceOutputs {
    pub rows: Vec<DivergenceRow>,
    /// `E_Y[D_CS]` in bits, discrete channels only.
    pub expected_dcs: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RedundancyRow {
    pub n: usize,
    pub expected_dcs_bits: f64,
    pub block_mi_bits: f64,
    pub gap_bits: f64,
    pub gap_over_lbn: Option<f64>,
    pub stderr_bits: f64,
    pub mode: &'static str,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateOutputs {
    pub channel: ChannelSpec,
    pub num_seeds: usize,
    #[serde(rename = "H_index_bits")]
    pub h_index_bits: f64,
    pub stderr: f64,
    #[serde(rename = "E_dcs_bits")]
    pub e_dcs_bits: f64,
    pub bound_satisfied: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CumulantRow {
    pub lambda: f64,
    pub y: usize,
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

/// One dominance or moment-bound check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub check: &'static str,
    pub y: usize,
    pub k: Option<i32>,
    pub lambda1: f64,
    pub lambda2: f64,
    pub holds: bool,
    pub worst_margin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TiltOutputs<R: Serialize> {
    pub interval: Option<OperatingInterval>,
    pub constants: Option<RegularityConstants>,
    pub rows: Vec<R>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyOutputs {
    pub seed: u64,
    pub criteria: Vec<CriterionOutcome>,
    pub channels: Vec<CriterionOutcome>,
    pub all_passed: bool,
}
