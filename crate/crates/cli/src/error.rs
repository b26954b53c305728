use std::process::ExitCode;

use thiserror::Error;

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_PARSE: u8 = 3;
pub const EXIT_BOUND: u8 = 4;
pub const EXIT_BUDGET: u8 = 5;
pub const EXIT_NUMERIC: u8 = 6;
pub const EXIT_IO: u8 = 7;

pub const EXIT_CODE_HELP: &str = "\
Exit codes:
  0  success, every asserted bound and invariant held
  2  configuration error (bad field, missing value, bad CSDLAB_THREADS)
  3  channel file could not be read as a valid channel spec
  4  an asserted bound or invariant was violated (records are still written)
  5  the sampler's proposal budget was exhausted
  6  the computation was rejected (singular or asymmetric channel, block cap, radius range)
  7  output could not be written";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("channel parse error: {0}")]
    ChannelParse(String),

    #[error(transparent)]
    Library(#[from] csdlab_core::Error),

    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use csdlab_core::Error as E;
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::ChannelParse(_) => EXIT_PARSE,
            CliError::Io(_) => EXIT_IO,
            CliError::Library(e) => match e {
                E::InvalidArgument(_) | E::InvalidEpsilon { .. } => EXIT_CONFIG,
                E::InvalidChannel(_) => EXIT_PARSE,
                E::ProposalBudgetExceeded { .. } => EXIT_BUDGET,
                _ => EXIT_NUMERIC,
            },
        }
    }
}

impl From<CliError> for ExitCode {
    fn from(e: CliError) -> Self {
        ExitCode::from(e.exit_code())
    }
}

pub type CliResult<T> = Result<T, CliError>;
