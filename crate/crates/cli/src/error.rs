use crate::config::ConfigError;
use cpm_schwarz::band::BandError;
use cpm_schwarz::curve::CurveError;
use cpm_schwarz::experiment::ExperimentError;
use cpm_schwarz::schwarz::SchwarzError;
use cpm_schwarz::sparsela::SparseError;
use cpm_schwarz::theory::TheoryError;
use thiserror::Error;

pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Run(#[from] ExperimentError),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

macro_rules! from_core {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Run(e.into())
            }
        }
    )*};
}
from_core!(CurveError, BandError, SchwarzError, TheoryError);

impl From<SparseError> for CliError {
    fn from(e: SparseError) -> Self {
        CliError::Run(SchwarzError::from(e).into())
    }
}

impl CliError {
    /// 2 for bad input, 3 for numerical failures, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_USAGE,
            CliError::Io(_) | CliError::Csv(_) => EXIT_IO,
            CliError::Run(e) => run_code(e),
        }
    }
}

fn curve_code(e: &CurveError) -> i32 {
    match e {
        CurveError::NonUniqueClosestPoint { .. } | CurveError::DimensionMismatch { .. } => EXIT_NUMERICAL,
        _ => EXIT_USAGE,
    }
}

fn run_code(e: &ExperimentError) -> i32 {
    match e {
        ExperimentError::UnknownForcing(_) => EXIT_USAGE,
        ExperimentError::Curve(e) => curve_code(e),
        ExperimentError::Band(e) => match e {
            BandError::InvalidParameters(_) | BandError::TubeTooWide { .. } | BandError::EmptyBand => EXIT_USAGE,
            BandError::Curve(e) => curve_code(e),
            _ => EXIT_NUMERICAL,
        },
        ExperimentError::Schwarz(e) => match e {
            SchwarzError::InvalidOverlap { .. }
            | SchwarzError::InvalidSplit(_)
            | SchwarzError::EmptySubdomain(_)
            | SchwarzError::OverlapTooNarrow { .. }
            | SchwarzError::UnknownInterface(_) => EXIT_USAGE,
            _ => EXIT_NUMERICAL,
        },
        ExperimentError::Theory(e) => match e {
            TheoryError::Sparse(_) => EXIT_NUMERICAL,
            _ => EXIT_USAGE,
        },
    }
}
