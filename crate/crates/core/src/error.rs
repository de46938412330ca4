use thiserror::Error;

use crate::circuit::FitReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid {what}: {reason}")]
    Validation { what: &'static str, reason: String },

    #[error("element index {index} out of range for {len} elements")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("sample spacing {spacing} m exceeds half a wavelength ({limit} m); the visible spectrum would alias")]
    Aliasing { spacing: f64, limit: f64 },

    #[error("samples do not lie on a uniform grid: {0}")]
    NonUniformGrid(String),

    #[error("directivity is undefined for an all-zero pattern")]
    UndefinedDirectivity,

    #[error("main lobe spans only {samples} samples along {axis}; refine the uv grid")]
    UndersampledLobe { axis: char, samples: usize },

    #[error("reflection coefficient equals 1: impedance is infinite (open circuit)")]
    InfiniteImpedance,

    #[error("normalized impedance equals -1: reflection coefficient is infinite")]
    InfiniteReflection,

    #[error("resonance not bracketed: maximum of Re(z) sits at the spectrum edge")]
    ResonanceNotBracketed,

    #[error("fit did not converge within {iterations} iterations")]
    FitNotConverged { iterations: usize, best: Box<FitReport> },

    #[error("drive voltage {0} V matches no configured state")]
    UnknownVoltage(f64),

    #[error("{blocks} blocks exceed the 128-address space")]
    AddressSpaceOverflow { blocks: usize },

    #[error("link gain G_RIS is missing and cannot be computed")]
    MissingGain,

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn validation(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Validation { what, reason: reason.into() }
    }

    pub(crate) fn parse(line: usize, reason: impl Into<String>) -> Self {
        Error::Parse { line, reason: reason.into() }
    }
}
