use thiserror::Error;

/// Errors reported by the simulation and analysis layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Site dimension outside the supported range.
    #[error("site dimension must be in 2..=5, got {0}")]
    UnsupportedDimension(usize),

    /// Composite system too large for the dense representation.
    #[error("composite of {sites} sites at dimension {dim} exceeds the dense-vector cap of 6 sites")]
    TooManySites { dim: usize, sites: usize },

    /// Amplitude vector length does not match `d^n`.
    #[error("amplitude vector has length {got}, expected {expected}")]
    AmplitudeLength { expected: usize, got: usize },

    /// State vector has (near) zero norm and cannot be normalized.
    #[error("state vector norm is zero")]
    ZeroNorm,

    /// Tensor factors or preparations disagree on the site dimension.
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    /// A site pairing does not cover the state's sites disjointly.
    #[error("invalid site pairing: {0}")]
    InvalidPairing(String),

    /// A scalar parameter is outside its admissible range.
    #[error("parameter {name} = {value} outside {range}")]
    ParameterRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    /// A probability table fails normalization or positivity.
    #[error("invalid probability table: {0}")]
    InvalidTable(String),

    /// An attack configuration is missing a required probe preparation.
    #[error("attack config missing probe: {0}")]
    MissingProbe(&'static str),

    /// Division by a zero normalizer when estimating probabilities.
    #[error("zero normalizer in probability estimation")]
    ZeroNormalizer,
}

pub type Result<T> = std::result::Result<T, Error>;
