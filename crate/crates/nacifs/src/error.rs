//! Crate-wide error type.
//!
//! Variants mirror the failure modes of the public operations; the CLI maps
//! them onto process exit codes (config 2, validation 3, estimation 4).

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed configuration: JSON schema violations, unknown keys, bad
    /// flag values, inconsistent domain constants.
    #[error("config error: {0}")]
    Config(String),

    /// A generation failed the bounded-contraction / separation / containment
    /// checks, or a map violates its kind's validity constraint.
    #[error("validation failed at generation {generation}: {detail}")]
    ValidationFailed { generation: usize, detail: String },

    /// A word references a branch index outside the generation's alphabet.
    #[error("invalid word: {0}")]
    InvalidWord(String),

    /// A generation index at or beyond the system's materialization horizon.
    #[error("generation {requested} beyond horizon {horizon}")]
    HorizonExceeded { requested: usize, horizon: usize },

    /// Explicit system asked for a generation beyond its stored prefix.
    #[error("generation {requested} beyond explicit prefix of length {available}")]
    InsufficientDepth { requested: usize, available: usize },

    /// Seeded generation rejected too many times in a row.
    #[error("seeded generation {generation} rejected {attempts} times")]
    SeededRejection { generation: usize, attempts: u32 },

    /// Two systems cannot be compared: mismatched alphabets, domains, or
    /// image enclosures that fail the matched-intersection certificate.
    #[error("incompatible systems: {0}")]
    IncompatibleSystems(String),

    /// A functional was queried outside its offset/depth range.
    #[error("functional query out of range: {0}")]
    OutOfRange(String),

    /// A functional value that must be positive (or finite) is not.
    #[error("non-positive functional value: {0}")]
    NonPositive(String),

    /// A walker exceeded its step budget; the whole run is invalid.
    #[error("walker {walker} stalled after {steps} steps")]
    WalkerStalled { walker: u64, steps: u64 },

    /// A factorized-estimator denominator fell below the configured floor.
    #[error("degenerate factor at offset {offset}: {hits} denominator hits < floor {floor}")]
    DegenerateFactor { offset: usize, hits: u64, floor: u64 },

    /// A functional passed where a probability measure is required does not
    /// normalize.
    #[error("not a probability measure: {0}")]
    NonMeasure(String),

    /// Perturbation could not be validated even after the shrink schedule.
    #[error("perturbation infeasible: {0}")]
    PerturbationInfeasible(String),

    /// Underlying I/O failure.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed CSV/JSON payload on import or export.
    #[error("format error: {0}")]
    Format(String),
}

impl Error {
    /// Process exit code the CLI assigns to this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Format(_) => 2,
            Error::ValidationFailed { .. }
            | Error::InvalidWord(_)
            | Error::HorizonExceeded { .. }
            | Error::InsufficientDepth { .. }
            | Error::SeededRejection { .. }
            | Error::IncompatibleSystems(_) => 3,
            Error::OutOfRange(_)
            | Error::NonPositive(_)
            | Error::WalkerStalled { .. }
            | Error::DegenerateFactor { .. }
            | Error::NonMeasure(_)
            | Error::PerturbationInfeasible(_) => 4,
            Error::Io(_) => 4,
        }
    }

    /// Short machine-readable tag used in the CLI's JSON error envelope.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::ValidationFailed { .. } => "validation_failed",
            Error::InvalidWord(_) => "invalid_word",
            Error::HorizonExceeded { .. } => "horizon_exceeded",
            Error::InsufficientDepth { .. } => "insufficient_depth",
            Error::SeededRejection { .. } => "seeded_rejection",
            Error::IncompatibleSystems(_) => "incompatible_systems",
            Error::OutOfRange(_) => "out_of_range",
            Error::NonPositive(_) => "non_positive",
            Error::WalkerStalled { .. } => "walker_stalled",
            Error::DegenerateFactor { .. } => "degenerate_factor",
            Error::NonMeasure(_) => "non_measure",
            Error::PerturbationInfeasible(_) => "perturbation_infeasible",
            Error::Io(_) => "io",
            Error::Format(_) => "format",
        }
    }
}
