//! Crate-wide error type.

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by study parsing, bound evaluation, testing, and matching.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A matched set contains no broad case.
    #[error("set {set_id} has no broad case")]
    MissingCase { set_id: u64 },

    /// A matched set contains more than one broad case.
    #[error("set {set_id} has {count} broad cases; exactly one is required")]
    MultipleCases { set_id: u64, count: usize },

    /// A referent is flagged as a narrow case.
    #[error("subject {subject_id} in set {set_id} is a referent flagged narrow_case = 1")]
    NarrowReferent { set_id: u64, subject_id: String },

    /// A 0/1 field holds a value outside {0, 1}.
    #[error("subject {subject_id} in set {set_id}: field {field} must be 0 or 1, got {value}")]
    BadBinary {
        set_id: u64,
        subject_id: String,
        field: &'static str,
        value: i64,
    },

    /// A matched set has fewer than two subjects.
    #[error("set {set_id} has {size} subject(s); a matched set needs a case and at least one referent")]
    SetTooSmall { set_id: u64, size: usize },

    /// A set id below the allowed minimum of 1.
    #[error("subject {subject_id} has set_id 0; set ids start at 1")]
    BadSetId { subject_id: String },

    /// Empty input where at least one row or set is required.
    #[error("input contains no rows")]
    EmptyInput,

    /// A study with no matched sets was passed to a test.
    #[error("study contains no matched sets")]
    EmptyStudy,

    /// Γ below 1.
    #[error("gamma must be >= 1, got {0}")]
    InvalidGamma(f64),

    /// Θ below 1.
    #[error("theta must be >= 1, got {0}")]
    InvalidTheta(f64),

    /// Exposure count outside [0, J].
    #[error("exposed count {m} outside [0, {j}]")]
    InvalidCount { m: u32, j: u32 },

    /// A probability-valued argument outside its valid range.
    #[error("{name} must lie in {range}, got {value}")]
    InvalidProbability {
        name: &'static str,
        range: &'static str,
        value: f64,
    },

    /// An invalid favorable-model or simulation parameter.
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// The narrow-case test is undefined when no matched set is narrow.
    #[error("study has no narrow case matched sets; the narrow test is undefined")]
    NoNarrowSets,

    /// The test already fails to reject at Γ = 1.
    #[error("test does not reject at gamma = 1 (p upper bound {p_upper} > alpha {alpha})")]
    NoRejectionAtOne { p_upper: f64, alpha: f64 },

    /// Root finding could not bracket a sign change.
    #[error("no root bracketed on [{lo}, {hi}]")]
    NotBracketed { lo: f64, hi: f64 },

    /// Requested power cannot be reached at this Γ (at or beyond design sensitivity).
    #[error("target power unattainable: gamma {gamma} is at or beyond the design sensitivity {design}")]
    Unattainable { gamma: f64, design: f64 },

    /// Matching input that cannot be used (duplicate ids, no covariates, ...).
    #[error("invalid matching input: {0}")]
    InvalidMatchInput(String),

    /// CSV-level failure (malformed row, type mismatch, missing column).
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    /// I/O failure reading or writing a file.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors describing malformed or unusable input data, as
    /// opposed to statistical preconditions that valid data may still fail.
    pub fn is_data_error(&self) -> bool {
        !matches!(
            self,
            Error::NoNarrowSets
                | Error::NoRejectionAtOne { .. }
                | Error::NotBracketed { .. }
                | Error::Unattainable { .. }
        )
    }
}
