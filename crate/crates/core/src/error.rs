use thiserror::Error;

/// Errors shared by every module in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("probabilities sum to {sum}, which differs from 1 by more than {tolerance}")]
    SumNotOne { sum: f64, tolerance: f64 },

    #[error("{what} = {value} is outside {bounds}")]
    OutOfRange {
        what: &'static str,
        value: f64,
        bounds: &'static str,
    },

    #[error("need at least 2 categories, got {found}")]
    TooFewCategories { found: usize },

    #[error("category index {index} is outside 1..={categories}")]
    IndexOutOfRange { index: usize, categories: usize },

    #[error("invalid count vector: {reason}")]
    InvalidCounts { reason: String },

    #[error("count {count} is outside 0..={max}")]
    CountOutOfRange { count: u64, max: u64 },

    #[error("composition table would hold {size} entries, above the cap of {cap}")]
    TableTooLarge { size: u128, cap: u128 },

    #[error("sequence entry {entry} at position {position} is outside 1..={categories}")]
    InvalidSequence {
        entry: usize,
        position: usize,
        categories: usize,
    },

    #[error("a length-{n} sequence over {categories} categories cannot be indexed in 128 bits")]
    SequenceTooLong { n: usize, categories: usize },

    #[error("uniform draw {u} is outside [0, 1)")]
    UOutOfRange { u: f64 },

    #[error("enumerating {categories}^{n} sequences exceeds the cap of {cap}")]
    EnumerationTooLarge {
        categories: usize,
        n: usize,
        cap: u128,
    },

    #[error("position {position} is outside 1..={n}")]
    BadPosition { position: usize, n: usize },

    #[error("positions ({first}, {second}) must satisfy 1 <= first < second")]
    BadPositions { first: usize, second: usize },

    #[error("variance entry {index} is {value}; correlation is undefined")]
    DegenerateVariance { index: usize, value: f64 },

    #[error("fewer than 2 cells remain after pooling")]
    DegenerateCells,

    #[error("result is not finite")]
    NonFinite,

    #[error("cannot parse {input:?} as a decimal number")]
    InvalidNumber { input: String },
}

impl Error {
    /// Stable machine-readable code for diagnostics and CLI error objects.
    pub fn code(&self) -> &'static str {
        match self {
            Error::SumNotOne { .. } => "SumNotOne",
            Error::OutOfRange { .. } => "OutOfRange",
            Error::TooFewCategories { .. } => "TooFewCategories",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::InvalidCounts { .. } => "InvalidCounts",
            Error::CountOutOfRange { .. } => "CountOutOfRange",
            Error::TableTooLarge { .. } => "TableTooLarge",
            Error::InvalidSequence { .. } => "InvalidSequence",
            Error::SequenceTooLong { .. } => "SequenceTooLong",
            Error::UOutOfRange { .. } => "UOutOfRange",
            Error::EnumerationTooLarge { .. } => "EnumerationTooLarge",
            Error::BadPosition { .. } => "BadPosition",
            Error::BadPositions { .. } => "BadPositions",
            Error::DegenerateVariance { .. } => "DegenerateVariance",
            Error::DegenerateCells => "DegenerateCells",
            Error::NonFinite => "NonFinite",
            Error::InvalidNumber { .. } => "InvalidNumber",
        }
    }

    /// True when the failure is a resource cap rather than bad input.
    pub fn is_resource_cap(&self) -> bool {
        matches!(
            self,
            Error::TableTooLarge { .. }
                | Error::EnumerationTooLarge { .. }
                | Error::SequenceTooLong { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
