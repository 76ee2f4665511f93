//! Crate-wide error type.

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate record for entity `{entity}`, period {period}, variable `{variable}`")]
    DuplicateRecord {
        entity: String,
        period: i32,
        variable: String,
    },

    #[error("non-finite value {value} for entity `{entity}`, period {period}, variable `{variable}`")]
    NonFiniteValue {
        entity: String,
        period: i32,
        variable: String,
        value: f64,
    },

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("unknown entity `{0}`")]
    UnknownEntity(String),

    #[error("unknown period {0}")]
    UnknownPeriod(i32),

    #[error("cell ({entity}, {period}) of variable `{variable}` is absent")]
    AbsentCell {
        entity: String,
        period: i32,
        variable: String,
    },

    #[error("log transform of non-positive value {value} for entity `{entity}`, period {period}, variable `{variable}`")]
    LogDomain {
        entity: String,
        period: i32,
        variable: String,
        value: f64,
    },

    #[error("variable `{variable}` has no strictly positive value to derive a floor from")]
    NoPositiveFloor { variable: String },

    #[error("entity `{entity}` has no label under grouping scheme `{scheme}`")]
    MissingGroupLabel { entity: String, scheme: String },

    #[error("unknown grouping scheme `{0}`")]
    UnknownScheme(String),

    #[error("linear program is malformed: {0}")]
    MalformedLp(String),

    #[error("DMU dimensions do not match the reference set: {0}")]
    DimensionMismatch(String),

    #[error("bundle ({entity}, {period}) has a non-positive or non-finite component")]
    NonPositiveBundle { entity: String, period: i32 },

    #[error("reference set is empty")]
    EmptyReference,

    #[error("DMU `{entity}` period {period} is not efficient; super-efficiency model rejected")]
    NotEfficient { entity: String, period: i32 },

    #[error("DMU `{entity}` period {period} must be a member of the reference set")]
    NotAMember { entity: String, period: i32 },

    #[error("distance of `{entity}` period {period} evaluated to a non-positive value")]
    DegenerateDistance { entity: String, period: i32 },

    #[error("regressor matrix is rank deficient; collinear columns: {}", columns.join(", "))]
    RankDeficient { columns: Vec<String> },

    #[error("fixed effects are unidentified: need at least two entities with two or more observations, found {usable}")]
    TooFewEntities { usable: usize },

    #[error("fitted scale is non-positive for {} cell(s), first: ({entity}, {period})", count)]
    NonPositiveScale {
        count: usize,
        entity: String,
        period: i32,
    },

    #[error("quantile {0} is outside (0, 1)")]
    BadQuantile(f64),

    #[error("bootstrap produced too few successful replicates ({got}/{want})")]
    BootstrapFailed { got: usize, want: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("stage `{stage}` failed: {message}")]
    Stage { stage: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
