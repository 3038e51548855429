use thiserror::Error;

/// Errors produced by estimation, metrics, testing, and simulation routines.
#[derive(Debug, Error)]
pub enum DseError {
    #[error("stratum `{stratum}`: CE + EE = 0, correct-enumeration rate is undefined")]
    UndefinedRate { stratum: String },

    #[error("stratum `{stratum}`: match rate must lie in (0, 1], got {mr}")]
    InvalidMatchRate { stratum: String, mr: f64 },

    #[error("stratum `{stratum}`: {what} must lie in [0, 1], got {value}")]
    InvalidRate {
        stratum: String,
        what: &'static str,
        value: f64,
    },

    #[error("stratum `{stratum}` is degenerate: C = {c}, DD = {dd}")]
    DegenerateStratum { stratum: String, c: u64, dd: u64 },

    #[error("cells span more than one stratum: expected `{expected}`, found `{found}`")]
    MixedStrata { expected: String, found: String },

    #[error("no {0} provided")]
    EmptyInput(&'static str),

    #[error("missing survey inputs for strata: {}", .0.join(", "))]
    MissingSurveyInputs(Vec<String>),

    #[error("regions not mapped at {level} level: {}", regions.join(", "))]
    UnmappedRegions { level: String, regions: Vec<String> },

    #[error("{what} must be positive, got {value}")]
    NonPositive { what: &'static str, value: f64 },

    #[error("standard error must be nonnegative, got {0}")]
    NegativeSe(f64),

    #[error("no strata with nonzero census count; mean imputation rate is undefined")]
    UndefinedMeanImputationRate,

    #[error("degrees of freedom must be at least 1")]
    InvalidDf,

    #[error("chi-square statistic must be nonnegative, got {0}")]
    NegativeStatistic(f64),

    #[error("scenario: {0} must be positive")]
    ZeroScenarioCount(&'static str),

    #[error("scenario: counts must not exceed 2^40 (exact sign arithmetic bound)")]
    ScenarioCountTooLarge,

    #[error(
        "scenario: per-state true dual system values differ; \
         the closed-form comparison assumes they coincide"
    )]
    UnequalTrueDse,

    #[error(
        "closed-form and definitional squared-error differences disagree: {closed} vs {direct}"
    )]
    AlgebraMismatch { closed: f64, direct: f64 },

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),

    #[error("outcome space too large to enumerate: ~{estimate:.3e} outcomes (limit {limit:.1e})")]
    OutcomeSpaceTooLarge { estimate: f64, limit: f64 },
}

pub type Result<T> = std::result::Result<T, DseError>;
