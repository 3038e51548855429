//! Dual system estimation with synthetic allocation.
//!
//! The toolkit covers four ways of distributing a post-stratum's dual
//! system estimate to the regions inside it (the census proportional
//! formula and three alternatives keyed to data-defined and imputed
//! counts), the statistics used to compare them (shares with confidence
//! intervals, mean imputation rates, relative and state-adjusted
//! differences), an exact and a chi-square test of the imputation
//! homogeneity assumption behind them, a two-state squared-error lab for
//! the coverage-factor choice, and a seeded Monte Carlo simulator that
//! measures all four formulas against known truth.
//!
//! File formats and the command-line surface live in the companion CLI
//! crate; everything here is pure, deterministic computation over the
//! domain types re-exported at the crate root.

#![forbid(unsafe_code)]

pub mod error;
pub mod estimator;
pub mod homogeneity;
pub mod metrics;
pub mod model;
pub mod sim;
pub mod variance;

pub use error::{DseError, Result};
pub use model::{
    validate_cells, AllocationTable, CellCounts, CellViolation, FormulaKind, GeoHierarchy,
    GeoLevel, StratumEstimate, StratumSurveyInputs, TwoStateScenario,
};
pub use sim::{CountParam, RateParam, SimConfig, TruthSpec};
