//! Argument definitions for the `syndse` binary.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use syndse_core::FormulaKind;

use crate::report::OutputFormat;

#[derive(Debug, Parser)]
#[command(
    name = "syndse",
    version,
    about = "Dual system estimation with synthetic allocation: estimation, \
             allocation under four formulas, comparison metrics, homogeneity \
             tests, two-state variance analysis, and Monte Carlo simulation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-stratum dual system estimates with both coverage factors.
    Estimate(EstimateArgs),
    /// Distribute stratum estimates to regions under one or all formulas.
    Allocate(AllocateArgs),
    /// State-level share comparison with confidence intervals
    /// (plot-ready layout).
    Compare(CompareArgs),
    /// Relative and state-adjusted differences per county group.
    Sad(SadArgs),
    /// Mean per-stratum imputation rate for each state.
    Mir(MirArgs),
    /// Chi-square test of imputation homogeneity within post-strata.
    Homogeneity(HomogeneityArgs),
    /// Two-state squared-error comparison of the coverage factors.
    Variance(VarianceArgs),
    /// Seeded Monte Carlo evaluation of all four formulas against known
    /// truth.
    Simulate(SimulateArgs),
    /// Validate fixture files and cross-file referential integrity.
    Validate(ValidateArgs),
}

/// Formula selector, with `all` expanding to the full set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormulaArg {
    Cb,
    Alt1,
    Alt2,
    Alt3,
    All,
}

impl FormulaArg {
    pub fn expand(self) -> Vec<FormulaKind> {
        match self {
            FormulaArg::Cb => vec![FormulaKind::CensusBureau],
            FormulaArg::Alt1 => vec![FormulaKind::Alt1],
            FormulaArg::Alt2 => vec![FormulaKind::Alt2],
            FormulaArg::Alt3 => vec![FormulaKind::Alt3],
            FormulaArg::All => FormulaKind::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Write the report here instead of stdout. Relative paths resolve
    /// against $SYNDSE_OUT_DIR when set.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Report format.
    #[arg(long, value_enum, default_value = "csv")]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Census cells (`stratum,region,C,DD,II`).
    #[arg(long)]
    pub cells: PathBuf,
    /// Survey inputs (`stratum,CE,EE,MR`).
    #[arg(long)]
    pub strata: PathBuf,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct AllocateArgs {
    #[arg(long)]
    pub cells: PathBuf,
    #[arg(long)]
    pub strata: PathBuf,
    /// Allocation formula.
    #[arg(long, value_enum, default_value = "all")]
    pub formula: FormulaArg,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub cells: PathBuf,
    #[arg(long)]
    pub strata: PathBuf,
    /// Region-to-state map (`region,state[,group]`).
    #[arg(long)]
    pub geo: PathBuf,
    /// Share-difference standard errors (`state,se_share_diff`).
    #[arg(long)]
    pub se: PathBuf,
    /// Confidence multiplier for the interval around the census-formula
    /// share difference.
    #[arg(long, default_value_t = syndse_core::metrics::DEFAULT_Z)]
    pub z: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SadArgs {
    /// Published county-group table (reldif per formula plus counts);
    /// requires --state-rates.
    #[arg(long, requires = "state_rates", conflicts_with_all = ["cells", "strata", "geo"])]
    pub published: Option<PathBuf>,
    /// State imputation rates as percent of census count.
    #[arg(long)]
    pub state_rates: Option<PathBuf>,
    /// Census cells for the computed pipeline.
    #[arg(long, requires_all = ["strata", "geo"])]
    pub cells: Option<PathBuf>,
    #[arg(long)]
    pub strata: Option<PathBuf>,
    /// Geography with a `group` column.
    #[arg(long)]
    pub geo: Option<PathBuf>,
    /// Also write a per-formula distribution summary here.
    #[arg(long)]
    pub summary_out: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct MirArgs {
    #[arg(long)]
    pub cells: PathBuf,
    #[arg(long)]
    pub geo: PathBuf,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct HomogeneityArgs {
    #[arg(long)]
    pub cells: PathBuf,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct VarianceArgs {
    /// Scenario table (`ce1..ii2[,lambda]`).
    #[arg(long)]
    pub scenarios: PathBuf,
    /// Correct-enumeration total separating small from large
    /// post-strata in the frequency table.
    #[arg(long, default_value_t = 50_000)]
    pub threshold: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Simulation config (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Worker threads; the report is identical for any value.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Report format (JSON carries the full report).
    #[arg(long, value_enum, default_value = "json")]
    pub format: OutputFormat,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub cells: PathBuf,
    #[arg(long)]
    pub strata: Option<PathBuf>,
    #[arg(long)]
    pub geo: Option<PathBuf>,
    #[arg(long)]
    pub se: Option<PathBuf>,
}
