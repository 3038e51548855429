//! Domain types shared across the toolkit.
//!
//! Counts are exact unsigned integers; every derived quantity (rates,
//! correction factors, estimates) is a double. Stratum and region
//! identifiers are opaque strings: post-strata are ingested as given
//! partitions, never derived from demographics.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{DseError, Result};

/// Census counts for one (post-stratum, region) cell.
///
/// `c` is the full census count, `dd` the data-defined count (records with
/// enough information to enter survey matching), `ii` the whole-person
/// imputation count (including late adds). Well-formed cells satisfy
/// `c == dd + ii`; [`validate_cells`] reports violations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellCounts {
    pub stratum_id: String,
    pub region_id: String,
    pub c: u64,
    pub dd: u64,
    pub ii: u64,
}

impl CellCounts {
    pub fn new(
        stratum_id: impl Into<String>,
        region_id: impl Into<String>,
        c: u64,
        dd: u64,
        ii: u64,
    ) -> Self {
        Self {
            stratum_id: stratum_id.into(),
            region_id: region_id.into(),
            c,
            dd,
            ii,
        }
    }

    pub fn is_consistent(&self) -> bool {
        self.c == self.dd + self.ii
    }
}

/// A single violation found in a cell set.
///
/// Negative counts cannot be represented here (counts are unsigned);
/// loaders reject them at parse time with a line number.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum CellViolation {
    CountMismatch {
        stratum_id: String,
        region_id: String,
        c: u64,
        dd: u64,
        ii: u64,
    },
    DuplicateKey {
        stratum_id: String,
        region_id: String,
    },
}

impl fmt::Display for CellViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellViolation::CountMismatch {
                stratum_id,
                region_id,
                c,
                dd,
                ii,
            } => write!(
                f,
                "cell ({stratum_id}, {region_id}): C != DD + II ({c} != {dd} + {ii})"
            ),
            CellViolation::DuplicateKey {
                stratum_id,
                region_id,
            } => write!(f, "duplicate cell key ({stratum_id}, {region_id})"),
        }
    }
}

/// Check a cell set for internal consistency.
///
/// Returns an empty list iff the data is well-formed. This is a reporting
/// operation; loaders decide whether to abort.
pub fn validate_cells(cells: &[CellCounts]) -> Vec<CellViolation> {
    let mut violations = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for cell in cells {
        if !cell.is_consistent() {
            violations.push(CellViolation::CountMismatch {
                stratum_id: cell.stratum_id.clone(),
                region_id: cell.region_id.clone(),
                c: cell.c,
                dd: cell.dd,
                ii: cell.ii,
            });
        }
        if !seen.insert((cell.stratum_id.clone(), cell.region_id.clone())) {
            violations.push(CellViolation::DuplicateKey {
                stratum_id: cell.stratum_id.clone(),
                region_id: cell.region_id.clone(),
            });
        }
    }
    violations
}

/// E-sample and P-sample quantities for one post-stratum.
///
/// The match rate is accepted as a direct input rather than computed; the
/// simulator, which needs a concrete mechanism, uses matched / (matched +
/// unmatched) over its generated survey population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumSurveyInputs {
    pub stratum_id: String,
    /// Correct enumerations in the E-sample.
    pub ce: u64,
    /// Erroneous enumerations in the E-sample.
    pub ee: u64,
    /// P-sample match rate, in (0, 1].
    pub mr: f64,
}

impl StratumSurveyInputs {
    pub fn new(stratum_id: impl Into<String>, ce: u64, ee: u64, mr: f64) -> Self {
        Self {
            stratum_id: stratum_id.into(),
            ce,
            ee,
            mr,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mr.is_nan() || self.mr <= 0.0 || self.mr > 1.0 {
            return Err(DseError::InvalidMatchRate {
                stratum: self.stratum_id.clone(),
                mr: self.mr,
            });
        }
        if self.ce + self.ee == 0 {
            return Err(DseError::UndefinedRate {
                stratum: self.stratum_id.clone(),
            });
        }
        Ok(())
    }
}

/// Per-stratum dual system estimate and its correction factors.
///
/// `ccf` divides the estimate by the census count, `dcf` by the
/// data-defined count, so `dcf = (C / DD) * ccf` whenever `DD > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumEstimate {
    pub stratum_id: String,
    pub dse: f64,
    pub ccf: f64,
    pub dcf: f64,
}

/// The four synthetic allocation formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulaKind {
    /// Allocate in proportion to census counts (equivalently, census count
    /// times the coverage correction factor).
    CensusBureau,
    /// Allocate in proportion to data-defined counts (data-defined count
    /// times the data-defined coverage factor).
    Alt1,
    /// Census count plus the stratum undercount distributed in proportion
    /// to imputation counts.
    Alt2,
    /// Census count plus the stratum undercount distributed in proportion
    /// to data-defined counts.
    Alt3,
}

impl FormulaKind {
    pub const ALL: [FormulaKind; 4] = [
        FormulaKind::CensusBureau,
        FormulaKind::Alt1,
        FormulaKind::Alt2,
        FormulaKind::Alt3,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FormulaKind::CensusBureau => "cb",
            FormulaKind::Alt1 => "alt1",
            FormulaKind::Alt2 => "alt2",
            FormulaKind::Alt3 => "alt3",
        }
    }
}

impl fmt::Display for FormulaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FormulaKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cb" | "census" | "census_bureau" => Ok(FormulaKind::CensusBureau),
            "alt1" => Ok(FormulaKind::Alt1),
            "alt2" => Ok(FormulaKind::Alt2),
            "alt3" => Ok(FormulaKind::Alt3),
            other => Err(format!(
                "unknown formula `{other}` (expected cb|alt1|alt2|alt3)"
            )),
        }
    }
}

/// Per-cell synthetic estimates under one formula, keyed by
/// (stratum, region). Iteration order is the deterministic key order used
/// for all summation.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationTable {
    pub formula: FormulaKind,
    pub entries: BTreeMap<(String, String), f64>,
}

impl AllocationTable {
    pub fn new(formula: FormulaKind) -> Self {
        Self {
            formula,
            entries: BTreeMap::new(),
        }
    }

    /// Sum of allocations per stratum, in stratum key order.
    pub fn per_stratum_sums(&self) -> BTreeMap<String, f64> {
        let mut sums: BTreeMap<String, f64> = BTreeMap::new();
        for ((stratum, _), s) in &self.entries {
            *sums.entry(stratum.clone()).or_insert(0.0) += s;
        }
        sums
    }
}

/// Geographic aggregation level for synthetic totals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeoLevel {
    Region,
    Group,
    State,
}

impl fmt::Display for GeoLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GeoLevel::Region => "region",
            GeoLevel::Group => "group",
            GeoLevel::State => "state",
        })
    }
}

impl FromStr for GeoLevel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "region" => Ok(GeoLevel::Region),
            "group" => Ok(GeoLevel::Group),
            "state" => Ok(GeoLevel::State),
            other => Err(format!(
                "unknown level `{other}` (expected region|group|state)"
            )),
        }
    }
}

/// Region-to-state map, with an optional region-to-group map for
/// county-group analyses.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GeoHierarchy {
    pub region_to_state: BTreeMap<String, String>,
    pub region_to_group: Option<BTreeMap<String, String>>,
}

impl GeoHierarchy {
    /// Resolve a region at the requested level. At region level every
    /// region resolves to itself.
    pub fn resolve<'a>(&'a self, region: &'a str, level: GeoLevel) -> Option<&'a str> {
        match level {
            GeoLevel::Region => Some(region),
            GeoLevel::State => self.region_to_state.get(region).map(String::as_str),
            GeoLevel::Group => self
                .region_to_group
                .as_ref()
                .and_then(|m| m.get(region))
                .map(String::as_str),
        }
    }
}

/// The ten observable counts of the two-state, single-post-stratum world,
/// plus the relative size factor of state 2 to state 1.
///
/// `mn` counts matched non-movers and `nn` unmatched non-movers; the
/// per-state true value is taken to be `CE * NN / MN`, using the
/// unmatched-to-matched ratio. Callers constructing scenarios from inputs
/// where the survey total is `MN + NN` should set `nn` accordingly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoStateScenario {
    pub ce1: u64,
    pub ce2: u64,
    pub ee1: u64,
    pub ee2: u64,
    pub mn1: u64,
    pub mn2: u64,
    pub nn1: u64,
    pub nn2: u64,
    pub ii1: u64,
    pub ii2: u64,
    /// Size of state 2 relative to state 1. 1.0 for equal-size scenarios.
    pub lambda: f64,
}

impl TwoStateScenario {
    /// Equal-size scenario (`lambda = 1`) with symmetric survey counts.
    #[allow(clippy::too_many_arguments)]
    pub fn equal_size(ce: u64, ee1: u64, ee2: u64, mn: u64, nn: u64, ii1: u64, ii2: u64) -> Self {
        Self {
            ce1: ce,
            ce2: ce,
            ee1,
            ee2,
            mn1: mn,
            mn2: mn,
            nn1: nn,
            nn2: nn,
            ii1,
            ii2,
            lambda: 1.0,
        }
    }

    /// Largest count allowed, so that cross-multiplied sign tests stay
    /// exact in 128-bit integers.
    pub const MAX_COUNT: u64 = 1 << 40;

    pub fn validate(&self) -> Result<()> {
        if self.mn1 == 0 {
            return Err(DseError::ZeroScenarioCount("MN1"));
        }
        if self.mn2 == 0 {
            return Err(DseError::ZeroScenarioCount("MN2"));
        }
        if self.lambda.is_nan() || self.lambda <= 0.0 {
            return Err(DseError::NonPositive {
                what: "lambda",
                value: self.lambda,
            });
        }
        let counts = [
            self.ce1, self.ce2, self.ee1, self.ee2, self.mn1, self.mn2, self.nn1, self.nn2,
            self.ii1, self.ii2,
        ];
        if counts.iter().any(|&c| c > Self::MAX_COUNT) {
            return Err(DseError::ScenarioCountTooLarge);
        }
        Ok(())
    }

    /// Total correct enumerations, the size measure used to split
    /// frequency tables into small and large post-strata.
    pub fn ce_total(&self) -> u64 {
        self.ce1 + self.ce2
    }
}
