//! Per-stratum dual system estimation and synthetic allocation to regions.
//!
//! The estimate for a post-stratum is `DSE = DD * CR / MR`. Only the
//! allocation step differs between formulas: the estimate is computed once
//! per stratum and shared by all four. For one stratum with regions `k`,
//!
//! * census-bureau: `S_k = C_k * (DSE / C)`
//! * alt1:          `S_k = DD_k * (DSE / DD)`
//! * alt2:          `S_k = C_k + (DSE - C) * II_k / II`
//! * alt3:          `S_k = C_k + (DSE - C) * DD_k / DD`
//!
//! All four normalize: the regional values of a stratum sum back to its
//! DSE up to roundoff. Region sums are taken sequentially in key order so
//! results are reproducible regardless of caller parallelism.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{DseError, Result};
use crate::model::{
    AllocationTable, CellCounts, FormulaKind, GeoHierarchy, GeoLevel, StratumEstimate,
    StratumSurveyInputs,
};

/// E-sample correct-enumeration rate `CE / (CE + EE)`.
pub fn correct_enumeration_rate(ce: u64, ee: u64, stratum: &str) -> Result<f64> {
    if ce + ee == 0 {
        return Err(DseError::UndefinedRate {
            stratum: stratum.to_string(),
        });
    }
    Ok(ce as f64 / (ce + ee) as f64)
}

/// Dual system estimate `DD * CR / MR` for one stratum.
pub fn dse(dd: u64, cr: f64, mr: f64, stratum: &str) -> Result<f64> {
    if !(0.0..=1.0).contains(&cr) {
        return Err(DseError::InvalidRate {
            stratum: stratum.to_string(),
            what: "correct-enumeration rate",
            value: cr,
        });
    }
    if mr.is_nan() || mr <= 0.0 || mr > 1.0 {
        return Err(DseError::InvalidMatchRate {
            stratum: stratum.to_string(),
            mr,
        });
    }
    Ok(dd as f64 * cr / mr)
}

/// Coverage correction factor `DSE / C` and data-defined coverage factor
/// `DSE / DD`. The identity `dcf = (C / DD) * ccf` holds by construction.
pub fn correction_factors(dse: f64, c: u64, dd: u64, stratum: &str) -> Result<(f64, f64)> {
    if c == 0 || dd == 0 {
        return Err(DseError::DegenerateStratum {
            stratum: stratum.to_string(),
            c,
            dd,
        });
    }
    Ok((dse / c as f64, dse / dd as f64))
}

/// Estimate one stratum from its cells and survey inputs.
///
/// Strata with `C > 0` but `DD = 0` (all-imputation strata) are rejected
/// as degenerate rather than collapsed.
pub fn estimate_stratum(
    cells: &[CellCounts],
    survey: &StratumSurveyInputs,
) -> Result<StratumEstimate> {
    if cells.is_empty() {
        return Err(DseError::EmptyInput("cells"));
    }
    for cell in cells {
        if cell.stratum_id != survey.stratum_id {
            return Err(DseError::MixedStrata {
                expected: survey.stratum_id.clone(),
                found: cell.stratum_id.clone(),
            });
        }
    }
    survey.validate()?;
    let c_i: u64 = cells.iter().map(|c| c.c).sum();
    let dd_i: u64 = cells.iter().map(|c| c.dd).sum();
    let cr = correct_enumeration_rate(survey.ce, survey.ee, &survey.stratum_id)?;
    let dse = dse(dd_i, cr, survey.mr, &survey.stratum_id)?;
    let (ccf, dcf) = correction_factors(dse, c_i, dd_i, &survey.stratum_id)?;
    Ok(StratumEstimate {
        stratum_id: survey.stratum_id.clone(),
        dse,
        ccf,
        dcf,
    })
}

/// Estimate every stratum present in `cells`, joining against survey
/// inputs by stratum id. Strata without survey inputs are reported
/// together in one error.
pub fn estimate_strata(
    cells: &[CellCounts],
    survey: &[StratumSurveyInputs],
) -> Result<Vec<StratumEstimate>> {
    let by_stratum = group_by_stratum(cells);
    let survey_by_id: BTreeMap<&str, &StratumSurveyInputs> =
        survey.iter().map(|s| (s.stratum_id.as_str(), s)).collect();
    let missing: Vec<String> = by_stratum
        .keys()
        .filter(|id| !survey_by_id.contains_key(id.as_str()))
        .cloned()
        .collect();
    if !missing.is_empty() {
        return Err(DseError::MissingSurveyInputs(missing));
    }
    by_stratum
        .iter()
        .map(|(id, cells)| estimate_stratum(cells, survey_by_id[id.as_str()]))
        .collect()
}

/// Group cells by stratum id, preserving deterministic order.
pub fn group_by_stratum(cells: &[CellCounts]) -> BTreeMap<String, Vec<CellCounts>> {
    let mut map: BTreeMap<String, Vec<CellCounts>> = BTreeMap::new();
    for cell in cells {
        map.entry(cell.stratum_id.clone())
            .or_default()
            .push(cell.clone());
    }
    for group in map.values_mut() {
        group.sort_by(|a, b| a.region_id.cmp(&b.region_id));
    }
    map
}

/// Noteworthy events produced while allocating.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum AllocationWarning {
    /// Requested alt2 on a stratum with no imputations; allocation fell
    /// back to the proportional-to-census formula, the limit of alt2 as
    /// imputations vanish uniformly.
    Alt2NoImputations { stratum_id: String },
    /// An allocation came out negative (possible under alt2 when the
    /// estimate falls far below the census count). Values are reported
    /// as-is; clamping would break normalization.
    NegativeAllocation {
        stratum_id: String,
        region_id: String,
        value: f64,
    },
}

impl std::fmt::Display for AllocationWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AllocationWarning::Alt2NoImputations { stratum_id } => write!(
                f,
                "stratum `{stratum_id}`: no imputations; alt2 fell back to proportional-to-census allocation"
            ),
            AllocationWarning::NegativeAllocation {
                stratum_id,
                region_id,
                value,
            } => write!(
                f,
                "stratum `{stratum_id}`, region `{region_id}`: negative allocation {value}"
            ),
        }
    }
}

/// Allocation of one stratum's estimate to its regions.
#[derive(Debug, Clone, PartialEq)]
pub struct StratumAllocation {
    pub stratum_id: String,
    pub formula: FormulaKind,
    /// (region, S) pairs in region key order.
    pub values: Vec<(String, f64)>,
    pub warnings: Vec<AllocationWarning>,
}

/// Distribute a stratum's estimate to its regions under one formula.
///
/// `cells` must cover exactly the estimate's stratum. Negative values and
/// the alt2 zero-imputation fallback are reported as warnings, never
/// altered.
pub fn allocate(
    estimate: &StratumEstimate,
    cells: &[CellCounts],
    formula: FormulaKind,
) -> Result<StratumAllocation> {
    if cells.is_empty() {
        return Err(DseError::EmptyInput("cells"));
    }
    for cell in cells {
        if cell.stratum_id != estimate.stratum_id {
            return Err(DseError::MixedStrata {
                expected: estimate.stratum_id.clone(),
                found: cell.stratum_id.clone(),
            });
        }
    }
    let mut sorted: Vec<&CellCounts> = cells.iter().collect();
    sorted.sort_by(|a, b| a.region_id.cmp(&b.region_id));

    let c_i: u64 = sorted.iter().map(|c| c.c).sum();
    let dd_i: u64 = sorted.iter().map(|c| c.dd).sum();
    let ii_i: u64 = sorted.iter().map(|c| c.ii).sum();
    if c_i == 0 {
        return Err(DseError::DegenerateStratum {
            stratum: estimate.stratum_id.clone(),
            c: c_i,
            dd: dd_i,
        });
    }
    if dd_i == 0 && matches!(formula, FormulaKind::Alt1 | FormulaKind::Alt3) {
        return Err(DseError::DegenerateStratum {
            stratum: estimate.stratum_id.clone(),
            c: c_i,
            dd: dd_i,
        });
    }

    let mut warnings = Vec::new();
    let effective = if formula == FormulaKind::Alt2 && ii_i == 0 {
        warnings.push(AllocationWarning::Alt2NoImputations {
            stratum_id: estimate.stratum_id.clone(),
        });
        FormulaKind::CensusBureau
    } else {
        formula
    };

    let dse = estimate.dse;
    let undercount = dse - c_i as f64;
    let values: Vec<(String, f64)> = match effective {
        FormulaKind::CensusBureau => {
            let ccf = dse / c_i as f64;
            sorted
                .iter()
                .map(|cell| (cell.region_id.clone(), cell.c as f64 * ccf))
                .collect()
        }
        FormulaKind::Alt1 => {
            let dcf = dse / dd_i as f64;
            sorted
                .iter()
                .map(|cell| (cell.region_id.clone(), cell.dd as f64 * dcf))
                .collect()
        }
        FormulaKind::Alt2 => sorted
            .iter()
            .map(|cell| {
                let weight = cell.ii as f64 / ii_i as f64;
                (cell.region_id.clone(), cell.c as f64 + undercount * weight)
            })
            .collect(),
        FormulaKind::Alt3 => sorted
            .iter()
            .map(|cell| {
                let weight = cell.dd as f64 / dd_i as f64;
                (cell.region_id.clone(), cell.c as f64 + undercount * weight)
            })
            .collect(),
    };

    for (region, s) in &values {
        if *s < 0.0 {
            warnings.push(AllocationWarning::NegativeAllocation {
                stratum_id: estimate.stratum_id.clone(),
                region_id: region.clone(),
                value: *s,
            });
        }
    }

    Ok(StratumAllocation {
        stratum_id: estimate.stratum_id.clone(),
        formula,
        values,
        warnings,
    })
}

/// Allocate every stratum under one formula into a single table.
pub fn allocate_all(
    estimates: &[StratumEstimate],
    cells: &[CellCounts],
    formula: FormulaKind,
) -> Result<(AllocationTable, Vec<AllocationWarning>)> {
    let by_stratum = group_by_stratum(cells);
    let mut table = AllocationTable::new(formula);
    let mut warnings = Vec::new();
    for estimate in estimates {
        let cells = by_stratum
            .get(&estimate.stratum_id)
            .ok_or(DseError::EmptyInput("cells for estimated stratum"))?;
        let allocation = allocate(estimate, cells, formula)?;
        warnings.extend(allocation.warnings);
        for (region, s) in allocation.values {
            table
                .entries
                .insert((estimate.stratum_id.clone(), region), s);
        }
    }
    Ok((table, warnings))
}

/// Sum allocations up to the requested geographic level.
///
/// Every entry's region must resolve at that level; offenders are listed
/// exhaustively. Sums run in (stratum, region) key order.
pub fn aggregate_regions(
    table: &AllocationTable,
    geo: &GeoHierarchy,
    level: GeoLevel,
) -> Result<BTreeMap<String, f64>> {
    let mut unmapped: Vec<String> = Vec::new();
    for (_, region) in table.entries.keys() {
        if geo.resolve(region, level).is_none() && !unmapped.contains(region) {
            unmapped.push(region.clone());
        }
    }
    if !unmapped.is_empty() {
        return Err(DseError::UnmappedRegions {
            level: level.to_string(),
            regions: unmapped,
        });
    }
    let mut totals: BTreeMap<String, f64> = BTreeMap::new();
    for ((_, region), s) in &table.entries {
        let unit = geo.resolve(region, level).expect("checked above");
        *totals.entry(unit.to_string()).or_insert(0.0) += s;
    }
    Ok(totals)
}

/// One stratum's normalization residual.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalizationRecord {
    pub stratum_id: String,
    pub sum: f64,
    pub dse: f64,
    /// `|sum - dse| / dse`.
    pub residual: f64,
    /// Set when the residual exceeds 1e-9.
    pub flagged: bool,
}

/// Residual threshold above which a stratum is flagged.
pub const NORMALIZATION_FLAG_THRESHOLD: f64 = 1e-9;

/// Check that each stratum's allocations sum back to its estimate.
pub fn check_normalization(
    table: &AllocationTable,
    estimates: &[StratumEstimate],
) -> Vec<NormalizationRecord> {
    let sums = table.per_stratum_sums();
    let mut records = Vec::new();
    for estimate in estimates {
        let Some(&sum) = sums.get(&estimate.stratum_id) else {
            continue;
        };
        let residual = (sum - estimate.dse).abs() / estimate.dse;
        records.push(NormalizationRecord {
            stratum_id: estimate.stratum_id.clone(),
            sum,
            dse: estimate.dse,
            residual,
            flagged: residual > NORMALIZATION_FLAG_THRESHOLD,
        });
    }
    records
}
