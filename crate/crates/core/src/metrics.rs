//! Comparison statistics for synthetic estimates: population shares and
//! share-difference confidence intervals, per-state mean imputation rates,
//! relative differences over census and data-defined bases, and the
//! state-adjusted difference.
//!
//! Standard errors are ingested, never computed here.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{DseError, Result};
use crate::model::CellCounts;

/// Default confidence multiplier for share-difference intervals.
pub const DEFAULT_Z: f64 = 1.96;

/// Each unit's fraction of the national total.
pub fn shares(totals: &BTreeMap<String, f64>) -> Result<BTreeMap<String, f64>> {
    let national: f64 = totals.values().sum();
    if national.is_nan() || national <= 0.0 {
        return Err(DseError::NonPositive {
            what: "national total",
            value: national,
        });
    }
    Ok(totals
        .iter()
        .map(|(unit, &t)| (unit.clone(), t / national))
        .collect())
}

/// A share difference with its confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShareCi {
    pub diff: f64,
    pub se: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

/// Difference of synthetic and census shares with the interval
/// `diff ± z * se`.
pub fn share_difference_ci(syn_share: f64, census_share: f64, se: f64, z: f64) -> Result<ShareCi> {
    if se < 0.0 {
        return Err(DseError::NegativeSe(se));
    }
    let diff = syn_share - census_share;
    Ok(ShareCi {
        diff,
        se,
        ci_lo: diff - z * se,
        ci_hi: diff + z * se,
    })
}

/// One unit's share comparison record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShareRecord {
    pub unit_id: String,
    /// Synthetic share of the national total.
    pub share: f64,
    pub census_share: f64,
    pub share_diff: f64,
    pub se: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

/// Build per-unit share records from synthetic and census totals plus
/// ingested standard errors. Units missing a standard error are listed
/// together in one error.
pub fn build_share_records(
    syn_totals: &BTreeMap<String, f64>,
    census_totals: &BTreeMap<String, f64>,
    se_by_unit: &BTreeMap<String, f64>,
    z: f64,
) -> Result<Vec<ShareRecord>> {
    let syn_shares = shares(syn_totals)?;
    let census_shares = shares(census_totals)?;
    let missing: Vec<String> = syn_shares
        .keys()
        .filter(|unit| !se_by_unit.contains_key(*unit))
        .cloned()
        .collect();
    if !missing.is_empty() {
        return Err(DseError::UnmappedRegions {
            level: "standard-error".to_string(),
            regions: missing,
        });
    }
    syn_shares
        .iter()
        .map(|(unit, &share)| {
            let census_share = census_shares.get(unit).copied().unwrap_or(0.0);
            let se = se_by_unit[unit];
            let ci = share_difference_ci(share, census_share, se, z)?;
            Ok(ShareRecord {
                unit_id: unit.clone(),
                share,
                census_share,
                share_diff: ci.diff,
                se,
                ci_lo: ci.ci_lo,
                ci_hi: ci.ci_hi,
            })
        })
        .collect()
}

/// Mean imputation rate over the post-strata of one geographic unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanImputationRate {
    /// Mean of per-stratum `II / C` rates, in percent.
    pub rate_pct: f64,
    /// Number of strata with nonzero census count.
    pub n_star: usize,
}

/// Mean per-stratum imputation rate for one unit's cells.
///
/// Cells are grouped by stratum (summing regions of the unit); strata with
/// zero census count are excluded from both the sum and the count.
pub fn mean_imputation_rate(cells: &[CellCounts]) -> Result<MeanImputationRate> {
    let mut by_stratum: BTreeMap<&str, (u64, u64)> = BTreeMap::new();
    for cell in cells {
        let entry = by_stratum.entry(cell.stratum_id.as_str()).or_insert((0, 0));
        entry.0 += cell.c;
        entry.1 += cell.ii;
    }
    let mut sum = 0.0;
    let mut n_star = 0usize;
    for &(c, ii) in by_stratum.values() {
        if c != 0 {
            sum += ii as f64 / c as f64;
            n_star += 1;
        }
    }
    if n_star == 0 {
        return Err(DseError::UndefinedMeanImputationRate);
    }
    Ok(MeanImputationRate {
        rate_pct: sum / n_star as f64 * 100.0,
        n_star,
    })
}

/// Relative percent difference over the census base: `(S - C) / C * 100`.
pub fn reldif_census(s: f64, c: f64) -> Result<f64> {
    if c.is_nan() || c <= 0.0 {
        return Err(DseError::NonPositive {
            what: "census count",
            value: c,
        });
    }
    Ok((s - c) / c * 100.0)
}

/// Relative percent difference over the data-defined base:
/// `(S - DD) / DD * 100`.
pub fn reldif_dd(s: f64, dd: f64) -> Result<f64> {
    if dd.is_nan() || dd <= 0.0 {
        return Err(DseError::NonPositive {
            what: "data-defined count",
            value: dd,
        });
    }
    Ok((s - dd) / dd * 100.0)
}

/// State-adjusted difference: the data-defined relative difference of a
/// county group minus its state's imputation-to-data-defined ratio, in
/// percent.
pub fn sad(s_j: f64, dd_j: f64, ii_s: f64, dd_s: f64) -> Result<f64> {
    if dd_j.is_nan() || dd_j <= 0.0 {
        return Err(DseError::NonPositive {
            what: "group data-defined count",
            value: dd_j,
        });
    }
    if dd_s.is_nan() || dd_s <= 0.0 {
        return Err(DseError::NonPositive {
            what: "state data-defined count",
            value: dd_s,
        });
    }
    Ok(((s_j - dd_j) / dd_j - ii_s / dd_s) * 100.0)
}

/// Five-number summary of a value list.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SummaryStats {
    pub min: f64,
    pub max: f64,
    /// Midpoint convention for even-length input.
    pub median: f64,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator); 0 when undefined.
    pub sd: f64,
    /// False for a single value, where the sample deviation is undefined.
    pub sd_defined: bool,
}

/// Distribution summary: min, max, median, mean, and sample standard
/// deviation.
pub fn summarize(values: &[f64]) -> Result<SummaryStats> {
    if values.is_empty() {
        return Err(DseError::EmptyInput("values"));
    }
    let n = values.len();
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("non-NaN values"));
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    };
    let mean = sorted.iter().sum::<f64>() / n as f64;
    let (sd, sd_defined) = if n > 1 {
        let ss: f64 = sorted.iter().map(|v| (v - mean) * (v - mean)).sum();
        ((ss / (n - 1) as f64).sqrt(), true)
    } else {
        (0.0, false)
    };
    Ok(SummaryStats {
        min: sorted[0],
        max: sorted[n - 1],
        median,
        mean,
        sd,
        sd_defined,
    })
}
