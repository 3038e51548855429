//! Delimited-text ingestion with mandatory headers, `#` comment lines,
//! exhaustive violation reporting, and referential-integrity checks.
//!
//! Counts are parsed as signed integers first so negative values abort
//! with a line number rather than wrapping.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::Serialize;

use syndse_core::model::{
    validate_cells, CellCounts, GeoHierarchy, StratumSurveyInputs, TwoStateScenario,
};
use syndse_core::{AllocationTable, FormulaKind};

use crate::error::{CliError, Result};

fn reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(false)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => CliError::io(path, std::io::Error::other(e.to_string())),
            _ => CliError::parse(path, 0, e.to_string()),
        })
}

fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map(|p| p.line()).unwrap_or(0)
}

fn expect_headers(
    path: &Path,
    reader: &mut csv::Reader<std::fs::File>,
    wanted: &[&str],
) -> Result<()> {
    let headers = reader
        .headers()
        .map_err(|e| CliError::parse(path, 1, e.to_string()))?;
    let got: Vec<&str> = headers.iter().collect();
    if got != wanted {
        return Err(CliError::parse(
            path,
            1,
            format!(
                "expected header `{}`, found `{}`",
                wanted.join(","),
                got.join(",")
            ),
        ));
    }
    Ok(())
}

/// Column indices by name for files where extra columns are allowed.
fn header_map(
    path: &Path,
    reader: &mut csv::Reader<std::fs::File>,
    required: &[&str],
) -> Result<BTreeMap<String, usize>> {
    let headers = reader
        .headers()
        .map_err(|e| CliError::parse(path, 1, e.to_string()))?;
    let map: BTreeMap<String, usize> = headers
        .iter()
        .enumerate()
        .map(|(i, h)| (h.to_string(), i))
        .collect();
    for name in required {
        if !map.contains_key(*name) {
            return Err(CliError::parse(
                path,
                1,
                format!("missing required column `{name}`"),
            ));
        }
    }
    Ok(map)
}

fn parse_count(path: &Path, line: u64, field: &str, what: &str) -> Result<u64> {
    let value: i64 = field.parse().map_err(|_| {
        CliError::parse(
            path,
            line,
            format!("{what}: expected an integer, got `{field}`"),
        )
    })?;
    u64::try_from(value)
        .map_err(|_| CliError::parse(path, line, format!("{what}: negative count {value}")))
}

fn parse_real(path: &Path, line: u64, field: &str, what: &str) -> Result<f64> {
    field.parse().map_err(|_| {
        CliError::parse(
            path,
            line,
            format!("{what}: expected a number, got `{field}`"),
        )
    })
}

/// Load census cells from `stratum,region,C,DD,II`, aborting with every
/// violation listed if the file is not internally consistent.
pub fn load_cells(path: &Path) -> Result<Vec<CellCounts>> {
    let mut rdr = reader(path)?;
    expect_headers(path, &mut rdr, &["stratum", "region", "C", "DD", "II"])?;
    let mut cells = Vec::new();
    let mut lines = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| CliError::parse(path, 0, e.to_string()))?;
        let line = record_line(&record);
        cells.push(CellCounts::new(
            record[0].to_string(),
            record[1].to_string(),
            parse_count(path, line, &record[2], "C")?,
            parse_count(path, line, &record[3], "DD")?,
            parse_count(path, line, &record[4], "II")?,
        ));
        lines.push(line);
    }
    let violations = validate_cells(&cells);
    if !violations.is_empty() {
        let by_key: BTreeMap<(String, String), u64> = cells
            .iter()
            .zip(&lines)
            .map(|(c, &l)| ((c.stratum_id.clone(), c.region_id.clone()), l))
            .collect();
        let messages = violations
            .iter()
            .map(|v| {
                let key = match v {
                    syndse_core::CellViolation::CountMismatch {
                        stratum_id,
                        region_id,
                        ..
                    }
                    | syndse_core::CellViolation::DuplicateKey {
                        stratum_id,
                        region_id,
                    } => (stratum_id.clone(), region_id.clone()),
                };
                match by_key.get(&key) {
                    Some(line) => format!("{}:{}: {}", path.display(), line, v),
                    None => format!("{}: {}", path.display(), v),
                }
            })
            .collect();
        return Err(CliError::Validation(messages));
    }
    Ok(cells)
}

/// Load survey inputs from `stratum,CE,EE,MR`.
pub fn load_strata(path: &Path) -> Result<Vec<StratumSurveyInputs>> {
    let mut rdr = reader(path)?;
    expect_headers(path, &mut rdr, &["stratum", "CE", "EE", "MR"])?;
    let mut inputs = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| CliError::parse(path, 0, e.to_string()))?;
        let line = record_line(&record);
        let input = StratumSurveyInputs::new(
            record[0].to_string(),
            parse_count(path, line, &record[1], "CE")?,
            parse_count(path, line, &record[2], "EE")?,
            parse_real(path, line, &record[3], "MR")?,
        );
        if input.mr.is_nan() || input.mr <= 0.0 {
            return Err(CliError::parse(path, line, "match rate must be positive"));
        }
        if input.mr > 1.0 {
            return Err(CliError::parse(path, line, "match rate must not exceed 1"));
        }
        inputs.push(input);
    }
    Ok(inputs)
}

/// Load the region-to-state (and optional region-to-group) map from
/// `region,state[,group]`.
pub fn load_geo(path: &Path) -> Result<GeoHierarchy> {
    let mut rdr = reader(path)?;
    let headers = rdr
        .headers()
        .map_err(|e| CliError::parse(path, 1, e.to_string()))?
        .clone();
    let got: Vec<&str> = headers.iter().collect();
    let has_group = match got.as_slice() {
        ["region", "state"] => false,
        ["region", "state", "group"] => true,
        _ => {
            return Err(CliError::parse(
                path,
                1,
                format!(
                    "expected header `region,state[,group]`, found `{}`",
                    got.join(",")
                ),
            ))
        }
    };
    let mut region_to_state = BTreeMap::new();
    let mut region_to_group = BTreeMap::new();
    for record in rdr.records() {
        let record = record.map_err(|e| CliError::parse(path, 0, e.to_string()))?;
        let line = record_line(&record);
        let region = record[0].to_string();
        if region_to_state
            .insert(region.clone(), record[1].to_string())
            .is_some()
        {
            return Err(CliError::parse(
                path,
                line,
                format!("duplicate region `{region}`"),
            ));
        }
        if has_group {
            region_to_group.insert(region, record[2].to_string());
        }
    }
    Ok(GeoHierarchy {
        region_to_state,
        region_to_group: has_group.then_some(region_to_group),
    })
}

/// Load per-state share-difference standard errors from
/// `state,se_share_diff`.
pub fn load_se(path: &Path) -> Result<BTreeMap<String, f64>> {
    let mut rdr = reader(path)?;
    expect_headers(path, &mut rdr, &["state", "se_share_diff"])?;
    let mut map = BTreeMap::new();
    for record in rdr.records() {
        let record = record.map_err(|e| CliError::parse(path, 0, e.to_string()))?;
        let line = record_line(&record);
        let se = parse_real(path, line, &record[1], "se_share_diff")?;
        if se < 0.0 {
            return Err(CliError::parse(
                path,
                line,
                "standard error must be nonnegative",
            ));
        }
        map.insert(record[0].to_string(), se);
    }
    Ok(map)
}

/// Load two-state scenarios; the `lambda` column is optional and
/// defaults to 1.
pub fn load_scenarios(path: &Path) -> Result<Vec<TwoStateScenario>> {
    let mut rdr = reader(path)?;
    let required = [
        "ce1", "ce2", "ee1", "ee2", "mn1", "mn2", "nn1", "nn2", "ii1", "ii2",
    ];
    let columns = header_map(path, &mut rdr, &required)?;
    let lambda_col = columns.get("lambda").copied();
    let mut scenarios = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| CliError::parse(path, 0, e.to_string()))?;
        let line = record_line(&record);
        let count = |name: &str| parse_count(path, line, &record[columns[name]], name);
        let scenario = TwoStateScenario {
            ce1: count("ce1")?,
            ce2: count("ce2")?,
            ee1: count("ee1")?,
            ee2: count("ee2")?,
            mn1: count("mn1")?,
            mn2: count("mn2")?,
            nn1: count("nn1")?,
            nn2: count("nn2")?,
            ii1: count("ii1")?,
            ii2: count("ii2")?,
            lambda: match lambda_col {
                Some(col) => parse_real(path, line, &record[col], "lambda")?,
                None => 1.0,
            },
        };
        scenario
            .validate()
            .map_err(|e| CliError::parse(path, line, e.to_string()))?;
        scenarios.push(scenario);
    }
    Ok(scenarios)
}

/// One county-group row of a published-results table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PublishedRow {
    pub state: String,
    pub group: String,
    pub census: u64,
    pub dd: u64,
    /// Published relative differences over the census base, in percent,
    /// keyed by formula.
    pub reldif_census_pct: BTreeMap<FormulaKind, f64>,
    /// Published state-adjusted differences, when transcribed.
    pub sad_pct: BTreeMap<FormulaKind, f64>,
    /// Published imputation share of the census count, in percent.
    pub ii_pct_census: Option<f64>,
    /// Published imputation share of the data-defined count, in percent.
    pub ii_pct_dd: Option<f64>,
}

/// Load a published county-group table. Requires `state`, `group`,
/// `census`, `dd`, and `reldif_cb/alt1/alt2`; published SAD and
/// imputation-share columns are picked up when present, and unknown
/// columns are ignored.
pub fn load_published(path: &Path) -> Result<Vec<PublishedRow>> {
    let mut rdr = reader(path)?;
    let required = [
        "state",
        "group",
        "census",
        "dd",
        "reldif_cb",
        "reldif_alt1",
        "reldif_alt2",
    ];
    let columns = header_map(path, &mut rdr, &required)?;
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| CliError::parse(path, 0, e.to_string()))?;
        let line = record_line(&record);
        let real_at = |name: &str| parse_real(path, line, &record[columns[name]], name);
        let optional = |name: &str| -> Result<Option<f64>> {
            match columns.get(name) {
                Some(&col) => Ok(Some(parse_real(path, line, &record[col], name)?)),
                None => Ok(None),
            }
        };
        let mut reldif = BTreeMap::new();
        reldif.insert(FormulaKind::CensusBureau, real_at("reldif_cb")?);
        reldif.insert(FormulaKind::Alt1, real_at("reldif_alt1")?);
        reldif.insert(FormulaKind::Alt2, real_at("reldif_alt2")?);
        let mut sad = BTreeMap::new();
        for (formula, column) in [
            (FormulaKind::CensusBureau, "sad_cb"),
            (FormulaKind::Alt1, "sad_alt1"),
            (FormulaKind::Alt2, "sad_alt2"),
        ] {
            if let Some(v) = optional(column)? {
                sad.insert(formula, v);
            }
        }
        rows.push(PublishedRow {
            state: record[columns["state"]].to_string(),
            group: record[columns["group"]].to_string(),
            census: parse_count(path, line, &record[columns["census"]], "census")?,
            dd: parse_count(path, line, &record[columns["dd"]], "dd")?,
            reldif_census_pct: reldif,
            sad_pct: sad,
            ii_pct_census: optional("ii_pct_census")?,
            ii_pct_dd: optional("ii_pct_dd")?,
        });
    }
    Ok(rows)
}

/// Load per-state total imputation rates (percent of census count) from a
/// state-rates table; only `state` and `ii_total` are required.
pub fn load_state_rates(path: &Path) -> Result<BTreeMap<String, f64>> {
    let mut rdr = reader(path)?;
    let columns = header_map(path, &mut rdr, &["state", "ii_total"])?;
    let mut map = BTreeMap::new();
    for record in rdr.records() {
        let record = record.map_err(|e| CliError::parse(path, 0, e.to_string()))?;
        let line = record_line(&record);
        let rate = parse_real(path, line, &record[columns["ii_total"]], "ii_total")?;
        if !(0.0..100.0).contains(&rate) {
            return Err(CliError::parse(
                path,
                line,
                format!("ii_total {rate} out of range [0, 100)"),
            ));
        }
        map.insert(record[columns["state"]].to_string(), rate);
    }
    Ok(map)
}

/// Reload allocation tables emitted as `formula,stratum,region,S`.
pub fn load_allocations(path: &Path) -> Result<BTreeMap<FormulaKind, AllocationTable>> {
    let mut rdr = reader(path)?;
    expect_headers(path, &mut rdr, &["formula", "stratum", "region", "S"])?;
    let mut tables: BTreeMap<FormulaKind, AllocationTable> = BTreeMap::new();
    for record in rdr.records() {
        let record = record.map_err(|e| CliError::parse(path, 0, e.to_string()))?;
        let line = record_line(&record);
        let formula: FormulaKind = record[0]
            .parse()
            .map_err(|e: String| CliError::parse(path, line, e))?;
        let s = parse_real(path, line, &record[3], "S")?;
        tables
            .entry(formula)
            .or_insert_with(|| AllocationTable::new(formula))
            .entries
            .insert((record[1].to_string(), record[2].to_string()), s);
    }
    Ok(tables)
}

/// Cross-file referential integrity: every stratum in `cells` must have
/// survey inputs, every region must resolve in `geo`, and every state
/// named by `geo` must carry a standard error when one is required.
/// Dangling definitions in the auxiliary files are reported too.
pub fn check_integrity(
    cells: &[CellCounts],
    strata: Option<&[StratumSurveyInputs]>,
    geo: Option<&GeoHierarchy>,
    se: Option<&BTreeMap<String, f64>>,
) -> Vec<String> {
    let mut issues = Vec::new();
    let cell_strata: BTreeSet<&str> = cells.iter().map(|c| c.stratum_id.as_str()).collect();
    let cell_regions: BTreeSet<&str> = cells.iter().map(|c| c.region_id.as_str()).collect();
    if let Some(strata) = strata {
        let have: BTreeSet<&str> = strata.iter().map(|s| s.stratum_id.as_str()).collect();
        for missing in cell_strata.difference(&have) {
            issues.push(format!(
                "stratum `{missing}` has cells but no survey inputs"
            ));
        }
        for dangling in have.difference(&cell_strata) {
            issues.push(format!(
                "survey inputs for stratum `{dangling}` match no cells"
            ));
        }
    }
    if let Some(geo) = geo {
        let mapped: BTreeSet<&str> = geo.region_to_state.keys().map(String::as_str).collect();
        for missing in cell_regions.difference(&mapped) {
            issues.push(format!("region `{missing}` has cells but no geography row"));
        }
        for dangling in mapped.difference(&cell_regions) {
            issues.push(format!(
                "geography row for region `{dangling}` matches no cells"
            ));
        }
        if let Some(se) = se {
            let states: BTreeSet<&str> = geo.region_to_state.values().map(String::as_str).collect();
            let have: BTreeSet<&str> = se.keys().map(String::as_str).collect();
            for missing in states.difference(&have) {
                issues.push(format!("state `{missing}` has no standard error"));
            }
        }
    }
    issues
}
