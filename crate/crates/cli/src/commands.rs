//! One function per subcommand. Each loads its inputs, runs the core
//! pipeline, and emits a deterministic report; warnings go to stderr.

use std::collections::BTreeMap;

use serde::Serialize;

use syndse_core::estimator::{
    aggregate_regions, allocate_all, check_normalization, estimate_strata,
};
use syndse_core::homogeneity::chi_square_homogeneity;
use syndse_core::metrics::{
    build_share_records, mean_imputation_rate, reldif_census, reldif_dd, sad, shares, summarize,
};
use syndse_core::model::{CellCounts, GeoHierarchy, GeoLevel, StratumEstimate};
use syndse_core::sim::{run_monte_carlo, SimConfig};
use syndse_core::variance::{
    decision_rule, delta_comparison, delta_comparison_general, empirical_frequency,
    DeltaComparison, FrequencyTable, Winner,
};
use syndse_core::{DseError, FormulaKind};

use crate::args::{
    AllocateArgs, CompareArgs, EstimateArgs, HomogeneityArgs, MirArgs, SadArgs, SimulateArgs,
    ValidateArgs, VarianceArgs,
};
use crate::error::{CliError, Result};
use crate::io::{
    check_integrity, load_cells, load_geo, load_published, load_scenarios, load_se,
    load_state_rates, load_strata, PublishedRow,
};
use crate::manifest::RunManifest;
use crate::report::{csv_line, emit, fmt_full, fmt_p, fmt_pct, Output};

fn output_of(args: &crate::args::OutputArgs) -> Output {
    Output::resolve(args.format, args.out.clone())
}

// --- estimate ---------------------------------------------------------

#[derive(Serialize)]
struct EstimateRow {
    stratum: String,
    c: u64,
    dd: u64,
    ii: u64,
    cr: f64,
    dse: f64,
    ccf: f64,
    dcf: f64,
}

pub fn cmd_estimate(args: &EstimateArgs) -> Result<()> {
    let cells = load_cells(&args.cells)?;
    let strata = load_strata(&args.strata)?;
    require_clean_integrity(&cells, Some(&strata), None, None)?;
    let estimates = estimate_strata(&cells, &strata)?;

    let by_stratum = syndse_core::estimator::group_by_stratum(&cells);
    let survey: BTreeMap<&str, _> = strata.iter().map(|s| (s.stratum_id.as_str(), s)).collect();
    let rows: Vec<EstimateRow> = estimates
        .iter()
        .map(|e| {
            let cells = &by_stratum[&e.stratum_id];
            let s = survey[e.stratum_id.as_str()];
            EstimateRow {
                stratum: e.stratum_id.clone(),
                c: cells.iter().map(|c| c.c).sum(),
                dd: cells.iter().map(|c| c.dd).sum(),
                ii: cells.iter().map(|c| c.ii).sum(),
                cr: s.ce as f64 / (s.ce + s.ee) as f64,
                dse: e.dse,
                ccf: e.ccf,
                dcf: e.dcf,
            }
        })
        .collect();

    let mut csv =
        csv_line(&["stratum", "C", "DD", "II", "CR", "DSE", "CCF", "DCF"].map(String::from));
    for r in &rows {
        csv += &csv_line(&[
            r.stratum.clone(),
            r.c.to_string(),
            r.dd.to_string(),
            r.ii.to_string(),
            fmt_full(r.cr),
            fmt_full(r.dse),
            fmt_full(r.ccf),
            fmt_full(r.dcf),
        ]);
    }
    let manifest = RunManifest::new("estimate")
        .with_input(&args.cells)?
        .with_input(&args.strata)?;
    emit(&output_of(&args.output), &manifest, &csv, &rows)
}

// --- allocate ---------------------------------------------------------

#[derive(Serialize)]
struct AllocationRow {
    formula: String,
    stratum: String,
    region: String,
    s: f64,
}

pub fn cmd_allocate(args: &AllocateArgs) -> Result<()> {
    let cells = load_cells(&args.cells)?;
    let strata = load_strata(&args.strata)?;
    require_clean_integrity(&cells, Some(&strata), None, None)?;
    let estimates = estimate_strata(&cells, &strata)?;
    let formulas = args.formula.expand();

    let mut rows = Vec::new();
    for formula in &formulas {
        let (table, warnings) = allocate_all(&estimates, &cells, *formula)?;
        for warning in &warnings {
            eprintln!("warning: {warning}");
        }
        for record in check_normalization(&table, &estimates) {
            if record.flagged {
                eprintln!(
                    "warning: stratum `{}` normalization residual {:.3e}",
                    record.stratum_id, record.residual
                );
            }
        }
        for ((stratum, region), s) in &table.entries {
            rows.push(AllocationRow {
                formula: formula.as_str().to_string(),
                stratum: stratum.clone(),
                region: region.clone(),
                s: *s,
            });
        }
    }

    let mut csv = csv_line(&["formula", "stratum", "region", "S"].map(String::from));
    for r in &rows {
        csv += &csv_line(&[
            r.formula.clone(),
            r.stratum.clone(),
            r.region.clone(),
            fmt_full(r.s),
        ]);
    }
    let mut manifest = RunManifest::new("allocate")
        .with_input(&args.cells)?
        .with_input(&args.strata)?;
    manifest.formulas = formulas.iter().map(|f| f.as_str().to_string()).collect();
    emit(&output_of(&args.output), &manifest, &csv, &rows)
}

// --- compare ----------------------------------------------------------

#[derive(Serialize)]
struct CompareRow {
    state: String,
    census_share: f64,
    /// Share difference per formula, keyed by formula name.
    diff: BTreeMap<String, f64>,
    se: f64,
    /// Interval around the census-formula share difference.
    ci_lo: f64,
    ci_hi: f64,
}

pub fn cmd_compare(args: &CompareArgs) -> Result<()> {
    let cells = load_cells(&args.cells)?;
    let strata = load_strata(&args.strata)?;
    let geo = load_geo(&args.geo)?;
    let se = load_se(&args.se)?;
    require_clean_integrity(&cells, Some(&strata), Some(&geo), Some(&se))?;
    let estimates = estimate_strata(&cells, &strata)?;

    // Census totals by state.
    let mut census_totals: BTreeMap<String, f64> = BTreeMap::new();
    for cell in &cells {
        let state = geo
            .resolve(&cell.region_id, GeoLevel::State)
            .expect("integrity checked");
        *census_totals.entry(state.to_string()).or_insert(0.0) += cell.c as f64;
    }

    let mut per_formula: BTreeMap<FormulaKind, Vec<syndse_core::metrics::ShareRecord>> =
        BTreeMap::new();
    for formula in FormulaKind::ALL {
        let (table, warnings) = allocate_all(&estimates, &cells, formula)?;
        for warning in &warnings {
            eprintln!("warning: {warning}");
        }
        let totals = aggregate_regions(&table, &geo, GeoLevel::State)?;
        per_formula.insert(
            formula,
            build_share_records(&totals, &census_totals, &se, args.z)?,
        );
    }

    let census_shares = shares(&census_totals)?;
    let cb_records = &per_formula[&FormulaKind::CensusBureau];
    let mut rows = Vec::new();
    for (i, state) in census_shares.keys().enumerate() {
        let mut diff = BTreeMap::new();
        for (formula, records) in &per_formula {
            diff.insert(formula.as_str().to_string(), records[i].share_diff);
        }
        rows.push(CompareRow {
            state: state.clone(),
            census_share: census_shares[state],
            diff,
            se: cb_records[i].se,
            ci_lo: cb_records[i].ci_lo,
            ci_hi: cb_records[i].ci_hi,
        });
    }

    let mut csv = csv_line(
        &[
            "state",
            "census_share",
            "diff_cb",
            "diff_alt1",
            "diff_alt2",
            "diff_alt3",
            "se",
            "ci_lo",
            "ci_hi",
        ]
        .map(String::from),
    );
    for r in &rows {
        csv += &csv_line(&[
            r.state.clone(),
            fmt_full(r.census_share),
            fmt_full(r.diff["cb"]),
            fmt_full(r.diff["alt1"]),
            fmt_full(r.diff["alt2"]),
            fmt_full(r.diff["alt3"]),
            fmt_full(r.se),
            fmt_full(r.ci_lo),
            fmt_full(r.ci_hi),
        ]);
    }
    let mut manifest = RunManifest::new("compare")
        .with_input(&args.cells)?
        .with_input(&args.strata)?
        .with_input(&args.geo)?
        .with_input(&args.se)?;
    manifest.z = Some(args.z);
    manifest.level = Some("state".to_string());
    manifest.formulas = FormulaKind::ALL
        .iter()
        .map(|f| f.as_str().to_string())
        .collect();
    emit(&output_of(&args.output), &manifest, &csv, &rows)
}

// --- sad --------------------------------------------------------------

#[derive(Serialize)]
struct SadRow {
    state: String,
    group: String,
    formula: String,
    synthetic: f64,
    reldif_census_pct: f64,
    reldif_dd_pct: f64,
    sad_pct: f64,
}

#[derive(Serialize)]
struct SadReport {
    rows: Vec<SadRow>,
    /// Distribution of the state-adjusted difference per formula.
    summary: BTreeMap<String, syndse_core::metrics::SummaryStats>,
}

fn sad_rows_from_published(
    rows: &[PublishedRow],
    state_rates: &BTreeMap<String, f64>,
) -> Result<Vec<SadRow>> {
    let mut out = Vec::new();
    for row in rows {
        let rate = *state_rates.get(&row.state).ok_or_else(|| {
            CliError::Validation(vec![format!(
                "state `{}` has no imputation rate in the state-rates file",
                row.state
            )])
        })?;
        for (formula, reldif_pct) in &row.reldif_census_pct {
            let synthetic = row.census as f64 * (1.0 + reldif_pct / 100.0);
            out.push(SadRow {
                state: row.state.clone(),
                group: row.group.clone(),
                formula: formula.as_str().to_string(),
                synthetic,
                reldif_census_pct: *reldif_pct,
                reldif_dd_pct: reldif_dd(synthetic, row.dd as f64)?,
                sad_pct: sad(synthetic, row.dd as f64, rate, 100.0 - rate)?,
            });
        }
    }
    Ok(out)
}

fn sad_rows_from_pipeline(
    cells: &[CellCounts],
    estimates: &[StratumEstimate],
    geo: &GeoHierarchy,
) -> Result<Vec<SadRow>> {
    if geo.region_to_group.is_none() {
        return Err(CliError::Validation(vec![
            "the computed pipeline needs a geography file with a `group` column".to_string(),
        ]));
    }
    // Census, data-defined, and imputation totals per group and state.
    let mut group_c: BTreeMap<String, f64> = BTreeMap::new();
    let mut group_dd: BTreeMap<String, f64> = BTreeMap::new();
    let mut group_state: BTreeMap<String, String> = BTreeMap::new();
    let mut state_dd: BTreeMap<String, f64> = BTreeMap::new();
    let mut state_ii: BTreeMap<String, f64> = BTreeMap::new();
    for cell in cells {
        let group = geo
            .resolve(&cell.region_id, GeoLevel::Group)
            .ok_or_else(|| DseError::UnmappedRegions {
                level: "group".to_string(),
                regions: vec![cell.region_id.clone()],
            })?;
        let state = geo
            .resolve(&cell.region_id, GeoLevel::State)
            .ok_or_else(|| DseError::UnmappedRegions {
                level: "state".to_string(),
                regions: vec![cell.region_id.clone()],
            })?;
        *group_c.entry(group.to_string()).or_insert(0.0) += cell.c as f64;
        *group_dd.entry(group.to_string()).or_insert(0.0) += cell.dd as f64;
        group_state.insert(group.to_string(), state.to_string());
        *state_dd.entry(state.to_string()).or_insert(0.0) += cell.dd as f64;
        *state_ii.entry(state.to_string()).or_insert(0.0) += cell.ii as f64;
    }

    let mut out = Vec::new();
    for formula in FormulaKind::ALL {
        let (table, warnings) = allocate_all(estimates, cells, formula)?;
        for warning in &warnings {
            eprintln!("warning: {warning}");
        }
        let totals = aggregate_regions(&table, geo, GeoLevel::Group)?;
        for (group, synthetic) in &totals {
            let state = &group_state[group];
            out.push(SadRow {
                state: state.clone(),
                group: group.clone(),
                formula: formula.as_str().to_string(),
                synthetic: *synthetic,
                reldif_census_pct: reldif_census(*synthetic, group_c[group])?,
                reldif_dd_pct: reldif_dd(*synthetic, group_dd[group])?,
                sad_pct: sad(
                    *synthetic,
                    group_dd[group],
                    state_ii[state],
                    state_dd[state],
                )?,
            });
        }
    }
    // Stable order: state, group, formula.
    out.sort_by(|a, b| (&a.state, &a.group, &a.formula).cmp(&(&b.state, &b.group, &b.formula)));
    Ok(out)
}

pub fn cmd_sad(args: &SadArgs) -> Result<()> {
    let (rows, manifest) = match (&args.published, &args.cells) {
        (Some(published_path), None) => {
            let state_rates_path = args.state_rates.as_ref().expect("enforced by clap");
            let published = load_published(published_path)?;
            let rates = load_state_rates(state_rates_path)?;
            let rows = sad_rows_from_published(&published, &rates)?;
            let manifest = RunManifest::new("sad")
                .with_input(published_path)?
                .with_input(state_rates_path)?;
            (rows, manifest)
        }
        (None, Some(cells_path)) => {
            let strata_path = args.strata.as_ref().expect("enforced by clap");
            let geo_path = args.geo.as_ref().expect("enforced by clap");
            let cells = load_cells(cells_path)?;
            let strata = load_strata(strata_path)?;
            let geo = load_geo(geo_path)?;
            require_clean_integrity(&cells, Some(&strata), Some(&geo), None)?;
            let estimates = estimate_strata(&cells, &strata)?;
            let rows = sad_rows_from_pipeline(&cells, &estimates, &geo)?;
            let manifest = RunManifest::new("sad")
                .with_input(cells_path)?
                .with_input(strata_path)?
                .with_input(geo_path)?;
            (rows, manifest)
        }
        _ => {
            return Err(CliError::Validation(vec![
                "pass either --published with --state-rates, or --cells with --strata and --geo"
                    .to_string(),
            ]))
        }
    };

    let mut summary = BTreeMap::new();
    for formula in FormulaKind::ALL {
        let values: Vec<f64> = rows
            .iter()
            .filter(|r| r.formula == formula.as_str())
            .map(|r| r.sad_pct)
            .collect();
        if !values.is_empty() {
            summary.insert(formula.as_str().to_string(), summarize(&values)?);
        }
    }

    let mut csv = csv_line(
        &[
            "state",
            "group",
            "formula",
            "synthetic",
            "reldif_census",
            "reldif_dd",
            "sad",
        ]
        .map(String::from),
    );
    for r in &rows {
        csv += &csv_line(&[
            r.state.clone(),
            r.group.clone(),
            r.formula.clone(),
            fmt_full(r.synthetic),
            fmt_pct(r.reldif_census_pct),
            fmt_pct(r.reldif_dd_pct),
            fmt_pct(r.sad_pct),
        ]);
    }

    if let Some(summary_path) = &args.summary_out {
        let mut text =
            csv_line(&["formula", "min", "max", "median", "mean", "sd"].map(String::from));
        for (formula, stats) in &summary {
            text += &csv_line(&[
                formula.clone(),
                fmt_pct(stats.min),
                fmt_pct(stats.max),
                fmt_pct(stats.median),
                fmt_pct(stats.mean),
                fmt_pct(stats.sd),
            ]);
        }
        std::fs::write(summary_path, text).map_err(|e| CliError::io(summary_path, e))?;
    }

    let report = SadReport { rows, summary };
    emit(&output_of(&args.output), &manifest, &csv, &report)
}

// --- mir --------------------------------------------------------------

#[derive(Serialize)]
struct MirRow {
    state: String,
    mir_pct: f64,
    n_star: usize,
}

pub fn cmd_mir(args: &MirArgs) -> Result<()> {
    let cells = load_cells(&args.cells)?;
    let geo = load_geo(&args.geo)?;
    require_clean_integrity(&cells, None, Some(&geo), None)?;

    let mut by_state: BTreeMap<String, Vec<CellCounts>> = BTreeMap::new();
    for cell in &cells {
        let state = geo
            .resolve(&cell.region_id, GeoLevel::State)
            .expect("integrity checked");
        by_state
            .entry(state.to_string())
            .or_default()
            .push(cell.clone());
    }
    let mut rows = Vec::new();
    for (state, cells) in &by_state {
        let mir = mean_imputation_rate(cells)?;
        rows.push(MirRow {
            state: state.clone(),
            mir_pct: mir.rate_pct,
            n_star: mir.n_star,
        });
    }

    let mut csv = csv_line(&["state", "mir", "n_star"].map(String::from));
    for r in &rows {
        csv += &csv_line(&[r.state.clone(), fmt_pct(r.mir_pct), r.n_star.to_string()]);
    }
    let manifest = RunManifest::new("mir")
        .with_input(&args.cells)?
        .with_input(&args.geo)?;
    emit(&output_of(&args.output), &manifest, &csv, &rows)
}

// --- homogeneity ------------------------------------------------------

pub fn cmd_homogeneity(args: &HomogeneityArgs) -> Result<()> {
    let cells = load_cells(&args.cells)?;
    let result = chi_square_homogeneity(&cells)?;

    for excluded in &result.excluded {
        eprintln!(
            "note: stratum `{}` excluded: {}",
            excluded.stratum_id, excluded.reason
        );
    }
    if let Some(combined) = &result.combined {
        eprintln!(
            "combined: chi-square {:.6} on {} df, p = {}",
            combined.statistic,
            combined.df,
            fmt_p(combined.p_value)
        );
    }
    if let Some(worst) = result.worst_stratum() {
        eprintln!(
            "worst stratum `{}`: chi-square {:.6} on {} df, p = {}",
            worst.stratum_id,
            worst.statistic,
            worst.df,
            fmt_p(worst.p_value)
        );
    }

    let mut csv =
        csv_line(&["stratum", "chi_square", "df", "p_value", "low_expected"].map(String::from));
    for s in &result.per_stratum {
        csv += &csv_line(&[
            s.stratum_id.clone(),
            fmt_full(s.statistic),
            s.df.to_string(),
            fmt_full(s.p_value),
            s.low_expected.to_string(),
        ]);
    }
    if let Some(combined) = &result.combined {
        csv += &csv_line(&[
            "(combined)".to_string(),
            fmt_full(combined.statistic),
            combined.df.to_string(),
            fmt_full(combined.p_value),
            String::new(),
        ]);
    }
    let manifest = RunManifest::new("homogeneity").with_input(&args.cells)?;
    emit(&output_of(&args.output), &manifest, &csv, &result)
}

// --- variance ---------------------------------------------------------

#[derive(Serialize)]
struct VarianceRow {
    scenario: syndse_core::TwoStateScenario,
    s_true: (f64, f64),
    s_c: (f64, f64),
    s_d: (f64, f64),
    delta_c: f64,
    delta_d: f64,
    diff_exact: f64,
    /// Large-CE approximation; only defined for equal-size scenarios.
    diff_approx: Option<f64>,
    predicted: Winner,
    actual: Winner,
}

#[derive(Serialize)]
struct VarianceReport {
    rows: Vec<VarianceRow>,
    frequency: FrequencyTable,
}

fn is_equal_size(s: &syndse_core::TwoStateScenario) -> bool {
    s.ce1 == s.ce2 && s.mn1 == s.mn2 && s.nn1 == s.nn2
}

pub fn cmd_variance(args: &VarianceArgs) -> Result<()> {
    let scenarios = load_scenarios(&args.scenarios)?;
    let mut rows = Vec::new();
    let mut equal_size_comparisons: Vec<DeltaComparison> = Vec::new();
    for scenario in &scenarios {
        if is_equal_size(scenario) {
            let cmp = delta_comparison(scenario)?;
            rows.push(VarianceRow {
                scenario: *scenario,
                s_true: (cmp.s_true, cmp.s_true),
                s_c: cmp.s_c,
                s_d: cmp.s_d,
                delta_c: cmp.delta_c,
                delta_d: cmp.delta_d,
                diff_exact: cmp.diff_exact,
                diff_approx: Some(cmp.diff_approx),
                predicted: cmp.predicted_winner,
                actual: cmp.actual_winner,
            });
            equal_size_comparisons.push(cmp);
        } else {
            let g = delta_comparison_general(scenario)?;
            let actual = if g.diff > 0.0 {
                Winner::Ccf
            } else if g.diff < 0.0 {
                Winner::Dcf
            } else {
                Winner::Tie
            };
            rows.push(VarianceRow {
                scenario: *scenario,
                s_true: g.s_true,
                s_c: g.s_c,
                s_d: g.s_d,
                delta_c: g.delta_c,
                delta_d: g.delta_d,
                diff_exact: g.diff,
                diff_approx: None,
                predicted: decision_rule(scenario, scenario.lambda),
                actual,
            });
        }
    }
    let frequency = empirical_frequency(&equal_size_comparisons, args.threshold);

    let header = [
        "ce1",
        "ce2",
        "ee1",
        "ee2",
        "mn1",
        "mn2",
        "nn1",
        "nn2",
        "ii1",
        "ii2",
        "lambda",
        "s_true1",
        "s_true2",
        "s1_c",
        "s2_c",
        "s1_d",
        "s2_d",
        "delta_c",
        "delta_d",
        "diff_exact",
        "diff_approx",
        "predicted",
        "actual",
    ];
    let mut csv = csv_line(&header.map(String::from));
    for r in &rows {
        let s = &r.scenario;
        csv += &csv_line(&[
            s.ce1.to_string(),
            s.ce2.to_string(),
            s.ee1.to_string(),
            s.ee2.to_string(),
            s.mn1.to_string(),
            s.mn2.to_string(),
            s.nn1.to_string(),
            s.nn2.to_string(),
            s.ii1.to_string(),
            s.ii2.to_string(),
            fmt_full(s.lambda),
            fmt_full(r.s_true.0),
            fmt_full(r.s_true.1),
            fmt_full(r.s_c.0),
            fmt_full(r.s_c.1),
            fmt_full(r.s_d.0),
            fmt_full(r.s_d.1),
            fmt_full(r.delta_c),
            fmt_full(r.delta_d),
            fmt_full(r.diff_exact),
            r.diff_approx.map(fmt_full).unwrap_or_default(),
            r.predicted.to_string(),
            r.actual.to_string(),
        ]);
    }
    // Frequency table as trailing comment lines; loaders skip them.
    csv += &format!(
        "# frequency (threshold {}): small ccf={} dcf={} total={}; large ccf={} dcf={} total={}; \
         column totals ccf={} dcf={} grand={}; ties={}\n",
        frequency.threshold,
        frequency.small_ccf,
        frequency.small_dcf,
        frequency.total_small(),
        frequency.large_ccf,
        frequency.large_dcf,
        frequency.total_large(),
        frequency.total_ccf(),
        frequency.total_dcf(),
        frequency.total(),
        frequency.ties,
    );

    let report = VarianceReport { rows, frequency };
    let manifest = RunManifest::new("variance").with_input(&args.scenarios)?;
    emit(&output_of(&args.output), &manifest, &csv, &report)
}

// --- simulate ---------------------------------------------------------

pub fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| CliError::io(&args.config, e))?;
    let config: SimConfig =
        toml::from_str(&text).map_err(|e| CliError::parse(&args.config, 0, e.to_string()))?;
    let report = run_monte_carlo(&config, args.workers)?;

    let mut csv = csv_line(
        &[
            "formula", "region", "truth", "mean", "bias", "mse", "se_mean",
        ]
        .map(String::from),
    );
    for (formula, formula_report) in &report.formulas {
        for (region, r) in &formula_report.regions {
            csv += &csv_line(&[
                formula.clone(),
                region.clone(),
                fmt_full(r.truth),
                fmt_full(r.mean),
                fmt_full(r.bias),
                fmt_full(r.mse),
                fmt_full(r.se_mean),
            ]);
        }
    }
    let mut manifest = RunManifest::new("simulate").with_input(&args.config)?;
    manifest.seed = Some(config.seed);
    manifest.rng_scheme = Some(syndse_core::sim::RNG_SCHEME);
    let output = Output::resolve(args.format, args.out.clone());
    emit(&output, &manifest, &csv, &report)
}

// --- validate ---------------------------------------------------------

pub fn cmd_validate(args: &ValidateArgs) -> Result<()> {
    let cells = load_cells(&args.cells)?;
    let strata = args.strata.as_deref().map(load_strata).transpose()?;
    let geo = args.geo.as_deref().map(load_geo).transpose()?;
    let se = args.se.as_deref().map(load_se).transpose()?;

    let mut issues = check_integrity(&cells, strata.as_deref(), geo.as_ref(), se.as_ref());
    if let Some(strata) = &strata {
        for s in strata {
            if let Err(e) = s.validate() {
                issues.push(e.to_string());
            }
        }
    }
    if issues.is_empty() {
        println!(
            "ok: {} cells across {} strata",
            cells.len(),
            cells
                .iter()
                .map(|c| c.stratum_id.as_str())
                .collect::<std::collections::BTreeSet<_>>()
                .len()
        );
        Ok(())
    } else {
        Err(CliError::Validation(issues))
    }
}

// --- shared -----------------------------------------------------------

fn require_clean_integrity(
    cells: &[CellCounts],
    strata: Option<&[syndse_core::StratumSurveyInputs]>,
    geo: Option<&GeoHierarchy>,
    se: Option<&BTreeMap<String, f64>>,
) -> Result<()> {
    // Dangling auxiliary rows are tolerated in pipelines (a shared
    // geography file may cover more regions than one cell file); missing
    // coverage is not.
    let issues: Vec<String> = check_integrity(cells, strata, geo, se)
        .into_iter()
        .filter(|issue| !issue.contains("match no cells") && !issue.contains("matches no cells"))
        .collect();
    if issues.is_empty() {
        Ok(())
    } else {
        Err(CliError::Validation(issues))
    }
}
