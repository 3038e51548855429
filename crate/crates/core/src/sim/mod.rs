//! Seeded simulation lab: generates stratified populations with
//! controllable imputation and error heterogeneity, pushes them through
//! census-plus-survey measurement, and measures empirical bias and MSE of
//! the four allocation formulas against known truth.
//!
//! Measurement model, per cell: each true person is census-captured with
//! `capture_prob`; captured persons are marked insufficient-information
//! with `ii_rate` (joining the census count but not the data-defined
//! count, and never the matching process), data-defined otherwise.
//! Erroneous enumerations arrive as `Binomial(truth, ee_rate)` extra
//! records that inflate census and data-defined counts but not truth.
//! The survey covers the whole true population; a person matches iff
//! census-captured and data-defined, so the per-stratum match rate is
//! matched / (matched + unmatched). Strata with no matches are
//! degenerate: such replicates are counted and excluded from allocation
//! statistics.
//!
//! Identical (config, seed) pairs produce byte-identical reports under
//! any worker count: every cell of every replicate draws from its own
//! counter-derived stream, replicates are reduced in fixed blocks, and
//! block partials fold in index order.

pub mod config;
pub mod oracle;
pub mod rng;

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use rand_distr::{Binomial, Distribution, Poisson};
use serde::Serialize;

use crate::error::Result;
use crate::estimator::{allocate_all, estimate_strata, AllocationWarning};
use crate::model::{CellCounts, FormulaKind, StratumSurveyInputs};

pub use config::{CountParam, RateParam, SimConfig, TruthSpec};
pub use oracle::{small_instance_oracle, CellExpectation, OracleReport, ORACLE_OUTCOME_LIMIT};
pub use rng::RNG_SCHEME;

/// Replicates per reduction block.
const BLOCK_SIZE: u64 = 256;

/// Zero-padded stratum label, stable under lexicographic sort.
pub fn stratum_label(index: usize, n_strata: usize) -> String {
    let width = (n_strata.max(2) - 1).to_string().len();
    format!("s{index:0width$}")
}

/// Zero-padded region label, stable under lexicographic sort.
pub fn region_label(index: usize, n_regions: usize) -> String {
    let width = (n_regions.max(2) - 1).to_string().len();
    format!("r{index:0width$}")
}

/// True population per (stratum, region) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruthTable {
    /// Counts indexed `[stratum][region]`.
    pub counts: Vec<Vec<u64>>,
}

impl TruthTable {
    pub fn stratum_total(&self, stratum: usize) -> u64 {
        self.counts[stratum].iter().sum()
    }

    pub fn region_total(&self, region: usize) -> u64 {
        self.counts.iter().map(|row| row[region]).sum()
    }
}

/// Draw (or copy) the per-cell true populations. Deterministic given the
/// config seed; fixed truths ignore the seed entirely.
pub fn generate_population(config: &SimConfig) -> Result<TruthTable> {
    config.validate()?;
    let key = rng::master_key(config.seed);
    let mut counts = vec![vec![0u64; config.n_regions]; config.n_strata];
    for (s, row) in counts.iter_mut().enumerate() {
        for (r, slot) in row.iter_mut().enumerate() {
            *slot = match &config.truth {
                TruthSpec::Fixed(param) => param.at(s, r),
                TruthSpec::Poisson(means) => {
                    let cell = (s * config.n_regions + r) as u64;
                    let mut rng = rng::substream(&key, rng::StreamPurpose::Truth, 0, cell);
                    Poisson::new(means.at(s, r))
                        .expect("validated mean")
                        .sample(&mut rng) as u64
                }
            };
        }
    }
    Ok(TruthTable { counts })
}

/// Census and survey observations for one replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasuredReplicate {
    pub replicate: u64,
    /// Cells in (stratum, region) index order.
    pub cells: Vec<CellCounts>,
    /// Survey inputs for estimable strata only.
    pub survey: Vec<StratumSurveyInputs>,
    /// Late-add imputations per cell (all zero without the second pool).
    pub ii_late: Vec<Vec<u64>>,
    /// Strata with no matched persons; a nonempty list makes the
    /// replicate degenerate.
    pub degenerate_strata: Vec<String>,
}

/// Simulate census capture, imputation marking, erroneous enumerations,
/// and survey matching for one replicate.
pub fn simulate_measurement(
    truth: &TruthTable,
    config: &SimConfig,
    replicate: u64,
) -> Result<MeasuredReplicate> {
    config.validate()?;
    Ok(simulate_measurement_unchecked(truth, config, replicate))
}

/// Measurement without re-validating the config; the Monte Carlo loop
/// validates once up front.
fn simulate_measurement_unchecked(
    truth: &TruthTable,
    config: &SimConfig,
    replicate: u64,
) -> MeasuredReplicate {
    let key = rng::master_key(config.seed);
    let mut cells = Vec::with_capacity(config.n_cells());
    let mut ii_late = vec![vec![0u64; config.n_regions]; config.n_strata];
    let mut matched = vec![0u64; config.n_strata];
    let mut erroneous = vec![0u64; config.n_strata];
    for (s, late_row) in ii_late.iter_mut().enumerate() {
        for (r, late_slot) in late_row.iter_mut().enumerate() {
            let t = truth.counts[s][r];
            let cell_index = (s * config.n_regions + r) as u64;
            let mut rng =
                rng::substream(&key, rng::StreamPurpose::Measurement, replicate, cell_index);

            let p = config.capture_prob.at(s, r);
            let captured = Binomial::new(t, p)
                .expect("validated rate")
                .sample(&mut rng);

            let q1 = config.ii_rate.at(s, r);
            let ii_inherent = Binomial::new(captured, q1)
                .expect("validated rate")
                .sample(&mut rng);
            let ii_late_count = match &config.ii_late_rate {
                Some(late) => {
                    let q2 = late.at(s, r) / (1.0 - q1);
                    Binomial::new(captured - ii_inherent, q2)
                        .expect("validated rate")
                        .sample(&mut rng)
                }
                None => 0,
            };
            let ii = ii_inherent + ii_late_count;

            let e = config.ee_rate.at(s, r);
            let ee = Binomial::new(t, e)
                .expect("validated rate")
                .sample(&mut rng);

            let mn = captured - ii;
            matched[s] += mn;
            erroneous[s] += ee;
            *late_slot = ii_late_count;
            cells.push(CellCounts::new(
                stratum_label(s, config.n_strata),
                region_label(r, config.n_regions),
                captured + ee,
                mn + ee,
                ii,
            ));
        }
    }

    let mut survey = Vec::with_capacity(config.n_strata);
    let mut degenerate = Vec::new();
    for s in 0..config.n_strata {
        let label = stratum_label(s, config.n_strata);
        let t_i = truth.stratum_total(s);
        if matched[s] == 0 || t_i == 0 {
            degenerate.push(label);
            continue;
        }
        survey.push(StratumSurveyInputs::new(
            label,
            matched[s],
            erroneous[s],
            matched[s] as f64 / t_i as f64,
        ));
    }

    MeasuredReplicate {
        replicate,
        cells,
        survey,
        ii_late,
        degenerate_strata: degenerate,
    }
}

/// One replicate's full record: observations plus per-formula regional
/// allocations and errors (absent when any stratum was degenerate).
#[derive(Debug, Clone, PartialEq)]
pub struct SimReplicate {
    pub seed: u64,
    pub replicate: u64,
    pub cells: Vec<CellCounts>,
    pub survey: Vec<StratumSurveyInputs>,
    pub degenerate_strata: Vec<String>,
    /// True population per cell, indexed `[stratum][region]`.
    pub truth_by_cell: Vec<Vec<u64>>,
    pub truth_by_region: BTreeMap<String, u64>,
    /// Per formula: region totals of the allocated estimates.
    pub allocations: Option<BTreeMap<FormulaKind, BTreeMap<String, f64>>>,
    /// Per formula: region totals minus region truth.
    pub errors: Option<BTreeMap<FormulaKind, BTreeMap<String, f64>>>,
}

/// Regional allocation totals for all four formulas, plus bookkeeping.
struct ReplicateAllocations {
    /// `[formula][region]` totals, formula order as in `FormulaKind::ALL`.
    by_region: Vec<Vec<f64>>,
    /// Per-cell values for the between-diagnostic: `[formula][cell]`.
    by_cell: Vec<Vec<f64>>,
    max_norm_residual: [f64; 4],
    alt2_fallbacks: u64,
    negative_allocations: [u64; 4],
}

fn allocate_replicate(
    measured: &MeasuredReplicate,
    config: &SimConfig,
) -> Result<ReplicateAllocations> {
    let estimates = estimate_strata(&measured.cells, &measured.survey)?;
    let n_regions = config.n_regions;
    let mut by_region = vec![vec![0.0; n_regions]; 4];
    let mut by_cell = vec![vec![0.0; measured.cells.len()]; 4];
    let mut max_norm_residual = [0.0f64; 4];
    let mut alt2_fallbacks = 0;
    let mut negative_allocations = [0u64; 4];
    for (f_idx, formula) in FormulaKind::ALL.into_iter().enumerate() {
        let (table, warnings) = allocate_all(&estimates, &measured.cells, formula)?;
        for warning in &warnings {
            match warning {
                AllocationWarning::Alt2NoImputations { .. } => alt2_fallbacks += 1,
                AllocationWarning::NegativeAllocation { .. } => negative_allocations[f_idx] += 1,
            }
        }
        for record in crate::estimator::check_normalization(&table, &estimates) {
            max_norm_residual[f_idx] = max_norm_residual[f_idx].max(record.residual);
        }
        for (cell_index, cell) in measured.cells.iter().enumerate() {
            let key = (cell.stratum_id.clone(), cell.region_id.clone());
            let s = table.entries[&key];
            by_cell[f_idx][cell_index] = s;
            by_region[f_idx][cell_index % n_regions] += s;
        }
    }
    Ok(ReplicateAllocations {
        by_region,
        by_cell,
        max_norm_residual,
        alt2_fallbacks,
        negative_allocations,
    })
}

/// Run one replicate end to end.
pub fn simulate_replicate(
    truth: &TruthTable,
    config: &SimConfig,
    replicate: u64,
) -> Result<SimReplicate> {
    let measured = simulate_measurement(truth, config, replicate)?;
    let truth_by_region: BTreeMap<String, u64> = (0..config.n_regions)
        .map(|r| (region_label(r, config.n_regions), truth.region_total(r)))
        .collect();
    let (allocations, errors) = if measured.degenerate_strata.is_empty() {
        let alloc = allocate_replicate(&measured, config)?;
        let mut allocations = BTreeMap::new();
        let mut errors = BTreeMap::new();
        for (f_idx, formula) in FormulaKind::ALL.into_iter().enumerate() {
            let mut totals = BTreeMap::new();
            let mut errs = BTreeMap::new();
            for r in 0..config.n_regions {
                let label = region_label(r, config.n_regions);
                let s = alloc.by_region[f_idx][r];
                totals.insert(label.clone(), s);
                errs.insert(label, s - truth.region_total(r) as f64);
            }
            allocations.insert(formula, totals);
            errors.insert(formula, errs);
        }
        (Some(allocations), Some(errors))
    } else {
        (None, None)
    };
    Ok(SimReplicate {
        seed: config.seed,
        replicate,
        cells: measured.cells,
        survey: measured.survey,
        degenerate_strata: measured.degenerate_strata,
        truth_by_cell: truth.counts.clone(),
        truth_by_region,
        allocations,
        errors,
    })
}

/// Sample moments of one cell's observed counts, over all replicates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellMoments {
    pub mean_c: f64,
    pub mean_dd: f64,
    pub mean_ii: f64,
    pub var_c: f64,
    pub var_dd: f64,
    pub var_ii: f64,
}

/// Per-region accuracy of one formula, over estimable replicates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionReport {
    pub truth: f64,
    pub mean: f64,
    pub bias: f64,
    pub mse: f64,
    pub var: f64,
    /// Monte Carlo standard error of `mean`.
    pub se_mean: f64,
}

/// One formula's regional accuracy summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FormulaReport {
    pub regions: BTreeMap<String, RegionReport>,
    pub max_norm_residual: f64,
    pub alt2_fallbacks: u64,
    pub negative_allocations: u64,
}

/// Monte Carlo report. Identical (config, seed) pairs serialize to
/// identical bytes regardless of worker count.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McReport {
    pub rng_scheme: String,
    pub seed: u64,
    pub n_reps: u64,
    pub n_estimable: u64,
    pub n_degenerate: u64,
    pub truth_by_region: BTreeMap<String, f64>,
    pub truth_by_cell: BTreeMap<String, BTreeMap<String, f64>>,
    /// Observed-count moments per stratum, then region (all replicates).
    pub cells: BTreeMap<String, BTreeMap<String, CellMoments>>,
    pub ce_mean_by_stratum: BTreeMap<String, f64>,
    pub ce_var_by_stratum: BTreeMap<String, f64>,
    /// Mean late-add imputations per cell; present only in two-pool runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub late_mean_by_cell: Option<BTreeMap<String, BTreeMap<String, f64>>>,
    /// Keyed by formula name (estimable replicates only).
    pub formulas: BTreeMap<String, FormulaReport>,
    /// Fraction of (replicate, cell) pairs where the census-bureau value
    /// lies weakly between the alt1 and alt2 values.
    pub cb_between_fraction: f64,
    /// Region, then formula: count of replicates where that formula had
    /// the smallest absolute regional error (first of ties in formula
    /// order).
    pub winners: BTreeMap<String, BTreeMap<String, u64>>,
}

/// Fixed-shape accumulator; merging in block order keeps reduction
/// deterministic.
struct Accum {
    n_estimable: u64,
    n_degenerate: u64,
    cell_sum: Vec<[f64; 3]>,
    cell_sumsq: Vec<[f64; 3]>,
    late_sum: Vec<f64>,
    ce_sum: Vec<f64>,
    ce_sumsq: Vec<f64>,
    alloc_sum: Vec<Vec<f64>>,
    alloc_sumsq: Vec<Vec<f64>>,
    wins: Vec<Vec<u64>>,
    max_norm_residual: [f64; 4],
    alt2_fallbacks: u64,
    negative_allocations: [u64; 4],
    cb_between_hits: u64,
    cb_between_total: u64,
}

impl Accum {
    fn new(n_strata: usize, n_regions: usize) -> Self {
        let n_cells = n_strata * n_regions;
        Self {
            n_estimable: 0,
            n_degenerate: 0,
            cell_sum: vec![[0.0; 3]; n_cells],
            cell_sumsq: vec![[0.0; 3]; n_cells],
            late_sum: vec![0.0; n_cells],
            ce_sum: vec![0.0; n_strata],
            ce_sumsq: vec![0.0; n_strata],
            alloc_sum: vec![vec![0.0; n_regions]; 4],
            alloc_sumsq: vec![vec![0.0; n_regions]; 4],
            wins: vec![vec![0; n_regions]; 4],
            max_norm_residual: [0.0; 4],
            alt2_fallbacks: 0,
            negative_allocations: [0; 4],
            cb_between_hits: 0,
            cb_between_total: 0,
        }
    }

    fn add_replicate(
        &mut self,
        measured: &MeasuredReplicate,
        alloc: Option<&ReplicateAllocations>,
        truth: &TruthTable,
        config: &SimConfig,
    ) {
        for (i, cell) in measured.cells.iter().enumerate() {
            let values = [cell.c as f64, cell.dd as f64, cell.ii as f64];
            for (j, v) in values.into_iter().enumerate() {
                self.cell_sum[i][j] += v;
                self.cell_sumsq[i][j] += v * v;
            }
        }
        for (s, row) in measured.ii_late.iter().enumerate() {
            for (r, &late) in row.iter().enumerate() {
                self.late_sum[s * config.n_regions + r] += late as f64;
            }
        }
        for survey in &measured.survey {
            // Survey entries carry labels; recover the index from order:
            // entries are pushed in stratum order, but degenerate strata
            // are skipped, so match on the label.
            let idx = label_index(&survey.stratum_id);
            self.ce_sum[idx] += survey.ce as f64;
            self.ce_sumsq[idx] += (survey.ce as f64) * (survey.ce as f64);
        }
        match alloc {
            None => self.n_degenerate += 1,
            Some(alloc) => {
                self.n_estimable += 1;
                for f in 0..4 {
                    for r in 0..config.n_regions {
                        let s = alloc.by_region[f][r];
                        self.alloc_sum[f][r] += s;
                        self.alloc_sumsq[f][r] += s * s;
                    }
                    self.max_norm_residual[f] =
                        self.max_norm_residual[f].max(alloc.max_norm_residual[f]);
                    self.negative_allocations[f] += alloc.negative_allocations[f];
                }
                self.alt2_fallbacks += alloc.alt2_fallbacks;
                for r in 0..config.n_regions {
                    let t = truth.region_total(r) as f64;
                    let mut best = 0usize;
                    let mut best_err = f64::INFINITY;
                    for f in 0..4 {
                        let err = (alloc.by_region[f][r] - t).abs();
                        if err < best_err {
                            best_err = err;
                            best = f;
                        }
                    }
                    self.wins[best][r] += 1;
                }
                for cell_index in 0..measured.cells.len() {
                    let cb = alloc.by_cell[0][cell_index];
                    let a1 = alloc.by_cell[1][cell_index];
                    let a2 = alloc.by_cell[2][cell_index];
                    self.cb_between_total += 1;
                    if (cb - a1) * (cb - a2) <= 0.0 {
                        self.cb_between_hits += 1;
                    }
                }
            }
        }
    }

    fn merge(&mut self, other: &Accum) {
        self.n_estimable += other.n_estimable;
        self.n_degenerate += other.n_degenerate;
        for (a, b) in self.cell_sum.iter_mut().zip(&other.cell_sum) {
            for j in 0..3 {
                a[j] += b[j];
            }
        }
        for (a, b) in self.cell_sumsq.iter_mut().zip(&other.cell_sumsq) {
            for j in 0..3 {
                a[j] += b[j];
            }
        }
        for (a, b) in self.late_sum.iter_mut().zip(&other.late_sum) {
            *a += b;
        }
        for (a, b) in self.ce_sum.iter_mut().zip(&other.ce_sum) {
            *a += b;
        }
        for (a, b) in self.ce_sumsq.iter_mut().zip(&other.ce_sumsq) {
            *a += b;
        }
        for f in 0..4 {
            for r in 0..self.alloc_sum[f].len() {
                self.alloc_sum[f][r] += other.alloc_sum[f][r];
                self.alloc_sumsq[f][r] += other.alloc_sumsq[f][r];
                self.wins[f][r] += other.wins[f][r];
            }
            self.max_norm_residual[f] = self.max_norm_residual[f].max(other.max_norm_residual[f]);
            self.negative_allocations[f] += other.negative_allocations[f];
        }
        self.alt2_fallbacks += other.alt2_fallbacks;
        self.cb_between_hits += other.cb_between_hits;
        self.cb_between_total += other.cb_between_total;
    }
}

/// Recover the numeric index from a generated label like `s03` or `r12`.
fn label_index(label: &str) -> usize {
    label[1..].parse().expect("generated label")
}

fn run_block(truth: &TruthTable, config: &SimConfig, from: u64, to: u64) -> Result<Accum> {
    let mut accum = Accum::new(config.n_strata, config.n_regions);
    for replicate in from..to {
        let measured = simulate_measurement_unchecked(truth, config, replicate);
        if measured.degenerate_strata.is_empty() {
            let alloc = allocate_replicate(&measured, config)?;
            accum.add_replicate(&measured, Some(&alloc), truth, config);
        } else {
            accum.add_replicate(&measured, None, truth, config);
        }
    }
    Ok(accum)
}

/// Run the full Monte Carlo experiment.
///
/// `workers` threads split the replicate range into fixed blocks; the
/// report is bit-identical for any worker count.
pub fn run_monte_carlo(config: &SimConfig, workers: usize) -> Result<McReport> {
    config.validate()?;
    let truth = generate_population(config)?;
    let n_blocks = config.n_reps.div_ceil(BLOCK_SIZE);
    let workers = workers.max(1).min(n_blocks as usize);

    let block_results: Mutex<Vec<Option<Result<Accum>>>> =
        Mutex::new((0..n_blocks).map(|_| None).collect());
    let next_block = AtomicU64::new(0);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let block = next_block.fetch_add(1, Ordering::Relaxed);
                if block >= n_blocks {
                    break;
                }
                let from = block * BLOCK_SIZE;
                let to = (from + BLOCK_SIZE).min(config.n_reps);
                let result = run_block(&truth, config, from, to);
                block_results.lock().expect("poisoned")[block as usize] = Some(result);
            });
        }
    });

    let mut total = Accum::new(config.n_strata, config.n_regions);
    for slot in block_results.into_inner().expect("poisoned") {
        let accum = slot.expect("all blocks dispatched")?;
        total.merge(&accum);
    }
    Ok(build_report(config, &truth, &total))
}

fn build_report(config: &SimConfig, truth: &TruthTable, total: &Accum) -> McReport {
    let n = config.n_reps as f64;
    let n_est = total.n_estimable as f64;
    let mut truth_by_region = BTreeMap::new();
    for r in 0..config.n_regions {
        truth_by_region.insert(
            region_label(r, config.n_regions),
            truth.region_total(r) as f64,
        );
    }
    let mut truth_by_cell = BTreeMap::new();
    let mut cells = BTreeMap::new();
    let mut late_mean = BTreeMap::new();
    for s in 0..config.n_strata {
        let s_label = stratum_label(s, config.n_strata);
        let mut truth_row = BTreeMap::new();
        let mut cell_row = BTreeMap::new();
        let mut late_row = BTreeMap::new();
        for r in 0..config.n_regions {
            let r_label = region_label(r, config.n_regions);
            let i = s * config.n_regions + r;
            truth_row.insert(r_label.clone(), truth.counts[s][r] as f64);
            let mean = |j: usize| total.cell_sum[i][j] / n;
            let var = |j: usize| sample_var(total.cell_sum[i][j], total.cell_sumsq[i][j], n);
            cell_row.insert(
                r_label.clone(),
                CellMoments {
                    mean_c: mean(0),
                    mean_dd: mean(1),
                    mean_ii: mean(2),
                    var_c: var(0),
                    var_dd: var(1),
                    var_ii: var(2),
                },
            );
            late_row.insert(r_label, total.late_sum[i] / n);
        }
        truth_by_cell.insert(s_label.clone(), truth_row);
        cells.insert(s_label.clone(), cell_row);
        late_mean.insert(s_label, late_row);
    }
    let ce_mean_by_stratum = (0..config.n_strata)
        .map(|s| (stratum_label(s, config.n_strata), total.ce_sum[s] / n))
        .collect();
    let ce_var_by_stratum = (0..config.n_strata)
        .map(|s| {
            (
                stratum_label(s, config.n_strata),
                sample_var(total.ce_sum[s], total.ce_sumsq[s], n),
            )
        })
        .collect();

    let mut formulas = BTreeMap::new();
    let mut winners: BTreeMap<String, BTreeMap<String, u64>> = BTreeMap::new();
    if total.n_estimable > 0 {
        for (f_idx, formula) in FormulaKind::ALL.into_iter().enumerate() {
            let mut regions = BTreeMap::new();
            for r in 0..config.n_regions {
                let label = region_label(r, config.n_regions);
                let t = truth.region_total(r) as f64;
                let sum = total.alloc_sum[f_idx][r];
                let sumsq = total.alloc_sumsq[f_idx][r];
                let mean = sum / n_est;
                let var = sample_var(sum, sumsq, n_est);
                // E[(S - t)^2] from the raw moments.
                let mse = sumsq / n_est - 2.0 * t * mean + t * t;
                regions.insert(
                    label.clone(),
                    RegionReport {
                        truth: t,
                        mean,
                        bias: mean - t,
                        mse,
                        var,
                        se_mean: (var / n_est).sqrt(),
                    },
                );
                winners
                    .entry(label)
                    .or_default()
                    .insert(formula.as_str().to_string(), total.wins[f_idx][r]);
            }
            formulas.insert(
                formula.as_str().to_string(),
                FormulaReport {
                    regions,
                    max_norm_residual: total.max_norm_residual[f_idx],
                    alt2_fallbacks: if formula == FormulaKind::Alt2 {
                        total.alt2_fallbacks
                    } else {
                        0
                    },
                    negative_allocations: total.negative_allocations[f_idx],
                },
            );
        }
    }

    McReport {
        rng_scheme: RNG_SCHEME.to_string(),
        seed: config.seed,
        n_reps: config.n_reps,
        n_estimable: total.n_estimable,
        n_degenerate: total.n_degenerate,
        truth_by_region,
        truth_by_cell,
        cells,
        ce_mean_by_stratum,
        ce_var_by_stratum,
        late_mean_by_cell: config.ii_late_rate.as_ref().map(|_| late_mean),
        formulas,
        cb_between_fraction: if total.cb_between_total > 0 {
            total.cb_between_hits as f64 / total.cb_between_total as f64
        } else {
            0.0
        },
        winners,
    }
}

fn sample_var(sum: f64, sumsq: f64, n: f64) -> f64 {
    if n < 2.0 {
        return 0.0;
    }
    ((sumsq - sum * sum / n) / (n - 1.0)).max(0.0)
}
