//! Shared generators for the benchmark suite: deterministic synthetic
//! strata and scenario batches sized like census workloads.

use syndse_core::estimator::{correction_factors, dse};
use syndse_core::model::{CellCounts, StratumEstimate, TwoStateScenario};

/// A stratum of `n_regions` cells with pseudo-random but fixed counts.
pub fn synthetic_stratum(stratum: &str, n_regions: usize) -> (StratumEstimate, Vec<CellCounts>) {
    let mut state = 0x9e37_79b9_u64 ^ stratum.len() as u64;
    let mut next = move || {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        state >> 33
    };
    let cells: Vec<CellCounts> = (0..n_regions)
        .map(|k| {
            let dd = 1_000 + next() % 1_000_000;
            let ii = next() % 50_000;
            CellCounts::new(stratum, format!("r{k:03}"), dd + ii, dd, ii)
        })
        .collect();
    let dd_i: u64 = cells.iter().map(|c| c.dd).sum();
    let c_i: u64 = cells.iter().map(|c| c.c).sum();
    let estimate = dse(dd_i, 0.96, 0.9, stratum).unwrap();
    let (ccf, dcf) = correction_factors(estimate, c_i, dd_i, stratum).unwrap();
    (
        StratumEstimate {
            stratum_id: stratum.to_string(),
            dse: estimate,
            ccf,
            dcf,
        },
        cells,
    )
}

/// A batch of equal-size two-state scenarios spanning the decision-rule
/// branches.
pub fn scenario_batch(n: usize) -> Vec<TwoStateScenario> {
    (0..n)
        .map(|i| {
            let i = i as u64;
            TwoStateScenario::equal_size(
                10_000 + 97 * i,
                (13 * i) % 400,
                (29 * i) % 400,
                2_000,
                1_900,
                (7 * i) % 300,
                (17 * i) % 300,
            )
        })
        .collect()
}
