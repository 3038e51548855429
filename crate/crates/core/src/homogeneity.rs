//! Tests of the stochastic-homogeneity (synthetic) assumption for
//! imputations within post-strata.
//!
//! The exact equality condition checks `II_k / II = C_k / C` per region by
//! integer cross-multiplication. The statistical test is a Pearson
//! chi-square of homogeneity on each stratum's 2 x K table of imputed
//! versus data-defined counts, summed across strata for a combined
//! statistic. The upper-tail probability comes from the regularized
//! incomplete gamma function implemented below.

use serde::Serialize;

use crate::error::{DseError, Result};
use crate::estimator::group_by_stratum;
use crate::model::CellCounts;

/// Result of the exact proportionality check for one stratum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EqualityCheck {
    /// True iff `II_k * C = C_k * II` for every region (exact integers).
    pub holds: bool,
    /// Max over regions of `|II_k / II - C_k / C|`; absent when the
    /// stratum has no imputations (vacuous homogeneity).
    pub max_deviation: Option<f64>,
}

/// Check whether imputations are distributed exactly in proportion to
/// census counts within one stratum.
pub fn equality_condition(cells: &[CellCounts]) -> Result<EqualityCheck> {
    if cells.is_empty() {
        return Err(DseError::EmptyInput("cells"));
    }
    let c_i: u64 = cells.iter().map(|c| c.c).sum();
    let ii_i: u64 = cells.iter().map(|c| c.ii).sum();
    if c_i == 0 {
        return Err(DseError::DegenerateStratum {
            stratum: cells[0].stratum_id.clone(),
            c: 0,
            dd: 0,
        });
    }
    let holds = cells
        .iter()
        .all(|cell| (cell.ii as u128) * (c_i as u128) == (cell.c as u128) * (ii_i as u128));
    let max_deviation = (ii_i > 0).then(|| {
        cells
            .iter()
            .map(|cell| (cell.ii as f64 / ii_i as f64 - cell.c as f64 / c_i as f64).abs())
            .fold(0.0, f64::max)
    });
    Ok(EqualityCheck {
        holds,
        max_deviation,
    })
}

/// Per-stratum Pearson statistic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StratumChiSquare {
    pub stratum_id: String,
    pub statistic: f64,
    pub df: u64,
    pub p_value: f64,
    /// Set when any expected cell count falls below 5; the stratum is
    /// still included in the combined statistic.
    pub low_expected: bool,
}

/// A stratum excluded from testing, with the failed precondition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExcludedStratum {
    pub stratum_id: String,
    pub reason: String,
}

/// Combined statistic over all tested strata.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CombinedChiSquare {
    pub statistic: f64,
    pub df: u64,
    pub p_value: f64,
}

/// Full homogeneity-test output: per-stratum statistics, the combined
/// test, and the list of excluded strata.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomogeneityResult {
    pub per_stratum: Vec<StratumChiSquare>,
    pub combined: Option<CombinedChiSquare>,
    pub excluded: Vec<ExcludedStratum>,
}

impl HomogeneityResult {
    /// The tested stratum with the smallest p-value.
    pub fn worst_stratum(&self) -> Option<&StratumChiSquare> {
        self.per_stratum
            .iter()
            .min_by(|a, b| a.p_value.partial_cmp(&b.p_value).expect("non-NaN p"))
    }
}

/// Pearson chi-square test of imputation homogeneity, per stratum and
/// combined.
///
/// For each stratum the observed 2 x K table holds imputed and
/// data-defined counts by region; expected counts are `C_k * II / C` and
/// `C_k * DD / C`, with K counting regions of nonzero census count and
/// df = K - 1. Strata failing the preconditions (at least two such
/// regions, `II > 0`, `DD > 0`) are excluded and listed.
pub fn chi_square_homogeneity(cells: &[CellCounts]) -> Result<HomogeneityResult> {
    if cells.is_empty() {
        return Err(DseError::EmptyInput("cells"));
    }
    let mut per_stratum = Vec::new();
    let mut excluded = Vec::new();
    for (stratum_id, cells) in group_by_stratum(cells) {
        let occupied: Vec<&CellCounts> = cells.iter().filter(|c| c.c > 0).collect();
        let c_i: u64 = occupied.iter().map(|c| c.c).sum();
        let dd_i: u64 = occupied.iter().map(|c| c.dd).sum();
        let ii_i: u64 = occupied.iter().map(|c| c.ii).sum();
        let k = occupied.len();
        if k < 2 {
            excluded.push(ExcludedStratum {
                stratum_id,
                reason: format!("{k} region(s) with nonzero census count (need at least 2)"),
            });
            continue;
        }
        if ii_i == 0 || dd_i == 0 {
            excluded.push(ExcludedStratum {
                stratum_id,
                reason: format!("II = {ii_i}, DD = {dd_i} (both must be positive)"),
            });
            continue;
        }
        let ii_rate = ii_i as f64 / c_i as f64;
        let dd_rate = dd_i as f64 / c_i as f64;
        let mut statistic = 0.0;
        let mut low_expected = false;
        for cell in &occupied {
            let exp_ii = cell.c as f64 * ii_rate;
            let exp_dd = cell.c as f64 * dd_rate;
            if exp_ii < 5.0 || exp_dd < 5.0 {
                low_expected = true;
            }
            let d_ii = cell.ii as f64 - exp_ii;
            let d_dd = cell.dd as f64 - exp_dd;
            statistic += d_ii * d_ii / exp_ii + d_dd * d_dd / exp_dd;
        }
        let df = (k - 1) as u64;
        per_stratum.push(StratumChiSquare {
            stratum_id,
            statistic,
            df,
            p_value: chi_square_sf(statistic, df)?,
            low_expected,
        });
    }
    let combined = if per_stratum.is_empty() {
        None
    } else {
        let statistic: f64 = per_stratum.iter().map(|s| s.statistic).sum();
        let df: u64 = per_stratum.iter().map(|s| s.df).sum();
        Some(CombinedChiSquare {
            statistic,
            df,
            p_value: chi_square_sf(statistic, df)?,
        })
    };
    Ok(HomogeneityResult {
        per_stratum,
        combined,
        excluded,
    })
}

/// Upper-tail probability of the chi-square distribution:
/// `P(X > x)` for `X ~ chi-square(df)`.
///
/// Computed as the regularized upper incomplete gamma function
/// `Q(df/2, x/2)`; accurate to about 1e-10 absolute through df = 10^4.
pub fn chi_square_sf(x: f64, df: u64) -> Result<f64> {
    if df == 0 {
        return Err(DseError::InvalidDf);
    }
    if x < 0.0 {
        return Err(DseError::NegativeStatistic(x));
    }
    Ok(reg_gamma_q(df as f64 / 2.0, x / 2.0))
}

/// Natural log of the gamma function for positive arguments.
///
/// Stirling's series with Bernoulli terms for arguments at or above 8;
/// smaller arguments are lifted with the recurrence
/// `ln G(x) = ln G(x + 1) - ln x`.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0, "ln_gamma domain is x > 0");
    let mut shift = 0.0;
    let mut x = x;
    while x < 8.0 {
        shift -= x.ln();
        x += 1.0;
    }
    const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_7;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // Bernoulli coefficients B_2n / (2n (2n - 1)).
    let series = inv
        * (1.0 / 12.0
            + inv2
                * (-1.0 / 360.0
                    + inv2
                        * (1.0 / 1260.0
                            + inv2
                                * (-1.0 / 1680.0
                                    + inv2 * (1.0 / 1188.0 + inv2 * (-691.0 / 360_360.0))))));
    (x - 0.5) * x.ln() - x + HALF_LN_TWO_PI + series + shift
}

/// Regularized upper incomplete gamma function `Q(a, x)`.
///
/// Series expansion of `P(a, x)` for `x < a + 1`, Lentz continued
/// fraction for `Q(a, x)` otherwise.
fn reg_gamma_q(a: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0 && x >= 0.0);
    if x == 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - lower_series(a, x)
    } else {
        upper_continued_fraction(a, x)
    }
}

const GAMMA_EPS: f64 = 1e-16;
const GAMMA_MAX_ITER: usize = 100_000;

/// `P(a, x)` by the power series, valid for `x < a + 1`.
fn lower_series(a: f64, x: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut n = 1.0;
    for _ in 0..GAMMA_MAX_ITER {
        term *= x / (a + n);
        sum += term;
        if term.abs() < sum.abs() * GAMMA_EPS {
            break;
        }
        n += 1.0;
    }
    sum * scale_factor(a, x)
}

/// `Q(a, x)` by the Lentz continued fraction, valid for `x >= a + 1`.
fn upper_continued_fraction(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..GAMMA_MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < GAMMA_EPS {
            break;
        }
    }
    scale_factor(a, x) * h
}

/// `exp(-x + a ln x - ln G(a))`, the common prefactor. Underflows cleanly
/// to zero for extreme statistics.
fn scale_factor(a: f64, x: f64) -> f64 {
    (-x + a * x.ln() - ln_gamma(a)).exp()
}
