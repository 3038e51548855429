//! Two-state squared-error comparison of CCF- versus DCF-based synthetic
//! allocation for a single post-stratum.
//!
//! A [`TwoStateScenario`] carries the ten observable counts. Taking the
//! per-state value `S_t = CE * NN / MN` as truth, the synthetic estimates
//! allocate the two-state total in proportion to census counts
//! (`CE + EE + II`, the CCF route) or data-defined counts (`CE + EE`, the
//! DCF route). The closed-form comparison assumes the two states are equal
//! in size; [`delta_comparison_general`] evaluates everything from the
//! definitions and also covers size-ratio (lambda-scaled) scenarios.
//!
//! The sign of the exact difference is computed from cross-multiplied
//! integer numerators, so the exact-regime rules (equal erroneous counts
//! favor DCF, equal imputation counts favor CCF) hold without roundoff
//! exceptions.

use serde::Serialize;

use crate::error::{DseError, Result};
use crate::model::TwoStateScenario;

/// Which coverage factor drives a synthetic allocation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Factor {
    Ccf,
    Dcf,
}

/// Outcome of a squared-error comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Winner {
    Ccf,
    Dcf,
    Tie,
}

impl std::fmt::Display for Winner {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Winner::Ccf => "ccf",
            Winner::Dcf => "dcf",
            Winner::Tie => "tie",
        })
    }
}

/// Per-state true values `CE_i * NN_i / MN_i`.
pub fn true_dse(scenario: &TwoStateScenario) -> Result<(f64, f64)> {
    scenario.validate()?;
    let s1 = scenario.ce1 as f64 * scenario.nn1 as f64 / scenario.mn1 as f64;
    let s2 = scenario.ce2 as f64 * scenario.nn2 as f64 / scenario.mn2 as f64;
    Ok((s1, s2))
}

/// Exact test that the two per-state true values coincide:
/// `CE1 * NN1 * MN2 == CE2 * NN2 * MN1` over the integers.
fn true_values_equal(s: &TwoStateScenario) -> bool {
    (s.ce1 as u128) * (s.nn1 as u128) * (s.mn2 as u128)
        == (s.ce2 as u128) * (s.nn2 as u128) * (s.mn1 as u128)
}

/// Synthetic per-state estimates that split the two-state total `2S`
/// proportionally to census counts (CCF) or data-defined counts (DCF).
///
/// Requires the per-state true values to coincide; scenarios where they
/// differ are rejected, since the closed forms assume a common `S`.
pub fn synthetic_pair(scenario: &TwoStateScenario, factor: Factor) -> Result<(f64, f64)> {
    scenario.validate()?;
    if !true_values_equal(scenario) {
        return Err(DseError::UnequalTrueDse);
    }
    let s = scenario.ce1 as f64 * scenario.nn1 as f64 / scenario.mn1 as f64;
    let (w1, w2) = match factor {
        Factor::Ccf => (
            scenario.ce1 + scenario.ee1 + scenario.ii1,
            scenario.ce2 + scenario.ee2 + scenario.ii2,
        ),
        Factor::Dcf => (scenario.ce1 + scenario.ee1, scenario.ce2 + scenario.ee2),
    };
    let total = w1 + w2;
    if total == 0 {
        return Err(DseError::ZeroScenarioCount(match factor {
            Factor::Ccf => "CE + EE + II",
            Factor::Dcf => "CE + EE",
        }));
    }
    let double_s = 2.0 * s;
    Ok((
        w1 as f64 / total as f64 * double_s,
        w2 as f64 / total as f64 * double_s,
    ))
}

/// Full squared-error comparison of the two routes for one scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaComparison {
    pub scenario: TwoStateScenario,
    /// Common per-state true value.
    pub s_true: f64,
    /// CCF-route synthetic pair.
    pub s_c: (f64, f64),
    /// DCF-route synthetic pair.
    pub s_d: (f64, f64),
    /// Squared error of the CCF pair against truth.
    pub delta_c: f64,
    /// Squared error of the DCF pair against truth.
    pub delta_d: f64,
    /// `delta_d - delta_c` from the factored closed form (sign exact).
    pub diff_exact: f64,
    /// `delta_d - delta_c` by direct subtraction of the squared errors.
    pub diff_definitional: f64,
    /// Large-CE approximation of the difference.
    pub diff_approx: f64,
    pub predicted_winner: Winner,
    pub actual_winner: Winner,
}

/// Internal guard: the two routes must agree to this relative tolerance
/// (scaled by the squared-error magnitude) or the algebra is wrong.
const ALGEBRA_GUARD: f64 = 1e-6;

/// Compare the squared errors of the CCF and DCF routes.
///
/// The closed form and the direct subtraction are both computed and must
/// agree; the exact difference used for the verdict comes from the
/// factored closed form, whose sign is determined by integer
/// cross-products.
pub fn delta_comparison(scenario: &TwoStateScenario) -> Result<DeltaComparison> {
    let s_c = synthetic_pair(scenario, Factor::Ccf)?;
    let s_d = synthetic_pair(scenario, Factor::Dcf)?;
    let s = scenario.ce1 as f64 * scenario.nn1 as f64 / scenario.mn1 as f64;

    let delta_c = (s_c.0 - s).powi(2) + (s_c.1 - s).powi(2);
    let delta_d = (s_d.0 - s).powi(2) + (s_d.1 - s).powi(2);
    let diff_definitional = delta_d - delta_c;

    // Closed form: delta_d - delta_c = 2 S^2 (a^2 - b^2) with
    //   a = (DD1 - DD2) / (DD1 + DD2),  b = (C1 - C2) / (C1 + C2),
    // factored as 2 S^2 (a + b)(a - b). Cross-multiplied numerators are
    // exact in i128, so the sign and ties are exact. With equal state
    // sizes the numerators reduce to (EE1 - EE2) and
    // (EE1 + II1 - EE2 - II2).
    let dd1 = (scenario.ce1 + scenario.ee1) as i128;
    let dd2 = (scenario.ce2 + scenario.ee2) as i128;
    let c1 = dd1 + scenario.ii1 as i128;
    let c2 = dd2 + scenario.ii2 as i128;
    let t_d = dd1 + dd2;
    let t_c = c1 + c2;
    let nd = dd1 - dd2;
    let nc = c1 - c2;
    // a - b and a + b share the denominator t_d * t_c.
    let diff_num = nd * t_c - nc * t_d;
    let sum_num = nd * t_c + nc * t_d;
    let denom = t_d as f64 * t_c as f64;
    let diff_exact = 2.0 * s * s * (sum_num as f64 * diff_num as f64) / (denom * denom);

    let scale = delta_c.max(delta_d).max(f64::MIN_POSITIVE);
    if (diff_exact - diff_definitional).abs() > ALGEBRA_GUARD * scale {
        return Err(DseError::AlgebraMismatch {
            closed: diff_exact,
            direct: diff_definitional,
        });
    }

    // IEEE multiplication and division preserve sign exactly, so the
    // float's sign equals the sign of the integer product whenever the
    // true value is nonzero; degenerate scenarios with S = 0 tie.
    let actual_winner = if diff_exact > 0.0 {
        Winner::Ccf
    } else if diff_exact < 0.0 {
        Winner::Dcf
    } else {
        Winner::Tie
    };

    Ok(DeltaComparison {
        scenario: *scenario,
        s_true: s,
        s_c,
        s_d,
        delta_c,
        delta_d,
        diff_exact,
        diff_definitional,
        diff_approx: diff_approx(scenario, s),
        predicted_winner: decision_rule(scenario, 1.0),
        actual_winner,
    })
}

/// Large-CE approximation of `delta_d - delta_c` for equal-size
/// scenarios: dropping EE and II against CE in the denominators turns the
/// factored difference into
/// `-2 S^2 (4 CE1 dEE + 2 CE1 dII)(2 CE1 dII) / ((2 CE1 + EE1 + EE2)^2 (2 CE1 + EE1 + EE2 + II1 + II2)^2)`.
fn diff_approx(scenario: &TwoStateScenario, s: f64) -> f64 {
    let ce1 = scenario.ce1 as f64;
    let d_ee = scenario.ee1 as f64 - scenario.ee2 as f64;
    let d_ii = scenario.ii1 as f64 - scenario.ii2 as f64;
    let t_d = 2.0 * ce1 + scenario.ee1 as f64 + scenario.ee2 as f64;
    let t_c = t_d + scenario.ii1 as f64 + scenario.ii2 as f64;
    -2.0 * s * s * (4.0 * ce1 * d_ee + 2.0 * ce1 * d_ii) * (2.0 * ce1 * d_ii)
        / (t_d * t_d * t_c * t_c)
}

/// Predicted winner under the large-CE decision rules.
///
/// With `dEE = lambda * EE1 - EE2` and `dII = lambda * II1 - II2`:
/// equal scaled erroneous counts favor DCF, equal scaled imputation
/// counts favor CCF; when both differ, DCF wins if both move the same way
/// or the erroneous shortfall is at most half the opposing imputation
/// gap. Cases with `dEE < 0` follow by relabeling the two states, which
/// leaves the squared-error difference unchanged. Intended for the
/// regime where CE dominates EE and II.
///
/// The branch layout mirrors the published rule list case by case.
#[allow(clippy::if_same_then_else)]
pub fn decision_rule(scenario: &TwoStateScenario, lambda: f64) -> Winner {
    let d_ee = lambda * scenario.ee1 as f64 - scenario.ee2 as f64;
    let d_ii = lambda * scenario.ii1 as f64 - scenario.ii2 as f64;
    if d_ee == 0.0 && d_ii == 0.0 {
        return Winner::Tie;
    }
    if d_ee == 0.0 {
        return Winner::Dcf;
    }
    if d_ii == 0.0 {
        return Winner::Ccf;
    }
    if d_ee > 0.0 {
        if d_ii > 0.0 {
            Winner::Dcf
        } else if d_ee <= -d_ii / 2.0 {
            Winner::Dcf
        } else {
            Winner::Ccf
        }
    } else if d_ii < 0.0 {
        Winner::Dcf
    } else if -d_ee <= d_ii / 2.0 {
        Winner::Dcf
    } else {
        Winner::Ccf
    }
}

/// Definitional comparison without the equal-size assumption.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneralDelta {
    pub s_true: (f64, f64),
    pub s_c: (f64, f64),
    pub s_d: (f64, f64),
    pub delta_c: f64,
    pub delta_d: f64,
    pub diff: f64,
}

/// Evaluate both routes directly from the definitions: the pooled
/// coverage factors are applied to per-state census and data-defined
/// counts, and squared errors are taken against the per-state true
/// values. Covers lambda-scaled scenarios where the closed form does not
/// apply.
pub fn delta_comparison_general(scenario: &TwoStateScenario) -> Result<GeneralDelta> {
    let (s1, s2) = true_dse(scenario)?;
    let dd1 = (scenario.ce1 + scenario.ee1) as f64;
    let dd2 = (scenario.ce2 + scenario.ee2) as f64;
    let c1 = dd1 + scenario.ii1 as f64;
    let c2 = dd2 + scenario.ii2 as f64;
    if c1 + c2 == 0.0 {
        return Err(DseError::ZeroScenarioCount("CE + EE + II"));
    }
    if dd1 + dd2 == 0.0 {
        return Err(DseError::ZeroScenarioCount("CE + EE"));
    }
    let ce_total = (scenario.ce1 + scenario.ce2) as f64;
    let nn_over_mn = (scenario.nn1 + scenario.nn2) as f64 / (scenario.mn1 + scenario.mn2) as f64;
    let ccf = ce_total / (c1 + c2) * nn_over_mn;
    let dcf = ce_total / (dd1 + dd2) * nn_over_mn;
    let s_c = (c1 * ccf, c2 * ccf);
    let s_d = (dd1 * dcf, dd2 * dcf);
    let delta_c = (s_c.0 - s1).powi(2) + (s_c.1 - s2).powi(2);
    let delta_d = (s_d.0 - s1).powi(2) + (s_d.1 - s2).powi(2);
    Ok(GeneralDelta {
        s_true: (s1, s2),
        s_c,
        s_d,
        delta_c,
        delta_d,
        diff: delta_d - delta_c,
    })
}

/// Winner frequencies split by post-stratum size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FrequencyTable {
    /// Correct-enumeration total at or above which a scenario counts as
    /// large.
    pub threshold: u64,
    pub small_ccf: u64,
    pub small_dcf: u64,
    pub large_ccf: u64,
    pub large_dcf: u64,
    /// Exact ties, excluded from the four cells.
    pub ties: u64,
}

impl FrequencyTable {
    pub fn total_small(&self) -> u64 {
        self.small_ccf + self.small_dcf
    }

    pub fn total_large(&self) -> u64 {
        self.large_ccf + self.large_dcf
    }

    pub fn total_ccf(&self) -> u64 {
        self.small_ccf + self.large_ccf
    }

    pub fn total_dcf(&self) -> u64 {
        self.small_dcf + self.large_dcf
    }

    pub fn total(&self) -> u64 {
        self.total_small() + self.total_large()
    }
}

/// Tabulate actual winners by post-stratum size.
pub fn empirical_frequency(comparisons: &[DeltaComparison], size_threshold: u64) -> FrequencyTable {
    let mut table = FrequencyTable {
        threshold: size_threshold,
        small_ccf: 0,
        small_dcf: 0,
        large_ccf: 0,
        large_dcf: 0,
        ties: 0,
    };
    for comparison in comparisons {
        let large = comparison.scenario.ce_total() >= size_threshold;
        match (comparison.actual_winner, large) {
            (Winner::Tie, _) => table.ties += 1,
            (Winner::Ccf, false) => table.small_ccf += 1,
            (Winner::Dcf, false) => table.small_dcf += 1,
            (Winner::Ccf, true) => table.large_ccf += 1,
            (Winner::Dcf, true) => table.large_dcf += 1,
        }
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Scenario with equal erroneous counts and imputations concentrated
    /// in state 1; the DCF route is error-free here.
    fn scenario_equal_ee() -> TwoStateScenario {
        TwoStateScenario::equal_size(1000, 10, 10, 500, 500, 20, 0)
    }

    /// Scenario with equal imputations and erroneous counts concentrated
    /// in state 1; the CCF route wins here.
    fn scenario_equal_ii() -> TwoStateScenario {
        TwoStateScenario::equal_size(1000, 20, 0, 500, 500, 10, 10)
    }

    #[test]
    fn true_dse_examples() {
        let s = TwoStateScenario::equal_size(1000, 0, 0, 500, 500, 0, 0);
        assert_eq!(true_dse(&s).unwrap(), (1000.0, 1000.0));

        let mut s = TwoStateScenario::equal_size(1000, 0, 0, 500, 600, 0, 0);
        s.mn2 = 500;
        s.nn2 = 600;
        let (s1, s2) = true_dse(&s).unwrap();
        assert_eq!(s1, 1200.0);
        assert_eq!(s2, 1200.0);

        let sym = scenario_equal_ee();
        let (a, b) = true_dse(&sym).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn synthetic_pair_hand_values() {
        let s = scenario_equal_ee();
        let dcf = synthetic_pair(&s, Factor::Dcf).unwrap();
        assert_eq!(dcf, (1000.0, 1000.0));
        let ccf = synthetic_pair(&s, Factor::Ccf).unwrap();
        assert_relative_eq!(ccf.0, 1009.8039215686274, max_relative = 1e-12);
        assert_relative_eq!(ccf.1, 990.1960784313726, max_relative = 1e-12);
    }

    #[test]
    fn symmetric_scenario_allocates_evenly() {
        let s = TwoStateScenario::equal_size(1000, 10, 10, 500, 500, 20, 20);
        for factor in [Factor::Ccf, Factor::Dcf] {
            let pair = synthetic_pair(&s, factor).unwrap();
            assert_eq!(pair, (1000.0, 1000.0));
        }
    }

    #[test]
    fn scaling_all_counts_preserves_shares() {
        // Coverage factors and allocation shares are ratios, so scaling
        // every count by 10 leaves them unchanged; the pairs themselves
        // scale with the true value S (here 10x, since CE grows tenfold
        // while NN/MN is unchanged).
        let base = scenario_equal_ee();
        let scaled = TwoStateScenario::equal_size(10_000, 100, 100, 5_000, 5_000, 200, 0);
        for factor in [Factor::Ccf, Factor::Dcf] {
            let a = synthetic_pair(&base, factor).unwrap();
            let b = synthetic_pair(&scaled, factor).unwrap();
            assert_relative_eq!(b.0 / (b.0 + b.1), a.0 / (a.0 + a.1), max_relative = 1e-12);
            assert_relative_eq!(b.0, 10.0 * a.0, max_relative = 1e-12);
            assert_relative_eq!(b.1, 10.0 * a.1, max_relative = 1e-12);
        }
    }

    #[test]
    fn unequal_true_values_rejected() {
        let mut s = scenario_equal_ee();
        s.nn2 = 400;
        assert!(matches!(
            synthetic_pair(&s, Factor::Ccf),
            Err(DseError::UnequalTrueDse)
        ));
    }

    #[test]
    fn delta_hand_scenario_equal_ee() {
        // Equal EE: the DCF route is exact, delta_c = 2e6 / 102^2.
        let cmp = delta_comparison(&scenario_equal_ee()).unwrap();
        assert_eq!(cmp.delta_d, 0.0);
        let expected_delta_c = 2e6 / (102.0 * 102.0);
        assert_relative_eq!(cmp.delta_c, expected_delta_c, max_relative = 1e-12);
        assert_relative_eq!(cmp.diff_exact, -expected_delta_c, max_relative = 1e-12);
        assert_eq!(cmp.actual_winner, Winner::Dcf);
        assert_eq!(cmp.predicted_winner, Winner::Dcf);
    }

    #[test]
    fn delta_hand_scenario_equal_ii() {
        // Equal II: delta_d = 2e6 / 101^2, delta_c = 2e6 / 102^2.
        let cmp = delta_comparison(&scenario_equal_ii()).unwrap();
        let expected_delta_d = 2e6 / (101.0 * 101.0);
        let expected_delta_c = 2e6 / (102.0 * 102.0);
        assert_relative_eq!(cmp.delta_d, expected_delta_d, max_relative = 1e-12);
        assert_relative_eq!(cmp.delta_c, expected_delta_c, max_relative = 1e-12);
        assert_relative_eq!(
            cmp.diff_exact,
            expected_delta_d - expected_delta_c,
            max_relative = 1e-9
        );
        assert!(cmp.diff_exact > 0.0);
        assert_eq!(cmp.actual_winner, Winner::Ccf);
        assert_eq!(cmp.predicted_winner, Winner::Ccf);
    }

    #[test]
    fn fully_symmetric_scenario_ties() {
        let s = TwoStateScenario::equal_size(1000, 10, 10, 500, 500, 20, 20);
        let cmp = delta_comparison(&s).unwrap();
        assert_eq!(cmp.delta_c, 0.0);
        assert_eq!(cmp.delta_d, 0.0);
        assert_eq!(cmp.diff_exact, 0.0);
        assert_eq!(cmp.actual_winner, Winner::Tie);
        assert_eq!(cmp.predicted_winner, Winner::Tie);
    }

    #[test]
    fn closed_form_matches_definition() {
        let scenarios = [
            scenario_equal_ee(),
            scenario_equal_ii(),
            TwoStateScenario::equal_size(5000, 37, 11, 700, 900, 45, 3),
            TwoStateScenario::equal_size(123, 7, 9, 11, 5, 2, 8),
        ];
        for s in scenarios {
            let cmp = delta_comparison(&s).unwrap();
            let scale = cmp.delta_c.max(cmp.delta_d).max(1e-300);
            assert!(
                (cmp.diff_exact - cmp.diff_definitional).abs() <= 1e-9 * scale,
                "{cmp:?}"
            );
        }
    }

    #[test]
    fn decision_rule_bullet_cases() {
        // Equal erroneous counts, unequal imputations: DCF.
        assert_eq!(
            decision_rule(&TwoStateScenario::equal_size(1000, 5, 5, 10, 10, 9, 2), 1.0),
            Winner::Dcf
        );
        // Equal imputations, unequal erroneous counts: CCF.
        assert_eq!(
            decision_rule(&TwoStateScenario::equal_size(1000, 9, 2, 10, 10, 5, 5), 1.0),
            Winner::Ccf
        );
        // Both larger in state 1: DCF.
        assert_eq!(
            decision_rule(&TwoStateScenario::equal_size(1000, 9, 2, 10, 10, 8, 3), 1.0),
            Winner::Dcf
        );
        // Mixed with small erroneous gap: threshold at half the
        // imputation gap.
        let s = TwoStateScenario::equal_size(1000, 5, 3, 10, 10, 2, 6);
        assert_eq!(decision_rule(&s, 1.0), Winner::Dcf); // 2 <= 4/2
        let s = TwoStateScenario::equal_size(1000, 8, 3, 10, 10, 2, 6);
        assert_eq!(decision_rule(&s, 1.0), Winner::Ccf); // 5 > 4/2
                                                         // Mirror cases (state labels swapped).
        let s = TwoStateScenario::equal_size(1000, 3, 5, 10, 10, 6, 2);
        assert_eq!(decision_rule(&s, 1.0), Winner::Dcf);
        let s = TwoStateScenario::equal_size(1000, 3, 8, 10, 10, 6, 2);
        assert_eq!(decision_rule(&s, 1.0), Winner::Ccf);
        // Identical counts: tie.
        let s = TwoStateScenario::equal_size(1000, 5, 5, 10, 10, 5, 5);
        assert_eq!(decision_rule(&s, 1.0), Winner::Tie);
    }

    #[test]
    fn decision_rule_lambda_scaled() {
        // lambda * EE1 = EE2 favors DCF even though EE1 != EE2.
        let s = TwoStateScenario {
            ce1: 1000,
            ce2: 2000,
            ee1: 5,
            ee2: 10,
            mn1: 500,
            mn2: 1000,
            nn1: 500,
            nn2: 1000,
            ii1: 9,
            ii2: 4,
            lambda: 2.0,
        };
        assert_eq!(decision_rule(&s, 2.0), Winner::Dcf);
        // lambda * II1 = II2 favors CCF.
        let s = TwoStateScenario {
            ii1: 4,
            ii2: 8,
            ee1: 9,
            ee2: 4,
            ..s
        };
        assert_eq!(decision_rule(&s, 2.0), Winner::Ccf);
    }

    #[test]
    fn general_path_agrees_with_closed_form_at_lambda_one() {
        for s in [
            scenario_equal_ee(),
            scenario_equal_ii(),
            TwoStateScenario::equal_size(5000, 37, 11, 700, 900, 45, 3),
        ] {
            let closed = delta_comparison(&s).unwrap();
            let general = delta_comparison_general(&s).unwrap();
            assert_relative_eq!(general.delta_c, closed.delta_c, max_relative = 1e-9);
            assert_relative_eq!(general.delta_d, closed.delta_d, max_relative = 1e-9);
            assert_eq!(general.s_true.0, closed.s_true);
        }
    }

    #[test]
    fn general_path_lambda_scaled_matches_rules() {
        // State 2 is three times state 1; CE dominates EE and II.
        let lambda = 3.0;
        let base = TwoStateScenario {
            ce1: 10_000,
            ce2: 30_000,
            ee1: 8,
            ee2: 24,
            mn1: 5_000,
            mn2: 15_000,
            nn1: 4_000,
            nn2: 12_000,
            ii1: 10,
            ii2: 50,
            lambda,
        };
        // lambda*EE1 = EE2: DCF predicted and realized.
        let g = delta_comparison_general(&base).unwrap();
        assert!(g.diff <= 0.0);
        assert_eq!(decision_rule(&base, lambda), Winner::Dcf);
        // lambda*II1 = II2: CCF predicted and realized.
        let s = TwoStateScenario {
            ii1: 10,
            ii2: 30,
            ee1: 8,
            ee2: 40,
            ..base
        };
        let g = delta_comparison_general(&s).unwrap();
        assert!(g.diff >= 0.0);
        assert_eq!(decision_rule(&s, lambda), Winner::Ccf);
    }

    #[test]
    fn frequency_table_margins() {
        let dcf_scenario = scenario_equal_ee();
        let ccf_scenario = scenario_equal_ii();
        let mut comparisons = Vec::new();
        for _ in 0..3 {
            comparisons.push(delta_comparison(&dcf_scenario).unwrap());
        }
        comparisons.push(delta_comparison(&ccf_scenario).unwrap());
        let big_dcf = TwoStateScenario::equal_size(30_000, 10, 10, 500, 500, 20, 0);
        comparisons.push(delta_comparison(&big_dcf).unwrap());
        let tie = TwoStateScenario::equal_size(1000, 10, 10, 500, 500, 20, 20);
        comparisons.push(delta_comparison(&tie).unwrap());

        let table = empirical_frequency(&comparisons, 50_000);
        assert_eq!(table.small_dcf, 3);
        assert_eq!(table.small_ccf, 1);
        assert_eq!(table.large_dcf, 1);
        assert_eq!(table.ties, 1);
        assert_eq!(table.total_small(), 4);
        assert_eq!(table.total_large(), 1);
        assert_eq!(table.total(), 5);
        assert_eq!(table.total_ccf() + table.total_dcf(), table.total());

        // Empty input: all-zero table.
        let empty = empirical_frequency(&[], 50_000);
        assert_eq!(empty.total(), 0);
        assert_eq!(empty.ties, 0);
    }

    #[test]
    fn exact_rules_small_grid() {
        // Every equal-size scenario with counts through 6: equal EE
        // implies the DCF route never loses, equal II implies it never
        // wins. The acceptance suite runs the full grid through 12.
        for ce in 1..=6u64 {
            for ee in 0..=6u64 {
                for ii1 in 0..=6u64 {
                    for ii2 in 0..=6u64 {
                        let s = TwoStateScenario::equal_size(ce, ee, ee, 3, 2, ii1, ii2);
                        let cmp = delta_comparison(&s).unwrap();
                        assert!(cmp.diff_exact <= 0.0, "{s:?}");
                    }
                }
            }
        }
        for ce in 1..=6u64 {
            for ee1 in 0..=6u64 {
                for ee2 in 0..=6u64 {
                    for ii in 0..=6u64 {
                        let s = TwoStateScenario::equal_size(ce, ee1, ee2, 3, 2, ii, ii);
                        let cmp = delta_comparison(&s).unwrap();
                        assert!(cmp.diff_exact >= 0.0, "{s:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn scale_invariance_of_winners() {
        let base = TwoStateScenario::equal_size(900, 17, 4, 50, 70, 3, 21);
        let cmp_base = delta_comparison(&base).unwrap();
        for factor in [2u64, 10, 1000] {
            let scaled = TwoStateScenario::equal_size(
                900 * factor,
                17 * factor,
                4 * factor,
                50 * factor,
                70 * factor,
                3 * factor,
                21 * factor,
            );
            let cmp = delta_comparison(&scaled).unwrap();
            assert_eq!(cmp.actual_winner, cmp_base.actual_winner);
            assert_eq!(cmp.predicted_winner, cmp_base.predicted_winner);
        }
    }

    #[test]
    fn approx_tracks_exact_in_regime() {
        let s = TwoStateScenario::equal_size(100_000, 40, 10, 500, 500, 5, 60);
        let cmp = delta_comparison(&s).unwrap();
        assert_eq!(cmp.diff_approx.signum(), cmp.diff_exact.signum(), "{cmp:?}");
        assert_relative_eq!(cmp.diff_approx, cmp.diff_exact, max_relative = 1e-2);
    }
}
