//! Integration tests for loaders, report emission, and the binary
//! surface (exit codes, stdout shape).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;

use approx::assert_relative_eq;

use syndse_cli::io::{
    check_integrity, load_allocations, load_cells, load_geo, load_published, load_scenarios,
    load_se, load_state_rates, load_strata,
};
use syndse_cli::CliError;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn write_temp(dir: &tempfile::TempDir, name: &str, contents: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn syndse() -> Command {
    Command::new(env!("CARGO_BIN_EXE_syndse"))
}

#[test]
fn loads_worked_fixtures() {
    let cells = load_cells(&fixture("worked_cells.csv")).unwrap();
    assert_eq!(cells.len(), 2);
    assert_eq!(cells[0].c, 100);

    let strata = load_strata(&fixture("worked_strata.csv")).unwrap();
    assert_eq!(strata.len(), 1);
    assert_eq!(strata[0].ce, 63);
    assert_eq!(strata[0].mr, 0.75);

    let geo = load_geo(&fixture("worked_geo.csv")).unwrap();
    assert_eq!(geo.region_to_state["a"], "X");
    assert_eq!(geo.region_to_group.as_ref().unwrap()["b"], "g1");

    let se = load_se(&fixture("worked_se.csv")).unwrap();
    assert_eq!(se.len(), 2);

    assert!(check_integrity(&cells, Some(&strata), Some(&geo), Some(&se)).is_empty());
}

#[test]
fn cell_loader_rejects_inconsistency_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_temp(
        &dir,
        "cells.csv",
        "stratum,region,C,DD,II\ns1,a,100,95,10\ns1,b,100,90,10\n",
    );
    let err = load_cells(&path).unwrap_err();
    let CliError::Validation(messages) = err else {
        panic!("expected validation error, got {err}");
    };
    assert_eq!(messages.len(), 1);
    assert!(messages[0].contains(":2:"), "{messages:?}");
    assert!(messages[0].contains("C != DD + II"));
}

#[test]
fn cell_loader_rejects_negative_counts_and_bad_headers() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_temp(&dir, "neg.csv", "stratum,region,C,DD,II\ns1,a,100,-90,10\n");
    let err = load_cells(&path).unwrap_err();
    assert!(err.to_string().contains("negative count"), "{err}");
    assert!(err.to_string().contains(":2:"), "{err}");

    let path = write_temp(&dir, "head.csv", "stratum,region,c,dd,ii\ns1,a,1,1,0\n");
    let err = load_cells(&path).unwrap_err();
    assert!(err.to_string().contains("expected header"), "{err}");
}

#[test]
fn strata_loader_rejects_nonpositive_match_rate() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_temp(&dir, "strata.csv", "stratum,CE,EE,MR\ns1,10,1,0.0\n");
    let err = load_strata(&path).unwrap_err();
    assert!(
        err.to_string().contains("match rate must be positive"),
        "{err}"
    );
    let path = write_temp(&dir, "strata2.csv", "stratum,CE,EE,MR\ns1,10,1,1.5\n");
    assert!(load_strata(&path).is_err());
}

#[test]
fn integrity_reports_dangling_references() {
    let cells = load_cells(&fixture("worked_cells.csv")).unwrap();
    let geo = load_geo(&fixture("worked_geo.csv")).unwrap();
    // No strata entry for s1, geo missing one region, one extra SE state.
    let dir = tempfile::tempdir().unwrap();
    let strata = load_strata(&write_temp(
        &dir,
        "strata.csv",
        "stratum,CE,EE,MR\ns9,10,1,0.9\n",
    ))
    .unwrap();
    let partial_geo = load_geo(&write_temp(&dir, "geo.csv", "region,state\na,X\n")).unwrap();
    let se: BTreeMap<String, f64> = [("X".to_string(), 0.01)].into();

    let issues = check_integrity(&cells, Some(&strata), Some(&partial_geo), Some(&se));
    assert!(issues
        .iter()
        .any(|m| m.contains("`s1` has cells but no survey inputs")));
    assert!(issues.iter().any(|m| m.contains("`s9` match no cells")));
    assert!(issues
        .iter()
        .any(|m| m.contains("`b` has cells but no geography row")));

    let full_se = load_se(&fixture("worked_se.csv")).unwrap();
    let complete = check_integrity(&cells, None, Some(&geo), Some(&full_se));
    assert!(complete.is_empty(), "{complete:?}");
}

#[test]
fn published_loader_reads_all_columns() {
    let rows = load_published(&fixture("nj_county_groups.csv")).unwrap();
    assert_eq!(rows.len(), 13);
    let hudson = rows.iter().find(|r| r.group == "Hudson").unwrap();
    assert_eq!(hudson.census, 599_525);
    assert_eq!(hudson.dd, 567_337);
    assert_eq!(
        hudson.reldif_census_pct[&syndse_core::FormulaKind::CensusBureau],
        1.470
    );
    assert_eq!(
        hudson.sad_pct[&syndse_core::FormulaKind::CensusBureau],
        4.273
    );
    assert_eq!(hudson.ii_pct_dd, Some(5.674));
    // Quoted group names with commas survive.
    assert!(rows.iter().any(|r| r.group == "Somerset, Union"));
}

#[test]
fn state_rates_cover_all_states() {
    let rates = load_state_rates(&fixture("state_imputation_rates.csv")).unwrap();
    assert_eq!(rates.len(), 51);
    assert_eq!(rates["NJ"], 2.869);
    assert_eq!(rates["NY"], 4.913);
    assert_eq!(rates["CA"], 3.255);
}

#[test]
fn scenario_loader_defaults_lambda() {
    let scenarios = load_scenarios(&fixture("scenarios.csv")).unwrap();
    assert_eq!(scenarios.len(), 7);
    assert!(scenarios.iter().all(|s| s.lambda == 1.0));
    assert_eq!(scenarios[0].ii1, 20);

    let dir = tempfile::tempdir().unwrap();
    let no_lambda = write_temp(
        &dir,
        "s.csv",
        "ce1,ce2,ee1,ee2,mn1,mn2,nn1,nn2,ii1,ii2\n10,10,1,1,5,5,5,5,2,0\n",
    );
    let scenarios = load_scenarios(&no_lambda).unwrap();
    assert_eq!(scenarios[0].lambda, 1.0);

    let bad = write_temp(
        &dir,
        "bad.csv",
        "ce1,ce2,ee1,ee2,mn1,mn2,nn1,nn2,ii1,ii2\n10,10,1,1,0,5,5,5,2,0\n",
    );
    assert!(load_scenarios(&bad).is_err());
}

#[test]
fn allocation_csv_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("alloc.csv");
    let status = syndse()
        .args([
            "allocate",
            "--cells",
            fixture("worked_cells.csv").to_str().unwrap(),
            "--strata",
            fixture("worked_strata.csv").to_str().unwrap(),
            "--formula",
            "all",
            "--out",
            out.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert!(status.success());

    let tables = load_allocations(&out).unwrap();
    assert_eq!(tables.len(), 4);
    let alt1 = &tables[&syndse_core::FormulaKind::Alt1];
    assert_relative_eq!(
        alt1.entries[&("s1".to_string(), "a".to_string())],
        118.125,
        max_relative = 1e-15
    );
    // Manifest sidecar accompanies file output.
    let sidecar = dir.path().join("alloc.csv.manifest.json");
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(sidecar).unwrap()).unwrap();
    assert_eq!(manifest["tool"], "syndse");
    assert_eq!(manifest["inputs"].as_array().unwrap().len(), 2);
}

#[test]
fn reports_are_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("a.json");
    let out2 = dir.path().join("b.json");
    for out in [&out1, &out2] {
        let status = syndse()
            .args([
                "sad",
                "--published",
                fixture("ny_county_groups.csv").to_str().unwrap(),
                "--state-rates",
                fixture("state_imputation_rates.csv").to_str().unwrap(),
                "--format",
                "json",
                "--out",
                out.to_str().unwrap(),
            ])
            .status()
            .unwrap();
        assert!(status.success());
    }
    let a = std::fs::read(&out1).unwrap();
    let b = std::fs::read(&out2).unwrap();
    assert_eq!(a, b);
}

#[test]
fn binary_allocate_prints_worked_instance() {
    let output = syndse()
        .args([
            "allocate",
            "--cells",
            fixture("worked_cells.csv").to_str().unwrap(),
            "--strata",
            fixture("worked_strata.csv").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8(output.stdout).unwrap();
    let expected = "\
formula,stratum,region,S
cb,s1,a,105
cb,s1,b,105
alt1,s1,a,118.125
alt1,s1,b,91.875
alt2,s1,a,102.5
alt2,s1,b,107.5
alt3,s1,a,105.625
alt3,s1,b,104.375
";
    assert_eq!(stdout, expected);
}

#[test]
fn binary_exit_codes() {
    // Corrupted fixture: exit 1 with the violation list.
    let dir = tempfile::tempdir().unwrap();
    let bad = write_temp(&dir, "bad.csv", "stratum,region,C,DD,II\ns1,a,100,95,10\n");
    let output = syndse()
        .args(["validate", "--cells", bad.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("C != DD + II"), "{stderr}");

    // Unknown flag: usage error, exit 2.
    let output = syndse().args(["allocate", "--nonsense"]).output().unwrap();
    assert_eq!(output.status.code(), Some(2));

    // Clean fixture: exit 0.
    let output = syndse()
        .args([
            "validate",
            "--cells",
            fixture("worked_cells.csv").to_str().unwrap(),
            "--strata",
            fixture("worked_strata.csv").to_str().unwrap(),
            "--geo",
            fixture("worked_geo.csv").to_str().unwrap(),
            "--se",
            fixture("worked_se.csv").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
}

#[test]
fn mir_by_state() {
    let output = syndse()
        .args([
            "mir",
            "--cells",
            fixture("worked_cells.csv").to_str().unwrap(),
            "--geo",
            fixture("worked_geo.csv").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert_eq!(stdout, "state,mir,n_star\nX,10.000,1\nY,30.000,1\n");
}

#[test]
fn homogeneity_prints_underflow_p_as_inequality() {
    let output = syndse()
        .args([
            "homogeneity",
            "--cells",
            fixture("heterogeneous_cells.csv").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("p = <1e-300"), "{stderr}");
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("(combined)"));
}

#[test]
fn sad_computed_pipeline_matches_direct_computation() {
    // Two strata spread over four regions in two groups of one state.
    let dir = tempfile::tempdir().unwrap();
    let cells = write_temp(
        &dir,
        "cells.csv",
        "stratum,region,C,DD,II\n\
         s1,r1,1000,950,50\ns1,r2,800,790,10\n\
         s2,r1,500,460,40\ns2,r3,700,690,10\n",
    );
    let strata = write_temp(
        &dir,
        "strata.csv",
        "stratum,CE,EE,MR\ns1,95,5,0.92\ns2,90,10,0.95\n",
    );
    let geo = write_temp(
        &dir,
        "geo.csv",
        "region,state,group\nr1,Z,g1\nr2,Z,g1\nr3,Z,g2\n",
    );
    let output = syndse()
        .args([
            "sad",
            "--cells",
            cells.to_str().unwrap(),
            "--strata",
            strata.to_str().unwrap(),
            "--geo",
            geo.to_str().unwrap(),
            "--format",
            "json",
        ])
        .output()
        .unwrap();
    assert!(
        output.status.success(),
        "{}",
        String::from_utf8_lossy(&output.stderr)
    );
    let report: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    let rows = report["data"]["rows"].as_array().unwrap();
    // 2 groups x 4 formulas.
    assert_eq!(rows.len(), 8);
    let g1_cb = rows
        .iter()
        .find(|r| r["group"] == "g1" && r["formula"] == "cb")
        .unwrap();
    // State offset: II_s / DD_s = 110 / 2890.
    let synthetic = g1_cb["synthetic"].as_f64().unwrap();
    let expected_sad = ((synthetic - 2200.0) / 2200.0 - 110.0 / 2890.0) * 100.0;
    assert_relative_eq!(
        g1_cb["sad_pct"].as_f64().unwrap(),
        expected_sad,
        max_relative = 1e-12
    );
}

#[test]
fn out_dir_env_resolves_relative_paths() {
    let dir = tempfile::tempdir().unwrap();
    let status = syndse()
        .env("SYNDSE_OUT_DIR", dir.path())
        .args([
            "estimate",
            "--cells",
            fixture("worked_cells.csv").to_str().unwrap(),
            "--strata",
            fixture("worked_strata.csv").to_str().unwrap(),
            "--out",
            "nested/estimates.csv",
        ])
        .status()
        .unwrap();
    assert!(status.success());
    let written = dir.path().join("nested/estimates.csv");
    assert!(written.exists());
    let text = std::fs::read_to_string(written).unwrap();
    assert!(text.starts_with("stratum,C,DD,II,CR,DSE,CCF,DCF\n"));
    assert!(dir
        .path()
        .join("nested/estimates.csv.manifest.json")
        .exists());
}
