//! Hot-path benchmarks: allocation across the four formulas, geographic
//! aggregation at post-stratification scale, the chi-square upper tail,
//! the two-state comparison, and one simulated measurement replicate.

use std::collections::BTreeMap;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use syndse_bench::{scenario_batch, synthetic_stratum};
use syndse_core::estimator::{aggregate_regions, allocate, allocate_all, estimate_strata};
use syndse_core::homogeneity::{chi_square_homogeneity, chi_square_sf};
use syndse_core::model::{FormulaKind, GeoHierarchy, GeoLevel};
use syndse_core::sim::{
    generate_population, simulate_measurement, CountParam, RateParam, SimConfig, TruthSpec,
};
use syndse_core::variance::delta_comparison;

fn bench_allocate(c: &mut Criterion) {
    let (estimate, cells) = synthetic_stratum("s", 50);
    let mut group = c.benchmark_group("allocate_50_regions");
    for formula in FormulaKind::ALL {
        group.bench_with_input(
            BenchmarkId::from_parameter(formula.as_str()),
            &formula,
            |b, &formula| b.iter(|| allocate(black_box(&estimate), black_box(&cells), formula)),
        );
    }
    group.finish();
}

fn bench_aggregate(c: &mut Criterion) {
    // 416 strata over 51 regions, roughly the national post-stratum grid.
    let mut all_cells = Vec::new();
    let mut estimates = Vec::new();
    for i in 0..416 {
        let (estimate, cells) = synthetic_stratum(&format!("s{i:03}"), 51);
        estimates.push(estimate);
        all_cells.extend(cells);
    }
    let (table, _) = allocate_all(&estimates, &all_cells, FormulaKind::CensusBureau).unwrap();
    let geo = GeoHierarchy {
        region_to_state: (0..51)
            .map(|k| (format!("r{k:03}"), format!("state{:02}", k % 51)))
            .collect(),
        region_to_group: None,
    };
    c.bench_function("aggregate_416x51_to_states", |b| {
        b.iter(|| aggregate_regions(black_box(&table), black_box(&geo), GeoLevel::State))
    });
    c.bench_function("allocate_all_416x51", |b| {
        b.iter(|| {
            allocate_all(
                black_box(&estimates),
                black_box(&all_cells),
                FormulaKind::Alt2,
            )
        })
    });
}

fn bench_chi_square(c: &mut Criterion) {
    c.bench_function("chi_square_sf_df49", |b| {
        b.iter(|| chi_square_sf(black_box(61.2), black_box(49)))
    });
    c.bench_function("chi_square_sf_df10000", |b| {
        b.iter(|| chi_square_sf(black_box(10_250.0), black_box(10_000)))
    });

    let cells: Vec<_> = (0..50)
        .map(|r| {
            let ii = if r < 25 { 100 } else { 1_000 };
            syndse_core::CellCounts::new("s0", format!("r{r:02}"), 10_000, 10_000 - ii, ii)
        })
        .collect();
    c.bench_function("chi_square_homogeneity_50_regions", |b| {
        b.iter(|| chi_square_homogeneity(black_box(&cells)))
    });
}

fn bench_variance(c: &mut Criterion) {
    let scenarios = scenario_batch(1_000);
    c.bench_function("delta_comparison_batch_1000", |b| {
        b.iter(|| {
            scenarios
                .iter()
                .map(|s| delta_comparison(black_box(s)).unwrap().diff_exact)
                .sum::<f64>()
        })
    });
}

fn bench_simulator(c: &mut Criterion) {
    let config = SimConfig {
        n_strata: 8,
        n_regions: 16,
        truth: TruthSpec::Fixed(CountParam::Uniform { value: 5_000 }),
        capture_prob: RateParam::Uniform { value: 0.92 },
        ee_rate: RateParam::Uniform { value: 0.015 },
        ii_rate: RateParam::Uniform { value: 0.03 },
        ii_late_rate: None,
        n_reps: 1,
        seed: 5,
    };
    let truth = generate_population(&config).unwrap();
    c.bench_function("simulate_measurement_8x16", |b| {
        let mut replicate = 0u64;
        b.iter(|| {
            replicate += 1;
            simulate_measurement(black_box(&truth), black_box(&config), replicate)
        })
    });

    let measured = simulate_measurement(&truth, &config, 0).unwrap();
    c.bench_function("estimate_strata_8x16", |b| {
        b.iter(|| estimate_strata(black_box(&measured.cells), black_box(&measured.survey)))
    });

    let estimates = estimate_strata(&measured.cells, &measured.survey).unwrap();
    let everything: BTreeMap<String, String> = (0..16)
        .map(|k| (format!("r{k:02}"), "all".to_string()))
        .collect();
    let geo = GeoHierarchy {
        region_to_state: everything,
        region_to_group: None,
    };
    c.bench_function("allocate_and_aggregate_8x16", |b| {
        b.iter(|| {
            let (table, _) = allocate_all(
                black_box(&estimates),
                black_box(&measured.cells),
                FormulaKind::Alt3,
            )
            .unwrap();
            aggregate_regions(&table, &geo, GeoLevel::State)
        })
    });
}

criterion_group!(
    benches,
    bench_allocate,
    bench_aggregate,
    bench_chi_square,
    bench_variance,
    bench_simulator
);
criterion_main!(benches);
