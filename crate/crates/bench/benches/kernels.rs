use criterion::{criterion_group, criterion_main, Criterion};
use shelfgaze_core::{
    bisector_split, optimize_camera_drop, point_to_cell, simulate, GridSpec, PersonSample,
    PlanePoint, PopulationSpec, ProcessingTime, ShelfConfig, SimConfig,
};
use std::hint::black_box;

fn geometry(c: &mut Criterion) {
    let cfg = ShelfConfig::default();
    let p = PersonSample::from_eye_height(&cfg, 160.2, 112.5).unwrap();
    c.bench_function("bisector_split", |b| {
        b.iter(|| bisector_split(black_box(&cfg), black_box(&p)))
    });

    let g = GridSpec::default();
    c.bench_function("point_to_cell", |b| {
        b.iter(|| point_to_cell(&g, black_box(&PlanePoint::new(51.0, 55.5))))
    });
}

fn monte_carlo(c: &mut Criterion) {
    let cfg = ShelfConfig::default();
    let pop = PopulationSpec {
        sample_count: 10_000,
        ..PopulationSpec::default()
    };
    let mut group = c.benchmark_group("placement");
    group.sample_size(10);
    group.bench_function("optimize_10k", |b| {
        b.iter(|| optimize_camera_drop(&cfg, black_box(&pop)).unwrap())
    });
    group.finish();
}

fn pipeline(c: &mut Criterion) {
    let cfg = SimConfig {
        processing: ProcessingTime::Uniform {
            lo_ms: 66.7,
            hi_ms: 100.0,
        },
        duration_s: 120.0,
        ..SimConfig::default()
    };
    c.bench_function("simulate_120s", |b| b.iter(|| simulate(black_box(&cfg)).unwrap()));
}

criterion_group!(benches, geometry, monte_carlo, pipeline);
criterion_main!(benches);
