use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use noonsim::{
    calibrate_b, fringe_sweep, ground_state, make_noon, parity_fourier, ramp_run, uniform_grid,
    RampConfig, RamseyConfig, SystemParams,
};

fn ground_states(c: &mut Criterion) {
    let params = SystemParams::symmetric(1.0, -0.1);
    c.bench_function("ground_state N=20 U/k=-0.1", |b| {
        b.iter(|| ground_state(black_box(&params), 20, 1e-12).unwrap())
    });
}

fn ramps(c: &mut Criterion) {
    let cfg = RampConfig {
        samples: 2,
        ..RampConfig::default()
    };
    let mut group = c.benchmark_group("ramp N=20 kappa=10 U 1->-3");
    group.sample_size(20);
    for t in [0.5, 4.0] {
        group.bench_function(format!("{t} s"), |b| {
            b.iter(|| ramp_run(20, 10.0, 1.0, black_box(-3.0), t, &cfg).unwrap())
        });
    }
    group.finish();
}

fn fringes(c: &mut Criterion) {
    let state = make_noon(20, 0.0).unwrap();
    let grid = uniform_grid(512);
    let cfg = RamseyConfig::default();
    c.bench_function("fringe_sweep N=20 512 points", |b| {
        b.iter(|| fringe_sweep(black_box(&state), &grid, &cfg, 2).unwrap())
    });
    let fringe = fringe_sweep(&state, &grid, &cfg, 1).unwrap();
    c.bench_function("parity_fourier N=20 512 points", |b| {
        b.iter(|| parity_fourier(black_box(&fringe)).unwrap())
    });
}

fn calibration(c: &mut Criterion) {
    let cfg = RamseyConfig::default();
    c.bench_function("calibrate_b N=12", |b| {
        b.iter(|| calibrate_b(black_box(12), &cfg).unwrap())
    });
}

criterion_group!(benches, ground_states, ramps, fringes, calibration);
criterion_main!(benches);
