use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use std::hint::black_box;

use t3lab::energy::elastic_energy;
use t3lab::grid::Fft3;
use t3lab::solver::{green_apply, solve_equilibrium};
use t3lab::{is_t3, IsotropicHooke, SolverConfig, SymMat, WellSystem};
use t3lab_bench::{polarization_fixture, strain_fixture, SIZES};

fn fft(c: &mut Criterion) {
    let mut group = c.benchmark_group("fft_forward_real");
    for n in SIZES {
        let (_, f) = strain_fixture(n);
        let plan = Fft3::for_grid(&f.grid);
        group.throughput(Throughput::Elements(f.grid.len() as u64));
        group.bench_with_input(BenchmarkId::from_parameter(n), &f.comps[0], |b, data| {
            b.iter(|| plan.forward_real(black_box(data)))
        });
    }
    group.finish();
}

fn energy(c: &mut Criterion) {
    let mut group = c.benchmark_group("elastic_energy");
    for n in SIZES {
        let (_, f) = strain_fixture(n);
        group.throughput(Throughput::Elements(f.grid.len() as u64));
        group.bench_with_input(BenchmarkId::from_parameter(n), &f, |b, f| b.iter(|| elastic_energy(black_box(f))));
    }
    group.finish();
}

fn green(c: &mut Criterion) {
    let ws = WellSystem::reference();
    let hooke = IsotropicHooke::reference();
    let mut group = c.benchmark_group("green_apply");
    for n in SIZES {
        let tau = polarization_fixture(n);
        group.throughput(Throughput::Elements(tau.grid.len() as u64));
        group.bench_with_input(BenchmarkId::from_parameter(n), &tau, |b, tau| {
            b.iter(|| green_apply(black_box(tau), &ws.aux[0], &hooke))
        });
    }
    group.finish();
}

fn solver(c: &mut Criterion) {
    let ws = WellSystem::reference();
    let hooke = IsotropicHooke::reference();
    let mut group = c.benchmark_group("solver_sweeps");
    group.sample_size(10);
    for n in [16, 32] {
        // a fixed number of sweeps; non-convergence is expected
        let cfg = SolverConfig {
            n,
            max_iter: 20,
            tol: 1e-300,
            ..SolverConfig::default()
        };
        group.bench_with_input(BenchmarkId::from_parameter(n), &cfg, |b, cfg| {
            b.iter(|| solve_equilibrium(black_box(cfg), &ws, &hooke).is_ok())
        });
    }
    group.finish();
}

fn t3_detection(c: &mut Criterion) {
    let ws = WellSystem::reference();
    let m = ws.wells.map(SymMat::from);
    c.bench_function("is_t3", |b| b.iter(|| is_t3(black_box(&m)).unwrap().is_some()));
}

criterion_group!(benches, fft, energy, green, solver, t3_detection);
criterion_main!(benches);
