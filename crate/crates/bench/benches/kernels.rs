use std::sync::Arc;

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use vhj_bench::{bump, graded_grid, params};
use vhj_core::braid::{lemma_families, word, BraidEngine};
use vhj_core::kernel::{apply_semigroup, check_normalization, GrowthTag, KernelParams, YFunction};
use vhj_core::solver::{solve_classical, SolverConfig, Stepping};
use vhj_core::spectral::{eigenpoly, gram_matrix, positive_zeros};
use vhj_core::{Grid, WeightedSpace};

fn spectral(c: &mut Criterion) {
    let m = params();
    let s = WeightedSpace::for_params(&m).unwrap();
    c.bench_function("eigenpoly j=12 with zeros", |b| {
        b.iter(|| {
            let phi = eigenpoly(black_box(12), &s, &m).unwrap();
            positive_zeros(&phi, &s).unwrap()
        })
    });
    c.bench_function("exact gram 13x13", |b| b.iter(|| gram_matrix(black_box(12), &s)));
}

fn kernels(c: &mut Criterion) {
    let m = params();
    let kp = KernelParams::for_params(&m).unwrap();
    let y = YFunction::new(m.alpha).unwrap();
    let mut g = c.benchmark_group("Y");
    for z in [0.5, 20.0, 400.0] {
        g.bench_with_input(BenchmarkId::from_parameter(z), &z, |b, &z| b.iter(|| y.scaled(black_box(z), 0)));
    }
    g.finish();
    c.bench_function("normalization t=1 x=5", |b| b.iter(|| check_normalization(1.0, black_box(5.0), &kp).unwrap()));
    let s = WeightedSpace::for_params(&m).unwrap();
    let phi = eigenpoly(3, &s, &m).unwrap();
    let out = Arc::new(Grid::uniform(6.0, 30).unwrap());
    c.bench_function("semigroup on phi_3, 31 points", |b| {
        let f = |y: f64| phi.eval(y);
        b.iter(|| apply_semigroup(0.5, &f, GrowthTag::polynomial(6.0), &kp, &m, Arc::clone(&out)).unwrap())
    });
}

fn solver(c: &mut Criterion) {
    let m = params();
    let mut g = c.benchmark_group("implicit steps");
    g.sample_size(20);
    for h0 in [1e-3, 1e-4] {
        let grid = graded_grid(h0);
        let u0 = bump(Arc::clone(&grid));
        let cfg = SolverConfig::new(m.clone(), Stepping::Fixed { dt: 1e-4 }, 5e-3);
        g.bench_with_input(BenchmarkId::new("50 steps", grid.len()), &u0, |b, u0| {
            b.iter(|| solve_classical(u0, &cfg).unwrap())
        });
    }
    g.finish();
}

fn braid(c: &mut Criterion) {
    let f = lemma_families(3).unwrap();
    c.bench_function("non-reduction A~3 -/-> B~3", |b| {
        b.iter(|| {
            let mut e = BraidEngine::default();
            e.reduce_reachable(&f.a_tilde, &f.b_tilde).unwrap()
        })
    });
    let w = word("XYYXYYXYXX");
    c.bench_function("artin class, length 10", |b| {
        b.iter(|| {
            let mut e = BraidEngine::default();
            e.artin_class(black_box(&w)).unwrap().members().len()
        })
    });
}

criterion_group!(benches, spectral, kernels, solver, braid);
criterion_main!(benches);
