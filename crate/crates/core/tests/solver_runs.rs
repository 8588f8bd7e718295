use std::sync::Arc;

use vhj_core::solver::{
    build_gbu_data, build_rbc_data, detect_rbc_time, shoot_rbc_seed, solve_singular, GbuSeedSpec, RbcSeedSpec,
    ShootConfig, SolverConfig, Stepping,
};
use vhj_core::spectral::eigenpoly;
use vhj_core::zeros::{crossings, sign_changes};
use vhj_core::{Grid, GridFunction, ModelParams, WeightedSpace};

fn p3() -> ModelParams {
    ModelParams::new(3.0).unwrap()
}

#[test]
fn rbc_seed_boundary_value_and_support() {
    let m = p3();
    let s = WeightedSpace::for_params(&m).unwrap();
    let grid = Arc::new(Grid::graded(1.0, 1e-5, 0.97, Some(2e-3)).unwrap());
    for (ell, s0) in [(1, 9.0), (2, 9.0)] {
        let spec = RbcSeedSpec::new(ell, s0);
        let seed = build_rbc_data(&spec, &m, Arc::clone(&grid)).unwrap();
        let lambda = ell as f64 - m.k;
        let want = (-(m.k + lambda) * s0).exp() * eigenpoly(ell, &s, &m).unwrap().phi0();
        assert!((seed.boundary_value / want - 1.0).abs() < 1e-12);
        for (&x, &z) in seed.z0.nodes().iter().zip(&seed.z0.values) {
            let u0 = m.u(x) + z;
            assert!(u0 >= -1e-14);
            if x >= 4.0 * spec.sigma {
                assert!(u0.abs() < 1e-14, "x = {x}: {u0}");
            }
        }
        let n = sign_changes(&seed.z0, (0.0, spec.sigma), 0.0).unwrap();
        assert_eq!(n, ell, "ell = {ell}");
    }
}

#[test]
fn rbc_seed_rejects_large_eps_and_d() {
    let m = p3();
    let grid = Arc::new(Grid::uniform(1.0, 100).unwrap());
    let mut spec = RbcSeedSpec::new(1, 5.0);
    spec.eps = 10.0;
    assert!(build_rbc_data(&spec, &m, Arc::clone(&grid)).is_err());
    let mut spec = RbcSeedSpec::new(1, 5.0);
    spec.d = vec![1.0];
    assert!(build_rbc_data(&spec, &m, grid).is_err());
}

#[test]
fn gbu_seed_shape() {
    let m = p3();
    let grid = Arc::new(Grid::graded(2.5, 2e-7, 0.97, Some(2e-3)).unwrap());
    let spec = GbuSeedSpec::new(1, 6.0);
    let seed = build_gbu_data(&spec, &m, Arc::clone(&grid)).unwrap();
    assert_eq!(seed.u0.values[0], 0.0);
    assert!(seed.glue_residual.abs() < 1e-10);
    assert!(seed.u0.values.iter().all(|&v| v >= 0.0));
    let scale = (0.5 * spec.s0).exp();
    let hi = spec.sigma * scale;
    let diff = seed.u0.minus_fn(|x| m.u(x));
    // the inner layer sits below U; only the eigenmode zero remains
    let zs = crossings(&diff, (1e-6, hi / scale), 0.0).unwrap();
    assert_eq!(zs.len(), 1);
    assert!((zs[0].x * scale - 5f64.sqrt()).abs() < 0.3, "zero at y = {}", zs[0].x * scale);
}

fn singular_cfg(t_end: f64) -> SolverConfig {
    let mut cfg = SolverConfig::new(p3(), Stepping::adaptive(1e-6, 0.01), t_end);
    cfg.stop_on_crossing = false;
    cfg.snapshots.every = Some(10);
    cfg
}

#[test]
fn below_steady_state_stays_below() {
    let m = p3();
    let grid = Arc::new(Grid::graded(1.0, 1e-4, 0.95, Some(1e-2)).unwrap());
    let z0 = GridFunction::from_fn(Arc::clone(&grid), 0.0, |x| -0.3 * m.u(x) * (1.0 - x)).unwrap();
    let r = solve_singular(&z0, &singular_cfg(0.05), 1e-6).unwrap();
    for s in &r.snapshots {
        assert!(s.values.iter().all(|&v| v <= 1e-14));
    }
}

#[test]
fn singular_contraction() {
    let grid = Arc::new(Grid::graded(1.0, 1e-4, 0.95, Some(1e-2)).unwrap());
    let a = GridFunction::from_fn(Arc::clone(&grid), 0.0, |x| 0.05 * (1.0 - x * x)).unwrap();
    let b = GridFunction::from_fn(Arc::clone(&grid), 0.0, |x| 0.02 * (3.0 * x).cos() * (1.0 - x)).unwrap();
    let d0 = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let mut cfg = singular_cfg(0.05);
    cfg.stepping = Stepping::Fixed { dt: 1e-5 };
    let ra = solve_singular(&a, &cfg, 1e-6).unwrap();
    let rb = solve_singular(&b, &cfg, 1e-6).unwrap();
    for (s, t) in ra.snapshots.iter().zip(&rb.snapshots) {
        let d = s.values.iter().zip(&t.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(d <= d0 * (1.0 + 1e-9), "t = {}: {d} > {d0}", s.t);
    }
}

#[test]
fn positive_boundary_value_is_continuous_and_gradient_bounded() {
    let grid = Arc::new(Grid::graded(1.0, 1e-5, 0.95, Some(1e-2)).unwrap());
    let c = 0.02;
    let z0 = GridFunction::from_fn(Arc::clone(&grid), 0.0, |x| c * (1.0 - x)).unwrap();
    let r = solve_singular(&z0, &singular_cfg(1e-3), 1e-6).unwrap();
    // the Neumann layer moves z(0,t) by O(c√t), so the value is continuous at t = 0
    for &(t, v) in r.boundary_trace.iter().filter(|(t, _)| *t > 0.0) {
        assert!((v - c).abs() <= 4.0 * c * t.sqrt(), "t = {t}: {v}");
    }
    // z_x stays bounded: the slope of u - U is finite though u itself is singular
    let zx = r.final_state.values[1] - r.final_state.values[0];
    let h = grid.nodes()[1];
    assert!((zx / h).abs() < 10.0, "z_x(0) = {}", zx / h);
}

#[test]
fn rbc_run_recovers_and_refines() {
    let m = p3();
    let spec = RbcSeedSpec::new(1, 4.6);
    let mut taus = Vec::new();
    for h0 in [4e-6, 2e-6] {
        let grid = Arc::new(Grid::graded(1.0, h0, 0.97, Some(2e-3)).unwrap());
        let seed = build_rbc_data(&spec, &m, Arc::clone(&grid)).unwrap();
        let mut cfg = SolverConfig::new(m.clone(), Stepping::adaptive(1e-9, 0.01), 3.0 * seed.tau0);
        cfg.snapshots.every = Some(50);
        let r = solve_singular(&seed.z0, &cfg, 1e-8).unwrap();
        let tau = detect_rbc_time(&r).expect("boundary value reaches zero");
        taus.push(tau);
    }
    assert!(((taus[0] - taus[1]) / taus[1]).abs() < 1e-2, "{taus:?}");
    assert!(taus[1] > 0.0 && taus[1] < 3.0 * (-4.6f64).exp());
}

#[test]
fn shooting_reduces_lower_coefficients() {
    let m = p3();
    let spec = RbcSeedSpec::new(2, 9.0);
    let grid = Arc::new(Grid::graded(1.0, 1e-5, 0.97, Some(2e-3)).unwrap());
    let tau0 = (-9.0f64).exp();
    let mut cfg = SolverConfig::new(m.clone(), Stepping::adaptive(1e-10, 0.01), tau0 * 1.0001);
    cfg.stop_on_crossing = false;
    let out = shoot_rbc_seed(&spec, &m, grid, &cfg, &ShootConfig::default()).unwrap();
    assert!(out.converged, "{:?}", out.residuals);
    assert!(out.residuals.last().unwrap() < &(1e-3 * out.residuals[0]));
    let bound = spec.eps * (-(2.0 - m.k) * 9.0f64).exp();
    assert!(out.spec.d.iter().map(|d| d.abs()).sum::<f64>() <= bound);
}
