//! Independent reference computations: Laguerre recurrences, a Runge-Kutta
//! integration of the Y equation, closed-form Gaussian moments.

use statrs::function::gamma::gamma;
use vhj_core::kernel::{g_kernel, KernelParams, YFunction};
use vhj_core::quad::{integrate, QuadConfig};
use vhj_core::spectral::{eigenpoly, gauss_moment};
use vhj_core::{ModelParams, WeightedSpace};

fn laguerre(j: usize, nu: f64, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 1.0 + nu - x);
    if j == 0 {
        return prev;
    }
    for k in 1..j {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 + nu - x) * cur - (k + nu) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

#[test]
fn eigenpolynomials_are_laguerre_in_y2_over_4() {
    for p in [3.0, 4.0, 2.5] {
        let m = ModelParams::new(p).unwrap();
        let s = WeightedSpace::for_params(&m).unwrap();
        let nu = 0.5 * (m.alpha - 1.0);
        for j in 0..=8 {
            let phi = eigenpoly(j, &s, &m).unwrap();
            let c = phi.eval(0.0) / laguerre(j, nu, 0.0);
            for i in 1..40 {
                let y = 0.25 * i as f64;
                let want = c * laguerre(j, nu, y * y / 4.0);
                let scale = 1.0 + want.abs();
                assert!((phi.eval(y) - want).abs() < 1e-9 * scale, "p={p} j={j} y={y}");
            }
        }
    }
}

/// RK4 for Y'' = Y - (α/z) Y', started from the series at a small z.
fn rk4_y(alpha: f64, z_end: f64, h: f64) -> Vec<(f64, f64)> {
    let z0 = 1e-3;
    // two series terms are exact to ~1e-13 at z0
    let c1 = 1.0 / (2.0 * (1.0 + alpha));
    let c2 = c1 / (4.0 * (3.0 + alpha));
    let mut y = [1.0 + c1 * z0 * z0 + c2 * z0.powi(4), 2.0 * c1 * z0 + 4.0 * c2 * z0.powi(3)];
    let f = |z: f64, y: [f64; 2]| [y[1], y[0] - alpha / z * y[1]];
    let mut z = z0;
    let mut out = Vec::new();
    let steps = ((z_end - z0) / h).round() as usize;
    for n in 0..steps {
        let k1 = f(z, y);
        let k2 = f(z + h / 2.0, [y[0] + h / 2.0 * k1[0], y[1] + h / 2.0 * k1[1]]);
        let k3 = f(z + h / 2.0, [y[0] + h / 2.0 * k2[0], y[1] + h / 2.0 * k2[1]]);
        let k4 = f(z + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
        for i in 0..2 {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        z = z0 + (n + 1) as f64 * h;
        if (n + 1) % 500 == 0 {
            out.push((z, y[0]));
        }
    }
    out
}

#[test]
fn y_function_matches_runge_kutta() {
    for alpha in [1.5, 4.0 / 3.0] {
        let yf = YFunction::new(alpha).unwrap();
        for (z, want) in rk4_y(alpha, 40.0, 2e-3) {
            let got = yf.eval(z, 0).unwrap();
            assert!(((got - want) / want).abs() < 1e-10, "alpha {alpha} z {z}: {got} vs {want}");
        }
    }
}

#[test]
fn y_growth_is_bounded_by_exponential() {
    for alpha in [1.5, 4.0 / 3.0] {
        let yf = YFunction::new(alpha).unwrap();
        let vals: Vec<f64> = (0..=600)
            .map(|i| {
                let z = 0.1 * i as f64;
                yf.scaled(z, 0) * (1.0 + z).powf(alpha / 2.0)
            })
            .collect();
        let max = vals.iter().cloned().fold(0.0, f64::max);
        let tail = vals[500..].iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(max < 10.0 && tail > 0.1 * max, "alpha {alpha}: max {max}, tail {tail}");
    }
}

#[test]
fn gaussian_moments_closed_form_and_quadrature() {
    let cfg = QuadConfig::default();
    for s in [0.0, 0.5, 1.5, 2.0, 4.0 / 3.0 + 6.0, 11.0] {
        let closed = 2f64.powf(s) * gamma(0.5 * (s + 1.0));
        assert!((gauss_moment(s).unwrap() / closed - 1.0).abs() < 1e-14);
        let q = integrate(|y| y.powf(s) * (-y * y / 4.0).exp(), 0.0, 40.0, &[2.0 * s.sqrt()], &cfg).unwrap();
        assert!((q.value / closed - 1.0).abs() < 1e-11, "s = {s}");
    }
}

#[test]
fn semigroup_kernels_positive_and_sub_markov() {
    let m = ModelParams::new(3.0).unwrap();
    let kp = KernelParams::for_params(&m).unwrap();
    let cfg = QuadConfig::default();
    for s in [0.1, 0.5, 2.0] {
        for y in [0.0, 0.7, 3.0, 8.0] {
            for i in 0..200 {
                let xi = 0.05 * i as f64;
                assert!(g_kernel(0, s, y, xi, &kp, &m).unwrap() >= 0.0);
            }
            let x = (-0.5 * s).exp() * y;
            let top = x + 40.0;
            let mass = integrate(
                |xi| g_kernel(1, s, y, xi, &kp, &m).unwrap() * xi.powf(kp.alpha),
                0.0,
                top,
                &[x],
                &cfg,
            )
            .unwrap()
            .value;
            let bound = ((m.k - 0.5) * s).exp();
            assert!(mass <= bound * (1.0 + 1e-10), "s {s} y {y}: {mass} > {bound}");
        }
    }
}

#[test]
fn eigenpolynomial_growth_is_gaussian_bounded() {
    let m = ModelParams::new(3.0).unwrap();
    let s = WeightedSpace::for_params(&m).unwrap();
    for j in 0..=8 {
        let phi = eigenpoly(j, &s, &m).unwrap();
        let vals: Vec<f64> = (0..=400)
            .map(|i| {
                let y = 0.05 * i as f64;
                phi.eval(y).abs() * (-y * y / 8.0).exp()
            })
            .collect();
        // decays past the last zero: the bound is attained well inside [0, 20]
        assert!(vals[400] < vals.iter().cloned().fold(0.0, f64::max), "j = {j}");
    }
}
