//! Tuning the lower-mode coefficients of a recovery seed so that u(0,t)
//! vanishes to order ℓ at t = e^{-s₀}.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::seeds::{build_rbc_data, RbcSeed, RbcSeedSpec};
use super::{solve_singular, SolverConfig};
use crate::error::{invalid, Error, Result};
use crate::grid::Grid;
use crate::steady_core::ModelParams;

#[derive(Debug, Clone, Serialize)]
pub struct ShootConfig {
    /// Shift of the regularized singular problem.
    pub a: f64,
    /// Fit window for the boundary trace, as fractions of τ₀ before τ₀.
    pub window: (f64, f64),
    pub iterations: usize,
    /// Stop once every target coefficient is below this fraction of |z0(0)|.
    pub rel_tol: f64,
    /// Finite-difference step, in units of e^{-λs₀}.
    pub fd_step: f64,
}

impl Default for ShootConfig {
    fn default() -> Self {
        Self {
            a: 1e-6,
            window: (3.3e-3, 3.3e-2),
            iterations: 6,
            rel_tol: 1e-10,
            fd_step: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ShootResult {
    /// Spec with the tuned d.
    pub spec: RbcSeedSpec,
    /// Max |c_j| g_hi^j, j < ℓ, of the fitted boundary polynomial before each Newton step,
    /// then after the last one.
    pub residuals: Vec<f64>,
    pub converged: bool,
    /// Singular-solver runs spent.
    pub runs: usize,
}

/// Newton iteration on d_0..d_{ℓ-1}: the trace z(0,t) near τ₀ = e^{-s₀} is fitted by
/// Σ_{j≤ℓ} c_j (τ₀-t)^j and the lower coefficients c_0..c_{ℓ-1} are driven to zero.
/// The map d -> c is close to affine (the problem is nearly linear near x = 0),
/// so a few finite-difference Newton steps suffice.
///
/// Runs use `solver` with `stop_on_crossing` off; its `t_end` must pass the window.
/// A rerun with the same stepping and the tuned spec reproduces the base run.
pub fn shoot_rbc_seed(
    spec: &RbcSeedSpec,
    params: &ModelParams,
    grid: Arc<Grid>,
    solver: &SolverConfig,
    cfg: &ShootConfig,
) -> Result<ShootResult> {
    let ell = spec.ell;
    if ell < 1 || spec.d.len() != ell {
        return invalid("spec needs ell >= 1 and ell coefficients");
    }
    let (w_lo, w_hi) = cfg.window;
    if !(w_lo > 0.0 && w_hi > w_lo && w_hi < 1.0) {
        return invalid("shooting window must satisfy 0 < lo < hi < 1");
    }
    let unit = (-(ell as f64 - params.k) * spec.s0).exp();
    let tau0 = (-spec.s0).exp();
    if solver.t_end < tau0 * (1.0 - w_lo) {
        return invalid("solver t_end ends before the shooting window");
    }
    let mut sc = solver.clone();
    sc.stop_on_crossing = false;

    let lower = |d: &[f64]| -> Result<(Vec<f64>, f64)> {
        let mut s = spec.clone();
        s.d = d.iter().map(|x| x * unit).collect();
        let seed: RbcSeed = build_rbc_data(&s, params, Arc::clone(&grid))?;
        let r = solve_singular(&seed.z0, &sc, cfg.a)?;
        let c = fit_poly(&r.boundary_trace, tau0, w_lo * tau0, w_hi * tau0, ell)?;
        let scaled = (0..ell).map(|j| c[j] * (w_hi * tau0).powi(j as i32)).collect();
        Ok((scaled, seed.boundary_value))
    };

    let mut d: Vec<f64> = spec.d.iter().map(|x| x / unit).collect();
    let mut residuals = Vec::new();
    let mut runs = 0;
    let mut converged = false;
    for _ in 0..cfg.iterations {
        // base run and one perturbed run per coefficient
        let trials: Vec<Vec<f64>> = std::iter::once(d.clone())
            .chain((0..ell).map(|j| {
                let mut e = d.clone();
                e[j] += cfg.fd_step;
                e
            }))
            .collect();
        let out: Vec<(Vec<f64>, f64)> = trials.par_iter().map(|t| lower(t)).collect::<Result<_>>()?;
        runs += out.len();
        let (f, z00) = &out[0];
        let res = f.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        residuals.push(res);
        if res <= cfg.rel_tol * z00.abs() {
            converged = true;
            break;
        }
        let jac: Vec<Vec<f64>> = (0..ell)
            .map(|i| (0..ell).map(|j| (out[j + 1].0[i] - f[i]) / cfg.fd_step).collect())
            .collect();
        let rhs: Vec<f64> = f.iter().map(|c| -c).collect();
        let step = solve_dense(jac, rhs).ok_or_else(|| Error::NoConvergence("singular shooting Jacobian".into()))?;
        for (x, s) in d.iter_mut().zip(&step) {
            *x += s;
        }
    }
    if !converged {
        let (f, z00) = lower(&d)?;
        runs += 1;
        let res = f.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        residuals.push(res);
        converged = res <= cfg.rel_tol * z00.abs();
    }
    let mut out = spec.clone();
    out.d = d.iter().map(|x| x * unit).collect();
    Ok(ShootResult {
        spec: out,
        residuals,
        converged,
        runs,
    })
}

/// Least-squares coefficients of Σ_{j≤deg} c_j g^j, g = t0 - t, over g ∈ [g_lo, g_hi].
fn fit_poly(trace: &[(f64, f64)], t0: f64, g_lo: f64, g_hi: f64, deg: usize) -> Result<Vec<f64>> {
    let n = deg + 1;
    let mut m = vec![vec![0.0; n]; n];
    let mut r = vec![0.0; n];
    let mut count = 0;
    for &(t, v) in trace {
        let g = t0 - t;
        if g < g_lo || g > g_hi {
            continue;
        }
        count += 1;
        let b: Vec<f64> = (0..n).map(|j| (g / g_hi).powi(j as i32)).collect();
        for i in 0..n {
            r[i] += b[i] * v;
            for j in 0..n {
                m[i][j] += b[i] * b[j];
            }
        }
    }
    if count < 2 * n {
        return Err(Error::NoConvergence(format!("only {count} trace points in the shooting window")));
    }
    let c = solve_dense(m, r).ok_or_else(|| Error::NoConvergence("degenerate shooting fit".into()))?;
    Ok(c.iter().enumerate().map(|(j, cj)| cj / g_hi.powi(j as i32)).collect())
}

/// Gaussian elimination with partial pivoting.
fn solve_dense(mut m: Vec<Vec<f64>>, mut r: Vec<f64>) -> Option<Vec<f64>> {
    let n = r.len();
    for k in 0..n {
        let piv = (k..n).max_by(|&a, &b| m[a][k].abs().total_cmp(&m[b][k].abs()))?;
        if m[piv][k] == 0.0 || !m[piv][k].is_finite() {
            return None;
        }
        m.swap(k, piv);
        r.swap(k, piv);
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            for j in k..n {
                m[i][j] -= f * m[k][j];
            }
            r[i] -= f * r[k];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| m[i][j] * x[j]).sum();
        x[i] = (r[i] - s) / m[i][i];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_solve() {
        let x = solve_dense(vec![vec![0.0, 2.0], vec![3.0, 1.0]], vec![4.0, 5.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 2.0).abs() < 1e-15);
        assert!(solve_dense(vec![vec![1.0, 2.0], vec![2.0, 4.0]], vec![1.0, 1.0]).is_none());
    }

    #[test]
    fn poly_fit_recovers_quadratic() {
        let trace: Vec<(f64, f64)> = (0..300)
            .map(|i| {
                let t = i as f64 * 1e-3;
                let g = 0.3 - t;
                (t, 1e-3 - 2e-2 * g + 0.7 * g * g)
            })
            .collect();
        let c = fit_poly(&trace, 0.3, 0.01, 0.1, 2).unwrap();
        assert!((c[0] - 1e-3).abs() < 1e-12 && (c[1] + 2e-2).abs() < 1e-11 && (c[2] - 0.7).abs() < 1e-10);
    }
}
