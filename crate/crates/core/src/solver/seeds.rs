//! Special initial data: quasi-stationary inner layer glued to U - e^{-λs₀}φ_ℓ
//! (gradient blow-up seeds) and U + e^{-λs₀}φ_ℓ with a cutoff (recovery seeds).

use std::sync::Arc;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::spectral::{bisect, eigenpoly, EigenPoly, WeightedSpace};
use crate::steady_core::ModelParams;

/// Smooth nonincreasing step: 1 for z ≤ 1, 0 for z ≥ 2.
pub fn smooth_step(z: f64) -> f64 {
    fn psi(t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else {
            (-1.0 / t).exp()
        }
    }
    if z <= 1.0 {
        1.0
    } else if z >= 2.0 {
        0.0
    } else {
        let a = psi(2.0 - z);
        a / (a + psi(z - 1.0))
    }
}

/// Θ(y) = Θ₁(e^{-s₀/2} y / (2σ)).
fn cutoff(y: f64, s0: f64, sigma: f64) -> f64 {
    smooth_step((-0.5 * s0).exp() * y / (2.0 * sigma))
}

fn eigen_family(ell: usize, params: &ModelParams) -> Result<Vec<EigenPoly>> {
    let space = WeightedSpace::for_params(params)?;
    (0..=ell).map(|j| eigenpoly(j, &space, params)).collect()
}

fn check_perturbation(d: &[f64], ell: usize, eps: f64, lambda: f64, s0: f64) -> Result<()> {
    if d.len() != ell {
        return invalid(format!("expected {ell} perturbation coefficients, got {}", d.len()));
    }
    let bound = eps * (-lambda * s0).exp();
    let total: f64 = d.iter().map(|v| v.abs()).sum();
    if total > bound {
        return invalid(format!("sum |d_j| = {total:e} exceeds eps e^(-λ s0) = {bound:e}"));
    }
    Ok(())
}

/// Parameters of the gradient blow-up seed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GbuSeedSpec {
    pub ell: usize,
    pub eps: f64,
    pub s0: f64,
    /// Coefficients of φ_0..φ_{ℓ-1}.
    pub d: Vec<f64>,
    /// Cutoff scale: Θ = 1 for x ≤ 2σ, 0 for x ≥ 4σ (physical variables).
    pub sigma: f64,
    /// Glue constant K̃ in ŷ = K̃ e^{-γ s₀}; when absent ŷ is the geometric mean of the
    /// inner scale a_* e^{-η s₀} and 1.
    pub k_tilde: Option<f64>,
}

impl GbuSeedSpec {
    pub fn new(ell: usize, s0: f64) -> Self {
        Self {
            ell,
            eps: 0.5,
            s0,
            d: vec![0.0; ell],
            sigma: 0.5,
            k_tilde: None,
        }
    }
}

/// The built seed and the constants used.
#[derive(Debug, Clone)]
pub struct GbuSeed {
    pub u0: GridFunction,
    pub lambda: f64,
    pub eta: f64,
    pub gamma: f64,
    pub a_star: f64,
    /// Root of the glue condition h(a) = 0.
    pub a: f64,
    /// Residual |h(a)| after the root solve.
    pub glue_residual: f64,
    /// Glue point in similarity and physical variables.
    pub glue_y: f64,
    pub glue_x: f64,
    /// Shift of the inner layer in physical variables: u0 = U_A on [0, glue_x].
    pub inner_shift: f64,
    /// e^{-s₀}, the expected distance to the blow-up time.
    pub tau0: f64,
}

/// Gradient blow-up seed u0(x) = e^{-ks₀} w0(x e^{s₀/2}) with
/// w0 = e^{-λs₀} U_a(e^{ηs₀}y) on [0, ŷ] and Θ(U - e^{-λs₀}φ_ℓ + Σ d_j φ_j) beyond.
pub fn build_gbu_data(spec: &GbuSeedSpec, params: &ModelParams, grid: Arc<Grid>) -> Result<GbuSeed> {
    let ell = spec.ell;
    if ell < 1 {
        return invalid("ell must be at least 1");
    }
    if !(spec.s0 > 0.0 && spec.sigma > 0.0 && spec.eps > 0.0) {
        return invalid("s0, sigma and eps must be positive");
    }
    let beta = params.beta;
    let lambda = ell as f64 - params.k;
    let eta = lambda / (1.0 - beta);
    let gamma = beta * eta / (beta + 2.0);
    check_perturbation(&spec.d, ell, spec.eps, lambda, spec.s0)?;
    let phis = eigen_family(ell, params)?;
    let phi = &phis[ell];
    let a_star = (phi.phi0() / params.c_p).powf(1.0 / (1.0 - beta));
    let s0 = spec.s0;
    let glue_y = match spec.k_tilde {
        Some(kt) => kt * (-gamma * s0).exp(),
        None => (a_star * (-eta * s0).exp()).sqrt(),
    };
    let pert = |y: f64| -> f64 {
        spec.d
            .iter()
            .zip(&phis)
            .map(|(dj, pj)| dj * pj.eval(y))
            .sum()
    };
    let big_y = (eta * s0).exp() * glue_y;
    let target = phi.eval(glue_y) - (lambda * s0).exp() * pert(glue_y);
    // h(a) = U_a(Y) - U(Y) + target, decreasing in a
    let h = |a: f64| params.u_a(a, big_y) - params.u(big_y) + target;
    if !(target > 0.0) {
        return Err(Error::NoConvergence(format!(
            "glue condition has no root: φ_ℓ(ŷ) - e^(λ s0) Σ d_j φ_j(ŷ) = {target:e} at ŷ = {glue_y}"
        )));
    }
    let (mut lo, mut hi) = (a_star * 1e-3, a_star * 1e3);
    while h(lo) < 0.0 {
        lo *= 1e-3;
        if lo < 1e-300 {
            return Err(Error::NoConvergence("glue root not bracketed".into()));
        }
    }
    while h(hi) > 0.0 {
        hi *= 1e3;
        if hi > 1e300 {
            return Err(Error::NoConvergence("glue root not bracketed (s0 too small?)".into()));
        }
    }
    let la = bisect(|l: f64| h(l.exp()), lo.ln(), hi.ln(), 1e-15);
    let a = la.exp();
    let glue_residual = h(a).abs();
    if glue_residual > 1e-10 {
        return Err(Error::NoConvergence(format!("glue residual {glue_residual:e}")));
    }
    let tau0 = (-s0).exp();
    let ek = (-params.k * s0).exp();
    let el = (-lambda * s0).exp();
    let ee = (eta * s0).exp();
    let scale = (0.5 * s0).exp();
    let sigma = spec.sigma;
    let w0 = |y: f64| -> f64 {
        if y <= glue_y {
            el * params.u_a(a, ee * y)
        } else {
            let th = cutoff(y, s0, sigma);
            if th == 0.0 {
                0.0
            } else {
                th * (params.u(y) - el * phi.eval(y) + pert(y))
            }
        }
    };
    let u0 = GridFunction::from_fn(Arc::clone(&grid), 0.0, |x| ek * w0(x * scale))?;
    let floor = -1e-14 * u0.sup_norm().max(1.0);
    if let Some(i) = u0.values.iter().position(|&v| v < floor) {
        return Err(Error::Construction(format!(
            "seed is negative at x = {} (reduce sigma)",
            u0.nodes()[i]
        )));
    }
    Ok(GbuSeed {
        u0,
        lambda,
        eta,
        gamma,
        a_star,
        a,
        glue_residual,
        glue_y,
        glue_x: glue_y / scale,
        inner_shift: a * (-(eta + 0.5) * s0).exp(),
        tau0,
    })
}

/// Parameters of the recovery seed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RbcSeedSpec {
    pub ell: usize,
    pub eps: f64,
    pub s0: f64,
    pub d: Vec<f64>,
    pub sigma: f64,
}

impl RbcSeedSpec {
    pub fn new(ell: usize, s0: f64) -> Self {
        Self {
            ell,
            eps: 0.1,
            s0,
            d: vec![0.0; ell],
            sigma: 0.125,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RbcSeed {
    /// z0 = u0 - U.
    pub z0: GridFunction,
    pub lambda: f64,
    pub tau0: f64,
    /// u0(0) = z0(0).
    pub boundary_value: f64,
}

/// Recovery seed z0(x) = e^{-ks₀} v0(x e^{s₀/2}) with
/// v0 = Θ(e^{-λs₀}φ_ℓ + Σ d_j φ_j) + (Θ - 1) U.
pub fn build_rbc_data(spec: &RbcSeedSpec, params: &ModelParams, grid: Arc<Grid>) -> Result<RbcSeed> {
    let ell = spec.ell;
    if ell < 1 {
        return invalid("ell must be at least 1");
    }
    if !(spec.s0 > 0.0 && spec.sigma > 0.0 && spec.eps > 0.0) {
        return invalid("s0, sigma and eps must be positive");
    }
    let lambda = ell as f64 - params.k;
    let phis = eigen_family(ell, params)?;
    let phi = &phis[ell];
    if spec.eps >= phi.phi0() {
        return invalid(format!("eps = {} must be below φ_ℓ(0) = {}", spec.eps, phi.phi0()));
    }
    check_perturbation(&spec.d, ell, spec.eps, lambda, spec.s0)?;
    let s0 = spec.s0;
    let ek = (-params.k * s0).exp();
    let el = (-lambda * s0).exp();
    let scale = (0.5 * s0).exp();
    let sigma = spec.sigma;
    let v0 = |y: f64| -> f64 {
        let th = cutoff(y, s0, sigma);
        let modes: f64 = el * phi.eval(y)
            + spec
                .d
                .iter()
                .zip(&phis)
                .map(|(dj, pj)| dj * pj.eval(y))
                .sum::<f64>();
        th * modes + (th - 1.0) * params.u(y)
    };
    let z0 = GridFunction::from_fn(Arc::clone(&grid), 0.0, |x| ek * v0(x * scale))?;
    let floor = -1e-14 * z0.sup_norm().max(1.0);
    for (&x, &z) in z0.nodes().iter().zip(&z0.values) {
        if params.u(x) + z < floor {
            return Err(Error::Construction(format!("u0 = U + z0 is negative at x = {x}")));
        }
    }
    let boundary_value = z0.values[0];
    if !(boundary_value > 0.0) {
        return Err(Error::Construction(format!("u0(0) = {boundary_value} is not positive")));
    }
    Ok(RbcSeed {
        z0,
        lambda,
        tau0: (-s0).exp(),
        boundary_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_shape() {
        assert_eq!(smooth_step(0.5), 1.0);
        assert_eq!(smooth_step(2.5), 0.0);
        assert!((smooth_step(1.5) - 0.5).abs() < 1e-15);
        let mut prev = 1.0;
        for i in 0..=100 {
            let v = smooth_step(1.0 + i as f64 / 100.0);
            assert!(v <= prev);
            prev = v;
        }
    }
}
