//! The special function Y (Y'' + (α/z) Y' = Y, Y(0)=1, Y'(0)=0), the heat kernels
//! H₀, H₁ of the α-Bessel operator, and the semigroup kernels G₀, G₁ of e^{-sL}.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{invalid, Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::quad::{integrate, QuadConfig};
use crate::steady_core::ModelParams;

/// Above this argument the scaled bracket switches from the series to the
/// large-argument expansion of the modified Bessel function.
const ASYMPTOTIC_FROM: f64 = 30.0;

/// Power series Y(z) = Σ c_m z^{2m}, c_{m+1} = c_m / [2(m+1)(2m+1+α)].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct YFunction {
    pub alpha: f64,
    /// Largest argument accepted by the unscaled evaluation.
    pub radius: f64,
}

impl YFunction {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return invalid("alpha must be positive");
        }
        Ok(Self { alpha, radius: 60.0 })
    }

    pub fn with_radius(mut self, radius: f64) -> Self {
        self.radius = radius;
        self
    }

    /// Series coefficients c_0..=c_m.
    pub fn coefficients(&self, m: usize) -> Vec<f64> {
        let mut c = vec![1.0];
        for i in 0..m {
            let next = c[i] / (2.0 * (i as f64 + 1.0) * (2.0 * i as f64 + 1.0 + self.alpha));
            c.push(next);
        }
        c
    }

    /// Y^{(order)}(z) for order 0 or 1.
    pub fn eval(&self, z: f64, order: u8) -> Result<f64> {
        if !(z >= 0.0) || z > self.radius {
            return Err(Error::OutOfRange {
                what: "the series for Y",
                value: z,
            });
        }
        Ok(self.series(z, order, 1.0))
    }

    /// e^{-z} Y^{(order)}(z) for any z >= 0.
    pub fn scaled(&self, z: f64, order: u8) -> f64 {
        if z <= ASYMPTOTIC_FROM {
            self.series(z, order, (-z).exp())
        } else {
            self.asymptotic(z, order)
        }
    }

    /// `lead` times the series; positive terms, stopped at relative size 1e-17.
    fn series(&self, z: f64, order: u8, lead: f64) -> f64 {
        if order == 1 && z == 0.0 {
            return 0.0;
        }
        let z2 = z * z;
        let mut term = lead;
        let mut sum = if order == 0 { term } else { 0.0 };
        let mut m = 0usize;
        loop {
            term *= z2 / (2.0 * (m as f64 + 1.0) * (2.0 * m as f64 + 1.0 + self.alpha));
            m += 1;
            let contrib = if order == 0 {
                term
            } else {
                2.0 * m as f64 * term / z
            };
            sum += contrib;
            if contrib <= 1e-17 * sum && m as f64 > z {
                break;
            }
            if m > 10_000 || term == 0.0 {
                break;
            }
        }
        sum
    }

    /// Y = Γ(ν+1)(z/2)^{-ν} I_ν(z), Y' = Γ(ν+1) 2^ν z^{-ν} I_{ν+1}(z), ν = (α-1)/2,
    /// with e^{-z} I_μ(z) ~ (2πz)^{-1/2} Σ (-1)^k a_k(μ) z^{-k}.
    fn asymptotic(&self, z: f64, order: u8) -> f64 {
        let nu = 0.5 * (self.alpha - 1.0);
        let mu = if order == 0 { nu } else { nu + 1.0 };
        let four_mu2 = 4.0 * mu * mu;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..200 {
            let odd = (2 * k - 1) as f64;
            let next = -term * (four_mu2 - odd * odd) / (k as f64 * 8.0 * z);
            if next.abs() >= term.abs() {
                break;
            }
            term = next;
            sum += term;
            if term.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        let ln_pref = ln_gamma(nu + 1.0) + nu * 2f64.ln() - nu * z.ln();
        ln_pref.exp() * sum / (2.0 * std::f64::consts::PI * z).sqrt()
    }
}

/// α and the normalization C_α = [2^α Γ((α+1)/2)]^{-1}.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelParams {
    pub alpha: f64,
    pub c_alpha: f64,
    pub y: YFunction,
}

impl KernelParams {
    pub fn new(alpha: f64) -> Result<Self> {
        let y = YFunction::new(alpha)?;
        Ok(Self {
            alpha,
            c_alpha: 1.0 / (2f64.powf(alpha) * gamma(0.5 * (alpha + 1.0))),
            y,
        })
    }

    pub fn for_params(params: &ModelParams) -> Result<Self> {
        Self::new(params.alpha)
    }
}

/// H_i(t, x; ξ) = C_α t^{-(α+1)/2} e^{-(x-ξ)²/4t} [e^{-z} Y^{(i)}(z)], z = xξ/2t.
pub fn h_kernel(i: u8, t: f64, x: f64, xi: f64, kp: &KernelParams) -> Result<f64> {
    if !(t > 0.0) {
        return invalid("kernel time must be positive");
    }
    if i > 1 {
        return invalid("kernel order must be 0 or 1");
    }
    let z = x * xi / (2.0 * t);
    let d = x - xi;
    Ok(kp.c_alpha * t.powf(-0.5 * (kp.alpha + 1.0)) * (-d * d / (4.0 * t)).exp() * kp.y.scaled(z, i))
}

/// G₀(s,y,ξ) = e^{ks} H₀(1-e^{-s}, e^{-s/2}y, ξ) and G₁ = e^{(k-1/2)s} H₁(...).
pub fn g_kernel(i: u8, s: f64, y: f64, xi: f64, kp: &KernelParams, params: &ModelParams) -> Result<f64> {
    if !(s > 0.0) {
        return invalid("semigroup time must be positive");
    }
    let t = -(-s).exp_m1();
    let x = (-0.5 * s).exp() * y;
    let pref = if i == 0 {
        (params.k * s).exp()
    } else {
        ((params.k - 0.5) * s).exp()
    };
    Ok(pref * h_kernel(i, t, x, xi, kp)?)
}

fn upper_limit(t: f64, x: f64, degree: f64) -> f64 {
    x + 2.0 * t.sqrt() * (7.0 + 2.0 * degree.max(0.0).sqrt())
}

/// ∫₀^∞ H_order(t,x;ξ) ξ^α dξ by adaptive Gauss-Kronrod, split at the peak.
pub fn kernel_mass(order: u8, t: f64, x: f64, kp: &KernelParams, cfg: &QuadConfig) -> Result<f64> {
    if !(t > 0.0) {
        return invalid("kernel time must be positive");
    }
    let top = upper_limit(t, x, 0.0);
    let w = 2.0 * t.sqrt();
    let breaks = [x, x - w, x + w, w.min(x)];
    let r = integrate(
        |xi| h_kernel(order, t, x, xi, kp).unwrap_or(f64::NAN) * xi.powf(kp.alpha),
        0.0,
        top,
        &breaks,
        cfg,
    )?;
    Ok(r.value)
}

/// ∫₀^∞ H₀(t,x;ξ) ξ^α dξ, which equals 1.
pub fn check_normalization(t: f64, x: f64, kp: &KernelParams) -> Result<f64> {
    kernel_mass(0, t, x, kp, &QuadConfig::default())
}

/// Admissible growth of a function fed to the semigroup: |f(ξ)| ≤ C(ξ^degree + ξ^{-singular_order}).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthTag {
    pub degree: f64,
    pub singular_order: f64,
}

impl GrowthTag {
    pub fn polynomial(degree: f64) -> Self {
        Self {
            degree,
            singular_order: 0.0,
        }
    }

    pub fn validate(&self, alpha: f64) -> Result<()> {
        if !(self.degree >= 0.0 && self.degree.is_finite()) {
            return invalid("growth degree must be finite and nonnegative");
        }
        if !(self.singular_order < 0.5 * (alpha + 3.0)) {
            return invalid(format!(
                "singularity order {} at 0 is not below (α+3)/2 = {}",
                self.singular_order,
                0.5 * (alpha + 3.0)
            ));
        }
        Ok(())
    }
}

/// W(y,s) = ∫ G₀(s,y;ξ) f(ξ) ξ^α dξ at one point.
pub fn semigroup_at(
    s: f64,
    f: &(dyn Fn(f64) -> f64 + Sync),
    growth: GrowthTag,
    y: f64,
    kp: &KernelParams,
    params: &ModelParams,
    cfg: &QuadConfig,
) -> Result<f64> {
    if !(s > 0.0) {
        return invalid("semigroup time must be positive");
    }
    growth.validate(kp.alpha)?;
    let t = -(-s).exp_m1();
    let x = (-0.5 * s).exp() * y;
    let top = upper_limit(t, x, growth.degree);
    let w = 2.0 * t.sqrt();
    let breaks = [x, x - w, x + w, w.min(x)];
    let r = integrate(
        |xi| h_kernel(0, t, x, xi, kp).unwrap_or(f64::NAN) * f(xi) * xi.powf(kp.alpha),
        0.0,
        top,
        &breaks,
        cfg,
    )?;
    Ok((params.k * s).exp() * r.value)
}

/// e^{-sL} f sampled on the nodes of `out`, stamped with `s`.
pub fn apply_semigroup(
    s: f64,
    f: &(dyn Fn(f64) -> f64 + Sync),
    growth: GrowthTag,
    kp: &KernelParams,
    params: &ModelParams,
    out: Arc<Grid>,
) -> Result<GridFunction> {
    let cfg = QuadConfig::default();
    let values = out
        .nodes()
        .par_iter()
        .map(|&y| semigroup_at(s, f, growth, y, kp, params, &cfg))
        .collect::<Result<Vec<f64>>>()?;
    GridFunction::new(out, values, s)
}

/// Semigroup applied to samples on a grid, interpolated with monotone cubics
/// and held constant beyond the last node.
pub fn apply_semigroup_to_samples(
    s: f64,
    f: &GridFunction,
    kp: &KernelParams,
    params: &ModelParams,
    out: Arc<Grid>,
) -> Result<GridFunction> {
    let m = f.interpolant();
    let g = move |xi: f64| m.eval(xi);
    apply_semigroup(s, &g, GrowthTag::polynomial(0.0), kp, params, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_values_and_coefficients() {
        let y = YFunction::new(1.5).unwrap();
        assert_eq!(y.eval(0.0, 0).unwrap(), 1.0);
        assert_eq!(y.eval(0.0, 1).unwrap(), 0.0);
        let c = y.coefficients(2);
        assert!((c[1] - 0.2).abs() < 1e-16);
        assert!((c[2] - 0.2 / 18.0).abs() < 1e-16);
        assert!(y.eval(61.0, 0).is_err());
    }

    #[test]
    fn series_and_asymptotic_agree_at_switch() {
        for alpha in [1.5, 4.0 / 3.0, 1.9] {
            let y = YFunction::new(alpha).unwrap();
            for order in [0, 1] {
                let s = y.series(ASYMPTOTIC_FROM, order, (-ASYMPTOTIC_FROM).exp());
                let a = y.asymptotic(ASYMPTOTIC_FROM, order);
                assert!(((s - a) / s).abs() < 1e-13, "alpha {alpha} order {order}: {s} vs {a}");
            }
        }
    }

    #[test]
    fn kernel_special_values() {
        let kp = KernelParams::new(1.5).unwrap();
        let (t, x) = (0.7, 1.3);
        let h0 = h_kernel(0, t, x, 0.0, &kp).unwrap();
        let want = kp.c_alpha * t.powf(-1.25) * (-x * x / (4.0 * t)).exp();
        assert!((h0 - want).abs() < 1e-15);
        assert_eq!(h_kernel(1, t, x, 0.0, &kp).unwrap(), 0.0);
        assert!(h_kernel(0, 0.0, 1.0, 1.0, &kp).is_err());
    }

    #[test]
    fn normalization_at_origin() {
        let kp = KernelParams::new(1.5).unwrap();
        assert!((check_normalization(1.0, 0.0, &kp).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn growth_tag_admissibility() {
        assert!(GrowthTag::polynomial(3.0).validate(1.5).is_ok());
        let bad = GrowthTag {
            degree: 0.0,
            singular_order: 2.5,
        };
        assert!(bad.validate(1.5).is_err());
    }
}
