//! Spatial discretization and the implicit Euler step.

use crate::error::{Error, Result};
use crate::steady_core::ModelParams;

/// Which equation the nodes carry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Source {
    /// |q|^p, optionally with |q| capped at M.
    Power { cap: Option<f64> },
    /// |b_i + q|^p - |b_i|^p with b_i = U_a'(x_i).
    Shifted { a: f64 },
}

/// Stencil branch used at a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Mode {
    Centered,
    UpwindRight,
    UpwindLeft,
}

/// Newton iterations after which the stencil branches are frozen, so that the
/// iteration does not cycle between branches of the piecewise-smooth operator.
const FREEZE_AFTER: usize = 4;

/// Precomputed geometry and source data for one grid.
pub(crate) struct Scheme {
    pub p: f64,
    pub x: Vec<f64>,
    pub source: Source,
    /// Background slope per node for the shifted source.
    pub b: Vec<f64>,
    /// Neumann condition at the left end (ghost node) instead of Dirichlet.
    pub neumann_left: bool,
}

/// Newton outcome for one implicit step.
pub(crate) struct StepOutcome {
    pub iterations: usize,
    pub fallback_cells: usize,
}

impl Scheme {
    pub fn new(params: &ModelParams, x: Vec<f64>, source: Source, neumann_left: bool) -> Self {
        let b = match source {
            Source::Shifted { a } => x.iter().map(|&xi| params.u_a_prime(a, xi)).collect(),
            Source::Power { .. } => vec![0.0; x.len()],
        };
        Self {
            p: params.p,
            x,
            source,
            b,
            neumann_left,
        }
    }

    /// Source value and derivative at slope q for node i.
    #[inline]
    fn g(&self, i: usize, q: f64) -> (f64, f64) {
        let p = self.p;
        match self.source {
            Source::Power { cap } => {
                let aq = q.abs();
                match cap {
                    Some(m) if aq >= m => (m.powf(p), 0.0),
                    _ => {
                        let v = aq.powf(p - 1.0);
                        (v * aq, p * v * q.signum())
                    }
                }
            }
            Source::Shifted { .. } => {
                let bi = self.b[i];
                let s = bi + q;
                let as_ = s.abs();
                let v = as_.powf(p - 1.0);
                (v * as_ - bi.powf(p), p * v * s.signum())
            }
        }
    }

    /// Slope at which the source is smallest.
    #[inline]
    fn g_min_at(&self, i: usize) -> f64 {
        match self.source {
            Source::Power { .. } => 0.0,
            Source::Shifted { .. } => -self.b[i],
        }
    }

    /// Residual and tridiagonal Jacobian of F(u)_i = u_xx + g(u_x) at interior node i.
    /// Returns (value, d/du_{i-1}, d/du_i, d/du_{i+1}, used_fallback).
    #[inline]
    fn operator_row(&self, i: usize, u: &[f64]) -> (f64, f64, f64, f64, bool) {
        let (f, jl, jc, jr, mode) = self.operator_row_mode(i, u, None);
        (f, jl, jc, jr, mode != Mode::Centered)
    }

    /// As [`Self::operator_row`] with the stencil branch optionally forced.
    #[inline]
    fn operator_row_mode(&self, i: usize, u: &[f64], force: Option<Mode>) -> (f64, f64, f64, f64, Mode) {
        let hm = self.x[i] - self.x[i - 1];
        let hp = self.x[i + 1] - self.x[i];
        let s = hm + hp;
        let dp = (u[i + 1] - u[i]) / hp;
        let dm = (u[i] - u[i - 1]) / hm;
        let lap = 2.0 * (dp - dm) / s;
        let (cl, cr) = (2.0 / (s * hm), 2.0 / (s * hp));
        let centered = match force {
            Some(m) => m == Mode::Centered,
            None => {
                let q = (hm * dp + hp * dm) / s;
                let gp = self.g(i, q).1;
                gp * hp <= 2.0 && -gp * hm <= 2.0
            }
        };
        if centered {
            // centered slope, monotone in the neighbours
            let q = (hm * dp + hp * dm) / s;
            let (gv, gp) = self.g(i, q);
            let ql = -hp / (s * hm);
            let qr = hm / (s * hp);
            let qc = -(ql + qr);
            return (
                lap + gv,
                cl + gp * ql,
                -(cl + cr) + gp * qc,
                cr + gp * qr,
                Mode::Centered,
            );
        }
        // upwind: max(g(max(D+, q*)), g(min(D-, q*)))
        let qs = self.g_min_at(i);
        let right = dp.max(qs);
        let left = dm.min(qs);
        let (gr, gpr) = self.g(i, right);
        let (gl, gpl) = self.g(i, left);
        let use_right = match force {
            Some(m) => m == Mode::UpwindRight,
            None => gr >= gl,
        };
        let (mut jl, mut jc, mut jr) = (cl, -(cl + cr), cr);
        if use_right {
            if dp > qs {
                jr += gpr / hp;
                jc -= gpr / hp;
            }
            (lap + gr, jl, jc, jr, Mode::UpwindRight)
        } else {
            if dm < qs {
                jc += gpl / hm;
                jl -= gpl / hm;
            }
            (lap + gl, jl, jc, jr, Mode::UpwindLeft)
        }
    }

    /// One implicit Euler step: solve v - dt F(v) = u with boundary values of `u`
    /// (right end fixed; left end fixed or Neumann). Newton on the tridiagonal system.
    pub fn implicit_step(
        &self,
        u: &[f64],
        dt: f64,
        v: &mut Vec<f64>,
        tol: f64,
        max_iter: usize,
    ) -> Result<StepOutcome> {
        let n = self.x.len();
        v.clear();
        v.extend_from_slice(u);
        let lo = if self.neumann_left { 0 } else { 1 };
        let hi = n - 2;
        let m = hi - lo + 1;
        let mut a = vec![0.0; m];
        let mut bdiag = vec![0.0; m];
        let mut c = vec![0.0; m];
        let mut r = vec![0.0; m];
        let scale = u.iter().fold(1e-300f64, |acc, w| acc.max(w.abs()));
        let mut modes = vec![Mode::Centered; n];
        for it in 1..=max_iter {
            let mut fallback = 0;
            let force = it > FREEZE_AFTER;
            for i in lo..=hi {
                let k = i - lo;
                let (f, jl, jc, jr) = if i == 0 {
                    let h = self.x[1] - self.x[0];
                    let w = 2.0 / (h * h);
                    (w * (v[1] - v[0]), 0.0, -w, w)
                } else {
                    let (f, jl, jc, jr, mode) =
                        self.operator_row_mode(i, v, if force { Some(modes[i]) } else { None });
                    modes[i] = mode;
                    if mode != Mode::Centered {
                        fallback += 1;
                    }
                    (f, jl, jc, jr)
                };
                r[k] = -(v[i] - u[i] - dt * f);
                a[k] = -dt * jl;
                bdiag[k] = 1.0 - dt * jc;
                c[k] = -dt * jr;
            }
            thomas(&a, &mut bdiag, &c, &mut r)?;
            let mut dmax: f64 = 0.0;
            for k in 0..m {
                v[lo + k] += r[k];
                dmax = dmax.max(r[k].abs());
            }
            if !dmax.is_finite() {
                return Err(Error::NonFinite("Newton update".into()));
            }
            let vmax = v.iter().fold(scale, |acc, w| acc.max(w.abs()));
            if dmax <= tol * vmax {
                return Ok(StepOutcome {
                    iterations: it,
                    fallback_cells: fallback,
                });
            }
        }
        Err(Error::NoConvergence(format!(
            "Newton did not converge in {max_iter} iterations (dt = {dt:e})"
        )))
    }

    /// Number of interior nodes where the centered slope fails the monotonicity bound.
    pub fn fallback_count(&self, u: &[f64]) -> usize {
        (1..self.x.len() - 1)
            .filter(|&i| self.operator_row(i, u).4)
            .count()
    }

    /// Discrete residual u_xx + g(u_x) at the interior nodes.
    pub fn residual(&self, u: &[f64]) -> Vec<f64> {
        (1..self.x.len() - 1).map(|i| self.operator_row(i, u).0).collect()
    }
}

/// Tridiagonal solve in place: a = sub, b = diag, c = super, d = rhs -> solution.
fn thomas(a: &[f64], b: &mut [f64], c: &[f64], d: &mut [f64]) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        if b[i - 1] == 0.0 {
            return Err(Error::NoConvergence("singular tridiagonal pivot".into()));
        }
        let w = a[i] / b[i - 1];
        b[i] -= w * c[i - 1];
        d[i] -= w * d[i - 1];
    }
    if b[n - 1] == 0.0 {
        return Err(Error::NoConvergence("singular tridiagonal pivot".into()));
    }
    d[n - 1] /= b[n - 1];
    for i in (0..n - 1).rev() {
        d[i] = (d[i] - c[i] * d[i + 1]) / b[i];
    }
    Ok(())
}

/// Second-order one-sided slope at the left end.
pub(crate) fn left_slope(x: &[f64], u: &[f64]) -> f64 {
    let h1 = x[1] - x[0];
    let h2 = x[2] - x[1];
    -(2.0 * h1 + h2) / (h1 * (h1 + h2)) * u[0] + (h1 + h2) / (h1 * h2) * u[1]
        - h1 / (h2 * (h1 + h2)) * u[2]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thomas_solves_small_system() {
        let a = [0.0, -1.0, -1.0];
        let mut b = [2.0, 2.0, 2.0];
        let c = [-1.0, -1.0, 0.0];
        let mut d = [1.0, 0.0, 1.0];
        thomas(&a, &mut b, &c, &mut d).unwrap();
        for v in d {
            assert!((v - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn left_slope_exact_for_quadratics() {
        let x = [0.0, 0.1, 0.35];
        let u: Vec<f64> = x.iter().map(|t| 2.0 * t + 3.0 * t * t).collect();
        assert!((left_slope(&x, &u) - 2.0).abs() < 1e-13);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let params = ModelParams::new(3.0).unwrap();
        let x: Vec<f64> = (0..12).map(|i| (i as f64 * 0.1).powf(1.3)).collect();
        let u: Vec<f64> = x.iter().map(|t| (3.0 * t).sin() + 0.4 * t).collect();
        for source in [
            Source::Power { cap: None },
            Source::Power { cap: Some(2.0) },
            Source::Shifted { a: 0.05 },
        ] {
            let s = Scheme::new(&params, x.clone(), source, false);
            for i in 1..11 {
                let (_, jl, jc, jr, _) = s.operator_row(i, &u);
                for (off, j) in [(-1i64, jl), (0, jc), (1, jr)] {
                    let k = (i as i64 + off) as usize;
                    let eps = 1e-7;
                    let mut up = u.clone();
                    up[k] += eps;
                    let mut dn = u.clone();
                    dn[k] -= eps;
                    let fd = (s.operator_row(i, &up).0 - s.operator_row(i, &dn).0) / (2.0 * eps);
                    assert!((fd - j).abs() < 1e-4 * (1.0 + j.abs()), "{source:?} node {i} off {off}: {fd} vs {j}");
                }
            }
        }
    }
}
