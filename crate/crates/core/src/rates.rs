//! Power-law fits of boundary traces and comparisons against the blow-up and
//! recovery rates and profiles.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::grid::GridFunction;
use crate::spectral::{eigenpoly, WeightedSpace};
use crate::steady_core::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SingularTime {
    Known(f64),
    /// Fitted: the reported time maximizes r².
    Fit,
}

#[derive(Debug, Clone, Serialize)]
pub struct RateFit {
    /// v ≈ L (T − t)^exponent.
    pub exponent: f64,
    pub coefficient: f64,
    pub singular_time: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub points: usize,
    /// Range of L over fits restricted to thirds of the window.
    pub coefficient_spread: Option<(f64, f64)>,
    pub warnings: Vec<String>,
}

struct LogFit {
    slope: f64,
    intercept: f64,
    r2: f64,
}

fn log_fit(series: &[(f64, f64)], t_sing: f64) -> LogFit {
    let n = series.len() as f64;
    let (mut sx, mut sy) = (0.0, 0.0);
    let pts: Vec<(f64, f64)> = series.iter().map(|&(t, v)| ((t_sing - t).ln(), v.ln())).collect();
    for &(x, y) in &pts {
        sx += x;
        sy += y;
    }
    let (mx, my) = (sx / n, sy / n);
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in &pts {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ss_res: f64 = pts.iter().map(|&(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r2 = if syy > 0.0 { (1.0 - ss_res / syy).clamp(0.0, 1.0) } else { 1.0 };
    LogFit { slope, intercept, r2 }
}

/// Log-log least squares of v against T − t.
pub fn fit_power_law(series: &[(f64, f64)], singular_time: SingularTime) -> Result<RateFit> {
    if series.len() < 3 {
        return invalid("a power-law fit needs at least three points");
    }
    if let Some(&(t, v)) = series.iter().find(|(_, v)| !(*v > 0.0)) {
        return invalid(format!("non-positive value {v} at t = {t}"));
    }
    let t_max = series.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let t_min = series.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let t_sing = match singular_time {
        SingularTime::Known(t) => {
            if !(t > t_max) {
                return invalid(format!("singular time {t} not after the data (last t = {t_max})"));
            }
            t
        }
        SingularTime::Fit => fit_singular_time(series, t_min, t_max)?,
    };
    let f = log_fit(series, t_sing);
    let mut warnings = Vec::new();
    if series.len() < 10 {
        warnings.push(format!("only {} points in the window", series.len()));
    }
    let decades = ((t_sing - t_min) / (t_sing - t_max)).log10();
    if decades < 1.0 {
        warnings.push(format!("window spans {decades:.2} decades of T - t"));
    }
    let coefficient_spread = if series.len() >= 9 {
        let mut sorted = series.to_vec();
        sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let third = sorted.len() / 3;
        let ls: Vec<f64> = (0..3)
            .map(|i| {
                let end = if i == 2 { sorted.len() } else { (i + 1) * third };
                log_fit(&sorted[i * third..end], t_sing).intercept.exp()
            })
            .collect();
        Some((
            ls.iter().cloned().fold(f64::INFINITY, f64::min),
            ls.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        ))
    } else {
        None
    };
    Ok(RateFit {
        exponent: f.slope,
        coefficient: f.intercept.exp(),
        singular_time: t_sing,
        r_squared: f.r2,
        window: (t_min, t_max),
        points: series.len(),
        coefficient_spread,
        warnings,
    })
}

/// Scan of log(T − t_max) followed by golden-section refinement of 1 − r².
fn fit_singular_time(series: &[(f64, f64)], t_min: f64, t_max: f64) -> Result<f64> {
    let span = (t_max - t_min).max(f64::MIN_POSITIVE);
    let loss = |lg: f64| 1.0 - log_fit(series, t_max + lg.exp()).r2_unclamped(series, t_max + lg.exp());
    let (lo, hi) = ((span * 1e-10).ln(), (span * 1e3).ln());
    let n = 400;
    let mut best = (f64::INFINITY, lo);
    for i in 0..=n {
        let lg = lo + (hi - lo) * i as f64 / n as f64;
        let l = loss(lg);
        if l < best.0 {
            best = (l, lg);
        }
    }
    let h = (hi - lo) / n as f64;
    let (mut a, mut b) = (best.1 - h, best.1 + h);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (loss(c), loss(d));
    for _ in 0..200 {
        if (b - a).abs() < 1e-15 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = loss(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = loss(d);
        }
    }
    let t = t_max + (0.5 * (a + b)).exp();
    if !t.is_finite() {
        return Err(Error::NoConvergence("singular-time fit".into()));
    }
    Ok(t)
}

impl LogFit {
    /// r² without clamping, so the optimizer sees a smooth objective.
    fn r2_unclamped(&self, series: &[(f64, f64)], t_sing: f64) -> f64 {
        let n = series.len() as f64;
        let pts: Vec<(f64, f64)> = series.iter().map(|&(t, v)| ((t_sing - t).ln(), v.ln())).collect();
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
        let ss_res: f64 = pts
            .iter()
            .map(|&(x, y)| (y - self.intercept - self.slope * x).powi(2))
            .sum();
        if syy > 0.0 {
            1.0 - ss_res / syy
        } else {
            1.0
        }
    }
}

/// Points whose distance to the singular time lies in [gap_lo, gap_hi].
pub fn select_window(series: &[(f64, f64)], t_sing: f64, gap_lo: f64, gap_hi: f64) -> Vec<(f64, f64)> {
    series
        .iter()
        .cloned()
        .filter(|&(t, _)| {
            let g = t_sing - t;
            g >= gap_lo && g <= gap_hi
        })
        .collect()
}

/// Smallest resolvable distance to the singular time: max of 10 time steps and
/// the time for diffusion across five finest cells.
pub fn resolution_floor(dt: f64, finest_cell: f64) -> f64 {
    (10.0 * dt).max((5.0 * finest_cell).powi(2))
}

/// The decade [floor, 10·floor] of T − t.
pub fn last_decade(series: &[(f64, f64)], t_sing: f64, floor: f64) -> Vec<(f64, f64)> {
    select_window(series, t_sing, floor, 10.0 * floor)
}

/// Exponent q with which the coefficient of an n-fold rate moves under the
/// scaling u ↦ α^{−k} u(√α x, T + α(t − T)).
pub fn scaling_exponent_q(params: &ModelParams, n: usize) -> f64 {
    1.0 / (2.0 * (params.p - 1.0)) - n as f64 / (params.p - 2.0)
}

/// Apply the scaling to a trace whose values carry the weight α^{value_power}
/// (−k for u(0, t), 1/(2(p − 1)) for u_x(0, t)). Times map as t' = T + (t − T)/α.
pub fn rescale_trace(trace: &[(f64, f64)], alpha: f64, t_sing: f64, value_power: f64) -> Vec<(f64, f64)> {
    let w = alpha.powf(value_power);
    trace
        .iter()
        .map(|&(t, v)| (t_sing + (t - t_sing) / alpha, w * v))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct GbuRateReport {
    pub n: usize,
    pub target_exponent: f64,
    pub fit: RateFit,
    pub relative_deviation: f64,
    /// M₀ = min over the window of m(t)(T − t)^{1/(p−2)}.
    pub m0: f64,
    /// m(t)(T − t)^{1/(p−2)} at the start of the window.
    pub q_start: f64,
    /// M₀ ≥ q_start / 2: the lower estimate holds with a constant not degenerating on the window.
    pub lower_bound_holds: bool,
    pub dynamic_range: f64,
    pub insufficient_range: bool,
}

/// Fit of the gradient trace on the part where m ∈ [m_lo, m_hi] (before its maximum).
pub fn gbu_rate_check(
    gradient_trace: &[(f64, f64)],
    n: usize,
    params: &ModelParams,
    m_range: (f64, f64),
) -> Result<GbuRateReport> {
    if n == 0 {
        return invalid("no vanishing intersection: rate check needs n >= 1");
    }
    let peak = gradient_trace
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |b, (i, p)| if p.1 > b.1 { (i, p.1) } else { b })
        .0;
    let window: Vec<(f64, f64)> = gradient_trace[..=peak]
        .iter()
        .cloned()
        .filter(|&(_, m)| m >= m_range.0 && m <= m_range.1)
        .collect();
    if window.len() < 3 {
        return Err(Error::Construction(format!(
            "gradient trace has {} points in [{}, {}]",
            window.len(),
            m_range.0,
            m_range.1
        )));
    }
    let fit = fit_power_law(&window, SingularTime::Fit)?;
    let target = -(n as f64) / (params.p - 2.0);
    let e = 1.0 / (params.p - 2.0);
    let q: Vec<f64> = window
        .iter()
        .map(|&(t, m)| m * (fit.singular_time - t).powf(e))
        .collect();
    let m0 = q.iter().cloned().fold(f64::INFINITY, f64::min);
    let lo = window.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let hi = window.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    Ok(GbuRateReport {
        n,
        target_exponent: target,
        relative_deviation: ((fit.exponent - target) / target).abs(),
        m0,
        q_start: q[0],
        lower_bound_holds: m0 > 0.0 && m0 >= 0.5 * q[0],
        dynamic_range: hi / lo,
        insufficient_range: hi / lo < 10.0,
        fit,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BubbleReport {
    pub t: f64,
    pub m: f64,
    pub a: f64,
    /// max over x ≤ x_win of |u_x − U_a'| / (1 + x).
    pub deviation: f64,
    /// max over x_lo ≤ x ≤ x_win of |u_x − U_a'| / x.
    pub c_estimate: f64,
    pub samples: usize,
}

/// Derivative at interior nodes by the three-point formula on nonuniform cells.
fn nodal_derivative(f: &GridFunction, i: usize) -> f64 {
    let (xs, u) = (f.nodes(), &f.values);
    let n = xs.len();
    if i == 0 {
        return crate::solver::boundary_slope(f);
    }
    if i == n - 1 {
        return (u[n - 1] - u[n - 2]) / (xs[n - 1] - xs[n - 2]);
    }
    let (hm, hp) = (xs[i] - xs[i - 1], xs[i + 1] - xs[i]);
    (u[i + 1] * hm * hm - u[i - 1] * hp * hp + u[i] * (hp * hp - hm * hm)) / (hm * hp * (hm + hp))
}

/// Compares u_x with the slope of the bubble U_{a(t)}, a(t) = β m^{1−p}.
pub fn bubble_profile_check(
    snapshot: &GridFunction,
    m: f64,
    params: &ModelParams,
    x_win: f64,
    x_lo: f64,
) -> Result<BubbleReport> {
    if !(m > 0.0) {
        return invalid("boundary gradient must be positive");
    }
    let a = params.shift_for_slope(m);
    let xs = snapshot.nodes();
    let mut deviation = 0.0f64;
    let mut c = 0.0f64;
    let mut samples = 0;
    for i in 0..xs.len() {
        let x = xs[i];
        if x > x_win {
            break;
        }
        let d = (nodal_derivative(snapshot, i) - params.u_a_prime(a, x)).abs();
        deviation = deviation.max(d / (1.0 + x));
        if x >= x_lo && x > 0.0 {
            c = c.max(d / x);
            samples += 1;
        }
    }
    Ok(BubbleReport {
        t: snapshot.t,
        m,
        a,
        deviation,
        c_estimate: c,
        samples,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileSample {
    pub t: f64,
    pub gap: f64,
    pub coefficient: f64,
    /// Relative sup-norm misfit on ŷ ∈ [0, ŷ_max].
    pub misfit: f64,
    pub nodes_used: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RbcProfileReport {
    pub n: usize,
    pub tau: f64,
    pub samples: Vec<ProfileSample>,
    pub max_misfit: f64,
    /// (max L − min L) / mean L over the samples.
    pub coefficient_drift: f64,
    /// Snapshots skipped for lying within the resolution floor of τ.
    pub degenerate: usize,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RbcProfileConfig {
    pub y_max: f64,
    /// Snapshots with τ − t below this are reported as degenerate.
    pub min_gap: f64,
    /// Minimum number of grid nodes in ŷ ∈ [0, ŷ_max].
    pub min_nodes: usize,
}

impl Default for RbcProfileConfig {
    fn default() -> Self {
        Self {
            y_max: 2.0,
            min_gap: 0.0,
            min_nodes: 5,
        }
    }
}

/// Snapshots hold u − U (singular-solver output). Rescales to ŷ = x/√(τ − t), v̂ = (τ − t)^{−n}(u − U) and fits one
/// scalar L against φ_n/φ_n(0).
pub fn rbc_profile_check(
    snapshots: &[GridFunction],
    tau: f64,
    n: usize,
    params: &ModelParams,
    cfg: &RbcProfileConfig,
) -> Result<RbcProfileReport> {
    let space = WeightedSpace::for_params(params)?;
    let phi = eigenpoly(n, &space, params)?;
    let phi0 = phi.phi0();
    let mut samples = Vec::new();
    let mut degenerate = 0;
    for snap in snapshots {
        let gap = tau - snap.t;
        if !(gap > 0.0) {
            continue;
        }
        if gap < cfg.min_gap {
            degenerate += 1;
            continue;
        }
        let sq = gap.sqrt();
        let scale = gap.powi(n as i32);
        let mut pts = Vec::new();
        for (&x, &v) in snap.nodes().iter().zip(&snap.values) {
            let y = x / sq;
            if y > cfg.y_max {
                break;
            }
            pts.push((v / scale, phi.eval(y) / phi0));
        }
        if pts.len() < cfg.min_nodes {
            degenerate += 1;
            continue;
        }
        let num: f64 = pts.iter().map(|(v, f)| v * f).sum();
        let den: f64 = pts.iter().map(|(_, f)| f * f).sum();
        let l = num / den;
        let peak = pts.iter().fold(0.0f64, |m, (_, f)| m.max(f.abs())) * l.abs();
        let err = pts.iter().fold(0.0f64, |m, (v, f)| m.max((v - l * f).abs()));
        samples.push(ProfileSample {
            t: snap.t,
            gap,
            coefficient: l,
            misfit: if peak > 0.0 { err / peak } else { f64::INFINITY },
            nodes_used: pts.len(),
        });
    }
    if samples.is_empty() {
        return Err(Error::Construction("no resolvable snapshot before tau".into()));
    }
    let ls: Vec<f64> = samples.iter().map(|s| s.coefficient).collect();
    let mean = ls.iter().sum::<f64>() / ls.len() as f64;
    let spread = ls.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - ls.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(RbcProfileReport {
        n,
        tau,
        max_misfit: samples.iter().map(|s| s.misfit).fold(0.0, f64::max),
        coefficient_drift: (spread / mean).abs(),
        samples,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_law_known_time() {
        let s: Vec<(f64, f64)> = (0..40).map(|i| {
            let t = 1.0 - 10f64.powf(-3.0 * i as f64 / 39.0);
            (t, 2.0 / (1.0 - t))
        }).filter(|p| p.0 < 1.0).collect();
        let f = fit_power_law(&s, SingularTime::Known(1.0)).unwrap();
        assert!((f.exponent + 1.0).abs() < 1e-12);
        assert!((f.coefficient - 2.0).abs() < 1e-10);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        assert!(f.warnings.is_empty());
    }

    #[test]
    fn fitted_time() {
        let s: Vec<(f64, f64)> = (0..50)
            .map(|i| {
                let t = 0.9 * i as f64 / 49.0;
                (t, 3.0 * (1.0 - t).powi(2))
            })
            .collect();
        let f = fit_power_law(&s, SingularTime::Fit).unwrap();
        assert!((f.singular_time - 1.0).abs() < 1e-6, "{}", f.singular_time);
        assert!((f.exponent - 2.0).abs() < 1e-5);
        assert!((f.coefficient - 3.0).abs() < 1e-4);
    }

    #[test]
    fn rejects_nonpositive() {
        let s = vec![(0.0, 1.0), (0.1, 0.0), (0.2, 1.0)];
        assert!(fit_power_law(&s, SingularTime::Known(1.0)).is_err());
    }

    #[test]
    fn short_window_warns() {
        let s: Vec<(f64, f64)> = (0..5).map(|i| (0.1 * i as f64, 1.0 + i as f64)).collect();
        let f = fit_power_law(&s, SingularTime::Known(1.0)).unwrap();
        assert_eq!(f.warnings.len(), 2);
    }

    #[test]
    fn target_exponents() {
        assert_eq!(scaling_exponent_q(&ModelParams::new(3.0).unwrap(), 1), 0.25 - 1.0);
    }

    #[test]
    fn bubble_exact() {
        use crate::grid::Grid;
        use std::sync::Arc;
        let p = ModelParams::new(3.0).unwrap();
        let m = 200.0;
        let a = p.shift_for_slope(m);
        let g = Arc::new(Grid::graded(0.05, 1e-8, 0.97, Some(1e-4)).unwrap());
        let f = GridFunction::from_fn(g, 0.0, |x| p.u_a(a, x)).unwrap();
        let r = bubble_profile_check(&f, m, &p, 0.05, 1e-3).unwrap();
        assert!(r.deviation < 1e-4 * m, "{}", r.deviation);
    }
}
