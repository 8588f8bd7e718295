//! Implicit finite-difference solvers for u_t = u_xx + |u_x|^p and its
//! reformulation around the singular steady state, plus experiment seeds.
//!
//! Time stepping is implicit Euler with a Newton solve on the tridiagonal
//! Jacobian. The slope term uses the centered three-point difference wherever
//! that keeps the scheme monotone and falls back to an upwind monotone flux
//! elsewhere, so comparison and zero-number monotonicity hold discretely.

mod scheme;
pub mod seeds;
pub mod shoot;

use std::sync::Arc;

use serde::Serialize;

pub use crate::grid::{Grid, GridFunction};
use crate::error::{invalid, Error, Result};
use crate::steady_core::ModelParams;
use scheme::{left_slope, Scheme, Source};
pub use seeds::{build_gbu_data, build_rbc_data, GbuSeed, GbuSeedSpec, RbcSeed, RbcSeedSpec};
pub use shoot::{shoot_rbc_seed, ShootConfig, ShootResult};

/// Time step control.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Stepping {
    /// Constant step (except to land on requested snapshot times).
    Fixed { dt: f64 },
    /// Step adapted so that the boundary slope, boundary value and sup norm
    /// change by about `target` (relative) per step.
    Adaptive {
        dt0: f64,
        dt_min: f64,
        dt_max: f64,
        target: f64,
    },
}

impl Stepping {
    pub fn adaptive(dt0: f64, target: f64) -> Self {
        Stepping::Adaptive {
            dt0,
            dt_min: 1e-16,
            dt_max: f64::INFINITY,
            target,
        }
    }
}

/// When to store full profiles.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SnapshotPlan {
    /// Exact times to land on.
    pub times: Vec<f64>,
    /// Store every n accepted steps.
    pub every: Option<usize>,
    /// Store the first step at which the boundary slope exceeds each level.
    pub slope_levels: Vec<f64>,
    /// Store the first step at which the boundary value drops below each level.
    pub value_levels: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverConfig {
    pub params: ModelParams,
    pub stepping: Stepping,
    pub t_end: f64,
    /// Stop (and flag gradient blow-up) once the boundary slope reaches this value.
    pub grad_threshold: Option<f64>,
    /// For the singular solver: stop at the first down-crossing of z(0,t) through 0.
    pub stop_on_crossing: bool,
    pub snapshots: SnapshotPlan,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub max_steps: usize,
    /// Record every n-th accepted step in the traces.
    pub trace_every: usize,
}

impl SolverConfig {
    pub fn new(params: ModelParams, stepping: Stepping, t_end: f64) -> Self {
        Self {
            params,
            stepping,
            t_end,
            grad_threshold: None,
            stop_on_crossing: true,
            snapshots: SnapshotPlan::default(),
            newton_tol: 1e-12,
            newton_max_iter: 30,
            max_steps: 5_000_000,
            trace_every: 1,
        }
    }
}

/// Run kind, recorded in the result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum RunKind {
    Classical,
    Truncated { level: f64 },
    Singular { a: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Event {
    /// Boundary slope reached the configured threshold.
    GradientThreshold { t: f64, m: f64 },
    /// z(0,t) crossed 0 from above; time refined by bisection of the last step.
    BoundaryCrossing { t: f64 },
    /// Run reached t_end.
    Finished { t: f64 },
    Warning { t: f64, message: String },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunStats {
    pub steps: usize,
    pub rejected: usize,
    pub newton_iterations: usize,
    /// Largest number of upwind-fallback cells seen at an accepted step.
    pub max_fallback_cells: usize,
    /// Accepted steps that used the fallback anywhere.
    pub fallback_steps: usize,
    pub min_dt: f64,
    pub final_t: f64,
}

/// Output of a run. Singular runs store z ≈ u - U in snapshots and the boundary trace.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub kind: RunKind,
    pub snapshots: Vec<GridFunction>,
    /// (t, u(0,t)) for Dirichlet runs, (t, z(0,t)) for singular runs.
    pub boundary_trace: Vec<(f64, f64)>,
    /// (t, m(t)) with m the one-sided boundary slope (u_x(0,t), or U_a'(0)+z_x(0,t)).
    pub gradient_trace: Vec<(f64, f64)>,
    /// Time steps actually taken, in order.
    pub dt_trace: Vec<f64>,
    pub events: Vec<Event>,
    pub stats: RunStats,
    pub final_state: GridFunction,
}

impl SolveResult {
    pub fn warnings(&self) -> Vec<&str> {
        self.events
            .iter()
            .filter_map(|e| match e {
                Event::Warning { message, .. } => Some(message.as_str()),
                _ => None,
            })
            .collect()
    }

    pub fn gbu_flagged(&self) -> bool {
        self.events
            .iter()
            .any(|e| matches!(e, Event::GradientThreshold { .. }))
    }
}

fn check_data(u0: &GridFunction, cfg: &SolverConfig) -> Result<()> {
    if u0.grid.len() < 4 {
        return invalid("solver needs at least four nodes");
    }
    if !(cfg.t_end > u0.t) {
        return invalid("t_end must exceed the initial time");
    }
    match cfg.stepping {
        Stepping::Fixed { dt } if !(dt > 0.0) => invalid("dt must be positive"),
        Stepping::Adaptive {
            dt0, dt_min, target, ..
        } if !(dt0 > 0.0 && dt_min > 0.0 && target > 0.0) => {
            invalid("adaptive stepping needs positive dt0, dt_min and target")
        }
        _ => Ok(()),
    }
}

fn check_dirichlet_data(u0: &GridFunction) -> Result<()> {
    let scale = u0.sup_norm().max(1.0);
    if u0.values[0].abs() > 1e-14 * scale {
        return invalid("initial data must vanish at x = 0");
    }
    if u0.min() < -1e-14 * scale {
        return invalid("initial data must be nonnegative");
    }
    Ok(())
}

/// u_t = u_xx + |u_x|^p with u fixed at both ends (left value 0, right value u0(R)).
pub fn solve_classical(u0: &GridFunction, cfg: &SolverConfig) -> Result<SolveResult> {
    check_data(u0, cfg)?;
    check_dirichlet_data(u0)?;
    run(u0, cfg, RunKind::Classical)
}

/// Same as [`solve_classical`] with |u_x|^p replaced by min(|u_x|, level)^p.
pub fn solve_truncated(u0: &GridFunction, cfg: &SolverConfig, level: f64) -> Result<SolveResult> {
    check_data(u0, cfg)?;
    check_dirichlet_data(u0)?;
    if !(level > 0.0) {
        return invalid("truncation level must be positive");
    }
    run(u0, cfg, RunKind::Truncated { level })
}

/// z_t = z_xx + |U_a' + z_x|^p - |U_a'|^p with z_x(0) = 0 and z(R) = z0(R).
///
/// `z0` is u0 - U. As a -> 0 the solution tends to u - U, so u = z + U keeps
/// the gradient singularity at x = 0 and u(0,t) = z(0,t) is read off directly.
pub fn solve_singular(z0: &GridFunction, cfg: &SolverConfig, a: f64) -> Result<SolveResult> {
    check_data(z0, cfg)?;
    if !(a > 0.0) {
        return invalid("shift a must be positive");
    }
    run(z0, cfg, RunKind::Singular { a })
}

struct Plan {
    times: Vec<f64>,
    next_time: usize,
    slope_levels: Vec<f64>,
    next_slope: usize,
    value_levels: Vec<f64>,
    next_value: usize,
}

fn run(u0: &GridFunction, cfg: &SolverConfig, kind: RunKind) -> Result<SolveResult> {
    let params = &cfg.params;
    let x = u0.nodes().to_vec();
    let (source, neumann) = match kind {
        RunKind::Classical => (Source::Power { cap: None }, false),
        RunKind::Truncated { level } => (Source::Power { cap: Some(level) }, false),
        RunKind::Singular { a } => (Source::Shifted { a }, true),
    };
    let scheme = Scheme::new(params, x.clone(), source, neumann);
    let grid = Arc::clone(&u0.grid);
    let mut events = Vec::new();
    if let RunKind::Singular { a } = kind {
        let h0 = x[1] - x[0];
        if h0 >= a {
            events.push(Event::Warning {
                t: u0.t,
                message: format!("shift a = {a:e} is within one cell (h0 = {h0:e}); inner layer under-resolved"),
            });
        }
    }
    let slope = |u: &[f64]| -> f64 {
        match kind {
            RunKind::Singular { a } => params.u_a_prime(a, 0.0) + left_slope(&x, u),
            _ => left_slope(&x, u),
        }
    };

    let mut plan = {
        let mut times: Vec<f64> = cfg
            .snapshots
            .times
            .iter()
            .cloned()
            .filter(|&t| t > u0.t && t <= cfg.t_end)
            .collect();
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut slope_levels = cfg.snapshots.slope_levels.clone();
        slope_levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut value_levels = cfg.snapshots.value_levels.clone();
        value_levels.sort_by(|a, b| b.partial_cmp(a).unwrap());
        Plan {
            times,
            next_time: 0,
            slope_levels,
            next_slope: 0,
            value_levels,
            next_value: 0,
        }
    };

    let mut u = u0.values.clone();
    let mut t = u0.t;
    let mut m = slope(&u);
    let mut snapshots = vec![u0.clone()];
    let mut boundary_trace = vec![(t, u[0])];
    let mut gradient_trace = vec![(t, m)];
    let mut dt_trace = Vec::new();
    let mut stats = RunStats {
        min_dt: f64::INFINITY,
        ..Default::default()
    };
    // skip levels already passed by the initial data
    while plan.next_slope < plan.slope_levels.len() && m >= plan.slope_levels[plan.next_slope] {
        plan.next_slope += 1;
    }
    while plan.next_value < plan.value_levels.len() && u[0] <= plan.value_levels[plan.next_value] {
        plan.next_value += 1;
    }

    let (mut dt, dt_min, dt_max, target) = match cfg.stepping {
        Stepping::Fixed { dt } => (dt, dt, dt, f64::INFINITY),
        Stepping::Adaptive {
            dt0,
            dt_min,
            dt_max,
            target,
        } => (dt0, dt_min, dt_max, target),
    };
    let fixed = matches!(cfg.stepping, Stepping::Fixed { .. });
    let mut v = Vec::with_capacity(u.len());
    let mut stop = false;

    while !stop {
        if stats.steps >= cfg.max_steps {
            return Err(Error::NoConvergence(format!(
                "step budget {} exhausted at t = {t}",
                cfg.max_steps
            )));
        }
        let mut h = dt.min(cfg.t_end - t);
        let mut landing = false;
        if plan.next_time < plan.times.len() {
            let tn = plan.times[plan.next_time];
            if t + h >= tn - 1e-14 * tn.abs().max(1.0) {
                h = tn - t;
                landing = true;
            }
        }
        let outcome = scheme.implicit_step(&u, h, &mut v, cfg.newton_tol, cfg.newton_max_iter);
        let outcome = match outcome {
            Ok(o) => o,
            Err(e) if e.is_numerical() && !fixed => {
                stats.rejected += 1;
                dt = 0.5 * h;
                if dt < dt_min {
                    return Err(Error::StepTooSmall(dt));
                }
                continue;
            }
            Err(e) => return Err(e),
        };
        let m_new = slope(&v);
        // relative change used for step control
        let change = if fixed {
            0.0
        } else {
            let sup_old = u.iter().fold(0.0f64, |a, w| a.max(w.abs()));
            let du = u
                .iter()
                .zip(&v)
                .fold(0.0f64, |a, (p, q)| a.max((p - q).abs()));
            let mut c = du / sup_old.max(1e-300);
            if m.abs() > 0.0 {
                c = c.max((m_new - m).abs() / m.abs());
            }
            if u[0].abs() > 1e-300 && matches!(kind, RunKind::Singular { .. }) {
                c = c.max((v[0] - u[0]).abs() / u[0].abs());
            }
            c
        };
        if !fixed && change > 3.0 * target && h > dt_min {
            stats.rejected += 1;
            dt = (h * 0.5 * target / change).max(dt_min);
            continue;
        }

        // boundary crossing of z(0,t) for singular runs
        if matches!(kind, RunKind::Singular { .. }) && u[0] > 0.0 && v[0] <= 0.0 {
            let (hc, vc) = refine_crossing(&scheme, &u, h, cfg)?;
            let tc = t + hc;
            events.push(Event::BoundaryCrossing { t: tc });
            if cfg.stop_on_crossing {
                t = tc;
                u = vc;
                m = slope(&u);
                stats.steps += 1;
                dt_trace.push(hc);
                boundary_trace.push((t, u[0]));
                gradient_trace.push((t, m));
                snapshots.push(GridFunction::new(Arc::clone(&grid), u.clone(), t)?);
                break;
            }
        }

        stats.steps += 1;
        stats.newton_iterations += outcome.iterations;
        if outcome.fallback_cells > 0 {
            stats.fallback_steps += 1;
            stats.max_fallback_cells = stats.max_fallback_cells.max(outcome.fallback_cells);
        }
        stats.min_dt = stats.min_dt.min(h);
        dt_trace.push(h);
        t = if landing { plan.times[plan.next_time] } else { t + h };
        std::mem::swap(&mut u, &mut v);
        m = m_new;
        if !m.is_finite() || !u[0].is_finite() {
            return Err(Error::NonFinite(format!("boundary data at t = {t}")));
        }
        if stats.steps % cfg.trace_every.max(1) == 0 {
            boundary_trace.push((t, u[0]));
            gradient_trace.push((t, m));
        }

        let mut store = false;
        if landing {
            plan.next_time += 1;
            store = true;
        }
        if let Some(n) = cfg.snapshots.every {
            if n > 0 && stats.steps % n == 0 {
                store = true;
            }
        }
        while plan.next_slope < plan.slope_levels.len() && m >= plan.slope_levels[plan.next_slope] {
            plan.next_slope += 1;
            store = true;
        }
        while plan.next_value < plan.value_levels.len() && u[0] <= plan.value_levels[plan.next_value] {
            plan.next_value += 1;
            store = true;
        }

        if let Some(th) = cfg.grad_threshold {
            if m >= th {
                events.push(Event::GradientThreshold { t, m });
                store = true;
                stop = true;
            }
        }
        if t >= cfg.t_end - 1e-15 * cfg.t_end.abs().max(1.0) {
            events.push(Event::Finished { t });
            store = true;
            stop = true;
        }
        if store {
            snapshots.push(GridFunction::new(Arc::clone(&grid), u.clone(), t)?);
        }
        if !fixed {
            let grow = if change > 0.0 { 0.9 * target / change } else { 2.0 };
            dt = (h * grow.clamp(0.2, 2.0)).clamp(dt_min, dt_max);
            if landing {
                dt = dt.max(h);
            }
        }
    }
    if boundary_trace.last().map(|p| p.0) != Some(t) {
        boundary_trace.push((t, u[0]));
        gradient_trace.push((t, m));
    }
    stats.final_t = t;
    if stats.min_dt == f64::INFINITY {
        stats.min_dt = 0.0;
    }
    let final_state = GridFunction::new(grid, u, t)?;
    Ok(SolveResult {
        kind,
        snapshots,
        boundary_trace,
        gradient_trace,
        dt_trace,
        events,
        stats,
        final_state,
    })
}

/// Bisects the last step length so that z(0) lands just above 0.
fn refine_crossing(scheme: &Scheme, u: &[f64], h: f64, cfg: &SolverConfig) -> Result<(f64, Vec<f64>)> {
    let mut lo = 0.0;
    let mut hi = h;
    let mut best = u.to_vec();
    let mut v = Vec::with_capacity(u.len());
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        scheme.implicit_step(u, mid, &mut v, cfg.newton_tol, cfg.newton_max_iter)?;
        if v[0] > 0.0 {
            lo = mid;
            best.clone_from(&v);
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * h {
            break;
        }
    }
    Ok((lo, best))
}

/// Discrete steady-state residual u_xx + |u_x|^p at interior nodes (centered scheme).
pub fn steady_residual(params: &ModelParams, f: &GridFunction) -> Vec<f64> {
    let scheme = Scheme::new(params, f.nodes().to_vec(), Source::Power { cap: None }, false);
    scheme.residual(&f.values)
}

/// Interior nodes where the centered slope term violates the monotonicity bound.
pub fn fallback_cells(params: &ModelParams, f: &GridFunction) -> usize {
    let scheme = Scheme::new(params, f.nodes().to_vec(), Source::Power { cap: None }, false);
    scheme.fallback_count(&f.values)
}

/// One-sided second-order slope at x = 0.
pub fn boundary_slope(f: &GridFunction) -> f64 {
    left_slope(f.nodes(), &f.values)
}

/// First down-crossing of the boundary trace through 0.
///
/// Uses the refined crossing event when the run recorded one, otherwise linear
/// interpolation between the bracketing trace samples.
pub fn detect_rbc_time(result: &SolveResult) -> Option<f64> {
    for e in &result.events {
        if let Event::BoundaryCrossing { t } = e {
            return Some(*t);
        }
    }
    crossing_time(&result.boundary_trace)
}

/// First down-crossing of a sampled series through 0, by linear interpolation.
pub fn crossing_time(trace: &[(f64, f64)]) -> Option<f64> {
    for w in trace.windows(2) {
        let ((t0, z0), (t1, z1)) = (w[0], w[1]);
        if z0 > 0.0 && z1 <= 0.0 {
            return Some(t0 + (t1 - t0) * z0 / (z0 - z1));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p3() -> ModelParams {
        ModelParams::new(3.0).unwrap()
    }

    #[test]
    fn zero_data_stays_zero() {
        let g = Arc::new(Grid::uniform(1.0, 50).unwrap());
        let u0 = GridFunction::from_fn(g, 0.0, |_| 0.0).unwrap();
        let cfg = SolverConfig::new(p3(), Stepping::Fixed { dt: 1e-3 }, 0.1);
        let r = solve_classical(&u0, &cfg).unwrap();
        assert_eq!(r.final_state.sup_norm(), 0.0);
    }

    #[test]
    fn crossing_of_synthetic_trace() {
        let trace: Vec<(f64, f64)> = (0..30).map(|i| (i as f64 * 0.1, 1.0 - i as f64 * 0.1)).collect();
        let tc = crossing_time(&trace).unwrap();
        assert!((tc - 1.0).abs() < 0.1);
        let pos: Vec<(f64, f64)> = (0..30).map(|i| (i as f64, 1.0 + i as f64)).collect();
        assert!(crossing_time(&pos).is_none());
    }

    #[test]
    fn rejects_bad_data() {
        let g = Arc::new(Grid::uniform(1.0, 20).unwrap());
        let u0 = GridFunction::from_fn(g, 0.0, |x| x - 0.5).unwrap();
        let cfg = SolverConfig::new(p3(), Stepping::Fixed { dt: 1e-3 }, 0.1);
        assert!(solve_classical(&u0, &cfg).is_err());
    }
}
