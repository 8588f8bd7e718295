//! Zero-number diagnostics: sign changes, intersection curves of u(·, t) − U
//! across snapshots, and the number of intersections vanishing at the boundary.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::grid::GridFunction;
use crate::rates::{fit_power_law, SingularTime};

/// Strict sign alternations among values with |f| > tol on [lo, hi]; smaller values are skipped.
pub fn sign_changes(f: &GridFunction, interval: (f64, f64), tol: f64) -> Result<usize> {
    check_interval(f, interval)?;
    let mut count = 0;
    let mut last = 0.0f64;
    for (&x, &v) in f.nodes().iter().zip(&f.values) {
        if x < interval.0 || x > interval.1 || v.abs() <= tol {
            continue;
        }
        if last != 0.0 && last.signum() != v.signum() {
            count += 1;
        }
        last = v;
    }
    Ok(count)
}

fn check_interval(f: &GridFunction, interval: (f64, f64)) -> Result<()> {
    let g = &f.grid;
    if interval.0 > interval.1 || interval.0 < g.left() - 1e-12 || interval.1 > g.right() + 1e-12 {
        return invalid(format!(
            "interval [{}, {}] not within the grid [{}, {}]",
            interval.0,
            interval.1,
            g.left(),
            g.right()
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Crossing {
    pub x: f64,
    /// Slope of the secant through the two bracketing samples.
    pub slope: f64,
}

/// Sign changes located by linear interpolation between the bracketing significant samples.
pub fn crossings(f: &GridFunction, interval: (f64, f64), tol: f64) -> Result<Vec<Crossing>> {
    check_interval(f, interval)?;
    let mut out = Vec::new();
    let mut last: Option<(f64, f64)> = None;
    for (&x, &v) in f.nodes().iter().zip(&f.values) {
        if x < interval.0 || x > interval.1 || v.abs() <= tol {
            continue;
        }
        if let Some((x0, v0)) = last {
            if v0.signum() != v.signum() {
                out.push(Crossing {
                    x: x0 + (x - x0) * v0 / (v0 - v),
                    slope: (v - v0) / (x - x0),
                });
            }
        }
        last = Some((x, v));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum TerminalEvent {
    Alive,
    VanishedAtZero { t: f64 },
    CollapsedWith { labels: Vec<usize>, t: f64 },
    ReachedFinalTime { t: f64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct IntersectionTrack {
    pub label: usize,
    /// (t, x_i(t)).
    pub samples: Vec<(f64, f64)>,
    /// Times at which the crossing was flagged as nearly tangential.
    pub degenerate_times: Vec<f64>,
    pub event: TerminalEvent,
}

impl IntersectionTrack {
    pub fn last_position(&self) -> Option<f64> {
        self.samples.last().map(|s| s.1)
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrackConfig {
    /// Restrict to this x-interval; whole grid when None.
    pub interval: Option<(f64, f64)>,
    /// Values with |u − U| ≤ tol are transparent.
    pub tol: f64,
    /// Crossings with |slope| below this times the sampled scale max|u − U|/R are flagged.
    pub slope_tol_rel: f64,
    /// C in the displacement bound C·√Δt + one cell.
    pub displacement_c: f64,
    /// Positions below this count as at the boundary; the second interior node when None.
    pub vanish_threshold: Option<f64>,
}

impl Default for TrackConfig {
    fn default() -> Self {
        Self {
            interval: None,
            tol: 0.0,
            slope_tol_rel: 1e-6,
            displacement_c: 10.0,
            vanish_threshold: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Tracking {
    pub tracks: Vec<IntersectionTrack>,
    /// (t, number of intersections) per snapshot.
    pub counts: Vec<(f64, usize)>,
    pub ambiguities: Vec<String>,
    pub vanish_threshold: f64,
}

impl Tracking {
    /// Runs with ambiguities are not used for classification.
    pub fn is_ambiguous(&self) -> bool {
        !self.ambiguities.is_empty()
    }

    pub fn counts_nonincreasing(&self) -> bool {
        self.counts.windows(2).all(|w| w[1].1 <= w[0].1)
    }
}

/// Order-preserving assignment of `cur` to a subsequence of `prev` minimizing the
/// total displacement. Returns, for each previous position, the matched index or None.
fn match_subsequence(prev: &[f64], cur: &[f64]) -> Vec<Option<usize>> {
    let (n, m) = (prev.len(), cur.len());
    // cost[i][j]: best for the first i previous and first j current positions
    let inf = f64::INFINITY;
    let mut cost = vec![vec![inf; m + 1]; n + 1];
    cost[0][0] = 0.0;
    for i in 1..=n {
        for j in 0..=m.min(i) {
            let drop = cost[i - 1][j];
            let take = if j > 0 {
                cost[i - 1][j - 1] + (prev[i - 1] - cur[j - 1]).abs()
            } else {
                inf
            };
            cost[i][j] = drop.min(take);
        }
    }
    let mut out = vec![None; n];
    let (mut i, mut j) = (n, m);
    while i > 0 {
        let take = if j > 0 {
            cost[i - 1][j - 1] + (prev[i - 1] - cur[j - 1]).abs()
        } else {
            inf
        };
        if j > 0 && take <= cost[i - 1][j] {
            out[i - 1] = Some(j - 1);
            j -= 1;
        }
        i -= 1;
    }
    out
}

/// Follows the zeros of u(·, t) − reference(x) through time-ordered snapshots on a common grid.
pub fn track_intersections(
    snapshots: &[GridFunction],
    reference: impl Fn(f64) -> f64,
    cfg: &TrackConfig,
) -> Result<Tracking> {
    if snapshots.is_empty() {
        return invalid("no snapshots to track");
    }
    let grid = &snapshots[0].grid;
    if snapshots.iter().any(|s| s.nodes() != grid.nodes()) {
        return invalid("snapshots must share a grid");
    }
    if snapshots.windows(2).any(|w| w[1].t < w[0].t) {
        return invalid("snapshots must be time-ordered");
    }
    let xs = grid.nodes();
    let interval = cfg.interval.unwrap_or((grid.left(), grid.right()));
    let threshold = cfg.vanish_threshold.unwrap_or(xs[2.min(xs.len() - 1)]);
    let mut tracks: Vec<IntersectionTrack> = Vec::new();
    let mut active: Vec<usize> = Vec::new();
    let mut counts = Vec::new();
    let mut ambiguities = Vec::new();
    let mut prev_t = snapshots[0].t;
    let mut prev_sign = 0.0;
    for (si, snap) in snapshots.iter().enumerate() {
        let diff = snap.minus_fn(&reference);
        // zeros inside the first cells carry no position information
        let found: Vec<Crossing> = crossings(&diff, interval, cfg.tol)?
            .into_iter()
            .filter(|c| c.x >= threshold)
            .collect();
        let scale = diff.sup_norm() / (interval.1 - interval.0).max(f64::MIN_POSITIVE);
        let cur: Vec<f64> = found.iter().map(|c| c.x).collect();
        let left_sign = diff
            .nodes()
            .iter()
            .zip(&diff.values)
            .find(|(&x, &v)| x >= interval.0.max(threshold) && v.abs() > cfg.tol)
            .map_or(0.0, |(_, v)| v.signum());
        let left_flipped = si > 0 && left_sign != prev_sign;
        counts.push((snap.t, cur.len()));
        let t = snap.t;
        if si == 0 {
            for c in &found {
                tracks.push(IntersectionTrack {
                    label: tracks.len() + 1,
                    samples: vec![(t, c.x)],
                    degenerate_times: Vec::new(),
                    event: TerminalEvent::Alive,
                });
                active.push(tracks.len() - 1);
            }
        } else {
            let prev: Vec<f64> = active.iter().map(|&k| tracks[k].last_position().unwrap()).collect();
            let mut next_active = Vec::new();
            if cur.len() <= prev.len() {
                let assign = match_subsequence(&prev, &cur);
                // runs of dropped curves
                let mut i = 0;
                while i < assign.len() {
                    if assign[i].is_some() {
                        i += 1;
                        continue;
                    }
                    let start = i;
                    while i < assign.len() && assign[i].is_none() {
                        i += 1;
                    }
                    let run: Vec<usize> = (start..i).map(|r| active[r]).collect();
                    // a vanishing at x = 0 flips the sign of u - U next to the boundary
                    if start == 0 && run.len() % 2 == 1 && !left_flipped {
                        ambiguities.push(format!("odd number of curves left at t = {t} without a sign flip at the boundary"));
                    }
                    if start == 0 && run.len() % 2 == 1 {
                        for &k in &run {
                            tracks[k].event = TerminalEvent::VanishedAtZero { t };
                        }
                    } else if run.len() % 2 == 0 {
                        let labels: Vec<usize> = run.iter().map(|&k| tracks[k].label).collect();
                        for &k in &run {
                            tracks[k].event = TerminalEvent::CollapsedWith {
                                labels: labels.iter().cloned().filter(|&l| l != tracks[k].label).collect(),
                                t,
                            };
                        }
                    } else {
                        ambiguities.push(format!(
                            "{} curve(s) disappeared at t = {t} away from the boundary without a partner",
                            run.len()
                        ));
                        for &k in &run {
                            tracks[k].event = TerminalEvent::CollapsedWith { labels: Vec::new(), t };
                        }
                    }
                }
                for (r, a) in assign.iter().enumerate() {
                    if let Some(j) = a {
                        next_active.push((active[r], *j));
                    }
                }
            } else {
                ambiguities.push(format!(
                    "number of intersections grew from {} to {} at t = {t}",
                    prev.len(),
                    cur.len()
                ));
                let assign = match_subsequence(&cur, &prev);
                let mut taken = vec![None; cur.len()];
                for (j, a) in assign.iter().enumerate() {
                    if let Some(r) = a {
                        taken[j] = Some(active[*r]);
                    }
                }
                for (j, tk) in taken.iter().enumerate() {
                    match tk {
                        Some(k) => next_active.push((*k, j)),
                        None => {
                            tracks.push(IntersectionTrack {
                                label: tracks.len() + 1,
                                samples: Vec::new(),
                                degenerate_times: Vec::new(),
                                event: TerminalEvent::Alive,
                            });
                            next_active.push((tracks.len() - 1, j));
                        }
                    }
                }
            }
            let dt = (t - prev_t).max(0.0);
            active.clear();
            for (k, j) in next_active {
                let x = cur[j];
                if let Some(x_old) = tracks[k].last_position() {
                    let i = grid.locate(x);
                    let cell = xs[i + 1] - xs[i];
                    if (x - x_old).abs() > cfg.displacement_c * dt.sqrt() + cell {
                        ambiguities.push(format!(
                            "curve {} moved {:.3e} between t = {prev_t} and t = {t}",
                            tracks[k].label,
                            (x - x_old).abs()
                        ));
                    }
                }
                tracks[k].samples.push((t, x));
                active.push(k);
            }
        }
        for &k in &active {
            let &(_, x) = tracks[k].samples.last().unwrap();
            let c = found.iter().find(|c| c.x == x).unwrap();
            if c.slope.abs() < cfg.slope_tol_rel * scale {
                tracks[k].degenerate_times.push(t);
            }
        }
        prev_t = t;
        prev_sign = left_sign;
    }
    let t_last = snapshots.last().unwrap().t;
    for &k in &active {
        tracks[k].event = TerminalEvent::ReachedFinalTime { t: t_last };
    }
    Ok(Tracking {
        tracks,
        counts,
        ambiguities,
        vanish_threshold: threshold,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum VanishReason {
    /// The track ended with an explicit vanish event inside the window.
    Event,
    /// Its position fell below the vanish threshold in the window.
    Threshold,
    /// x_i ∝ (T − t)^e with e ≥ min_exponent over the window.
    PowerLaw,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrackVerdict {
    pub label: usize,
    pub vanishes: Option<VanishReason>,
    /// Fitted exponent of x_i against T − t on the window, when fittable.
    pub exponent: Option<f64>,
    pub min_position: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VanishingCount {
    pub n: usize,
    pub verdicts: Vec<TrackVerdict>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct VanishConfig {
    /// Length of the terminal window [T − span, T].
    pub span: f64,
    /// Smallest exponent of x_i(t) ~ (T − t)^e accepted as convergence to 0.
    pub min_exponent: f64,
    /// Degenerate samples within this time of a flagged time are excluded.
    pub degenerate_exclusion: f64,
}

impl Default for VanishConfig {
    fn default() -> Self {
        Self {
            span: 0.1,
            min_exponent: 0.25,
            degenerate_exclusion: 0.0,
        }
    }
}

/// Number of intersection curves, counted from the boundary, that converge to x = 0 at T.
pub fn vanishing_count(tracking: &Tracking, t_sing: f64, cfg: &VanishConfig) -> VanishingCount {
    let lo = t_sing - cfg.span;
    let mut warnings = Vec::new();
    if tracking.is_ambiguous() {
        warnings.push("tracking reported ambiguities; classification is unreliable".to_string());
    }
    let mut verdicts = Vec::new();
    for tr in &tracking.tracks {
        let excluded = |t: f64| {
            tr.degenerate_times
                .iter()
                .any(|&d| (t - d).abs() <= cfg.degenerate_exclusion)
        };
        let pts: Vec<(f64, f64)> = tr
            .samples
            .iter()
            .cloned()
            .filter(|&(t, x)| t >= lo && t < t_sing && x > 0.0 && !excluded(t))
            .collect();
        let min_position = pts.iter().map(|p| p.1).reduce(f64::min);
        let exponent = if pts.len() >= 3 {
            fit_power_law(&pts, SingularTime::Known(t_sing)).ok().map(|f| f.exponent)
        } else {
            None
        };
        let vanishes = match &tr.event {
            TerminalEvent::VanishedAtZero { t } if *t >= lo => Some(VanishReason::Event),
            _ if min_position.map_or(false, |m| m < tracking.vanish_threshold) => Some(VanishReason::Threshold),
            _ if exponent.map_or(false, |e| e >= cfg.min_exponent) => Some(VanishReason::PowerLaw),
            _ => None,
        };
        verdicts.push(TrackVerdict {
            label: tr.label,
            vanishes,
            exponent,
            min_position,
        });
    }
    let n = verdicts
        .iter()
        .filter(|v| v.vanishes.is_some())
        .map(|v| v.label)
        .max()
        .unwrap_or(0);
    if n == 0 {
        warnings.push("no intersection approaches the boundary: no singular event resolved".to_string());
    }
    VanishingCount { n, verdicts, warnings }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use std::sync::Arc;

    fn g() -> Arc<Grid> {
        Arc::new(Grid::uniform(5.0, 500).unwrap())
    }

    #[test]
    fn counts_constant_and_sine() {
        let f = GridFunction::from_fn(g(), 0.0, |_| 1.0).unwrap();
        assert_eq!(sign_changes(&f, (0.0, 5.0), 0.0).unwrap(), 0);
        let s = GridFunction::from_fn(g(), 0.0, |x| (x * 2.0).sin() + 0.1).unwrap();
        assert_eq!(sign_changes(&s, (0.0, 5.0), 0.0).unwrap(), 3);
        assert!(sign_changes(&s, (0.0, 6.0), 0.0).is_err());
    }

    #[test]
    fn tolerance_is_transparent() {
        let f = GridFunction::from_fn(g(), 0.0, |x| if (x - 2.0).abs() < 0.5 { -1e-9 } else { 1.0 }).unwrap();
        assert_eq!(sign_changes(&f, (0.0, 5.0), 1e-6).unwrap(), 0);
        assert_eq!(sign_changes(&f, (0.0, 5.0), 0.0).unwrap(), 2);
    }

    #[test]
    fn matching_drops_the_far_curve() {
        let m = match_subsequence(&[0.1, 1.0, 2.0], &[0.98, 2.01]);
        assert_eq!(m, vec![None, Some(0), Some(1)]);
    }

    #[test]
    fn shrinking_zero_vanishes() {
        let snaps: Vec<GridFunction> = (0..20)
            .map(|i| {
                let t = i as f64 * 0.05;
                let c = 1.0 - t;
                GridFunction::from_fn(g(), t, move |x| x - c).unwrap()
            })
            .collect();
        let tr = track_intersections(&snaps, |_| 0.0, &TrackConfig::default()).unwrap();
        assert_eq!(tr.tracks.len(), 1);
        assert!(tr.counts_nonincreasing());
        assert!(!tr.is_ambiguous(), "{:?}", tr.ambiguities);
        let v = vanishing_count(&tr, 1.0, &VanishConfig { span: 0.5, ..Default::default() });
        assert_eq!(v.n, 1);
        assert_eq!(v.verdicts[0].vanishes, Some(VanishReason::PowerLaw));
    }

    #[test]
    fn collapse_of_a_pair() {
        let snaps: Vec<GridFunction> = (0..10)
            .map(|i| {
                let t = i as f64 * 0.1;
                GridFunction::from_fn(g(), t, move |x| (x - 2.5).powi(2) - (0.5 - t).max(-0.1)).unwrap()
            })
            .collect();
        let tr = track_intersections(&snaps, |_| 0.0, &TrackConfig::default()).unwrap();
        assert_eq!(tr.tracks.len(), 2);
        assert!(matches!(tr.tracks[0].event, TerminalEvent::CollapsedWith { .. }));
        let v = vanishing_count(&tr, 1.0, &VanishConfig::default());
        assert_eq!(v.n, 0);
        assert_eq!(v.warnings.len(), 1);
    }
}
