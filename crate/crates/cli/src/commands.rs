use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Serialize;
use vhj_core::braid::{
    encode, verify_identities, verify_nonreductions, BraidEngine, BraidWord, GeneratorOrder,
};
use vhj_core::kernel::{apply_semigroup, check_normalization, GrowthTag, KernelParams};
use vhj_core::rates::{fit_power_law, gbu_rate_check, rbc_profile_check, select_window, RbcProfileConfig, SingularTime};
use vhj_core::solver::{
    build_gbu_data, build_rbc_data, detect_rbc_time, shoot_rbc_seed, solve_classical, solve_singular, solve_truncated,
    GbuSeedSpec, RbcSeedSpec, ShootConfig, SolveResult,
};
use vhj_core::spectral::{eigenpoly, positive_zeros};
use vhj_core::zeros::{track_intersections, vanishing_count, TrackConfig, VanishConfig};
use vhj_core::{Grid, GridFunction, ModelParams, WeightedSpace};

use crate::acceptance;
use crate::args::*;
use crate::config::{DataSection, Exponent, RunConfig};
use crate::error::{domain, CliError};
use crate::output::{envelope, read_csv, snapshot_name, snapshot_time, write_csv, Artifacts, Manifest};

/// What a command produced: text for stdout, and a failing verdict when the
/// command ran but its checks did not pass.
pub struct Done {
    pub stdout: String,
    pub verdict: Option<CliError>,
}

impl Done {
    fn ok(stdout: String) -> Self {
        Self { stdout, verdict: None }
    }
}

fn params(p: &str) -> Result<ModelParams, CliError> {
    Ok(ModelParams::parse(p)?)
}

fn out_dir(out: &Option<PathBuf>, manifest: &Manifest) -> PathBuf {
    out.clone().unwrap_or_else(|| Path::new("vhj-out").join(&manifest.id))
}

/// JSON to a file when asked, else to stdout.
fn emit(out: &Option<PathBuf>, text: String) -> Result<Done, CliError> {
    match out {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(path, &text)?;
            Ok(Done::ok(format!("wrote {}\n", path.display())))
        }
        None => Ok(Done::ok(text)),
    }
}

pub fn run(cmd: &Command) -> Result<Done, CliError> {
    match cmd {
        Command::Steady(a) => steady(a),
        Command::Spectrum(a) => spectrum(a),
        Command::Kernel(a) => kernel(a),
        Command::Solve(a) => solve(a, false),
        Command::SolveSingular(a) => solve(a, true),
        Command::Zeros(a) => zeros(a),
        Command::RateFit(a) => rate_fit(a),
        Command::ProfileCheck(a) => profile_check(a),
        Command::Braid { op } => braid(op),
        Command::Reproduce(a) => reproduce(a),
    }
}

// ---------------------------------------------------------------- steady

#[derive(Serialize)]
struct SteadyReport {
    beta: f64,
    k: f64,
    alpha: f64,
    c_p: f64,
    d_p: f64,
    a: Option<f64>,
    /// U_a'(0) = d_p a^{-β}.
    slope_at_zero: Option<f64>,
    samples: usize,
}

fn steady(a: &SteadyArgs) -> Result<Done, CliError> {
    let m = params(&a.p)?;
    if a.points < 2 || !(a.x_max > 0.0) {
        return domain("need --points >= 2 and --x-max > 0");
    }
    if let Some(s) = a.a {
        if !(s > 0.0) {
            return domain("the shift a must be positive");
        }
    }
    let manifest = Manifest::new("steady", a, Some(&m));
    if let Some(path) = &a.out {
        let rows: Vec<Vec<f64>> = (0..a.points)
            .map(|i| {
                let x = a.x_max * i as f64 / (a.points - 1) as f64;
                match a.a {
                    Some(s) => vec![x, m.u(x), m.u_a(s, x), m.u_a_prime(s, x)],
                    None => vec![x, m.u(x)],
                }
            })
            .collect();
        let header: &[&str] = if a.a.is_some() { &["x", "U", "U_a", "U_a'"] } else { &["x", "U"] };
        write_csv(path, &manifest.stamp(), header, &rows)?;
    }
    let report = SteadyReport {
        beta: m.beta,
        k: m.k,
        alpha: m.alpha,
        c_p: m.c_p,
        d_p: m.d_p,
        a: a.a,
        slope_at_zero: a.a.map(|s| m.u_a_prime(s, 0.0)),
        samples: if a.out.is_some() { a.points } else { 0 },
    };
    Ok(Done::ok(envelope(&manifest, report)?))
}

// ---------------------------------------------------------------- spectrum

#[derive(Serialize)]
struct SpectrumEntry {
    j: usize,
    lambda: f64,
    /// Normalized coefficients of y^0, y^2, ..., y^{2j}.
    coeffs: Vec<f64>,
    /// Exact coefficients with leading coefficient (-1)^j.
    raw_coeffs: Vec<String>,
    b0_unnormalized: f64,
    zeros: Vec<f64>,
}

fn spectrum(a: &SpectrumArgs) -> Result<Done, CliError> {
    let m = params(&a.p)?;
    let s = WeightedSpace::for_params(&m)?;
    let entries = (0..=a.jmax)
        .map(|j| {
            let phi = eigenpoly(j, &s, &m)?;
            Ok(SpectrumEntry {
                j,
                lambda: phi.lambda,
                coeffs: phi.coeffs.clone(),
                raw_coeffs: phi.raw_coeffs().iter().map(|c| c.to_string()).collect(),
                b0_unnormalized: phi.b0_unnormalized,
                zeros: positive_zeros(&phi, &s)?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let manifest = Manifest::new("spectrum", a, Some(&m));
    emit(&a.out, envelope(&manifest, entries)?)
}

// ---------------------------------------------------------------- kernel

#[derive(Serialize)]
struct MassSample {
    t: f64,
    x: f64,
    mass: f64,
}

#[derive(Serialize)]
struct EigenTest {
    j: usize,
    s: f64,
    lambda: f64,
    /// sup |e^{-sL}φ_j − e^{-λ_j s}φ_j| / sup |e^{-λ_j s}φ_j| over y ∈ [0, 6].
    relative_error: f64,
}

#[derive(Serialize)]
struct KernelReport {
    alpha: f64,
    c_alpha: f64,
    normalization: Option<Vec<MassSample>>,
    max_normalization_error: Option<f64>,
    eigen_test: Option<EigenTest>,
}

fn kernel(a: &KernelArgs) -> Result<Done, CliError> {
    let m = params(&a.p)?;
    let alpha = a.alpha.unwrap_or(m.alpha);
    let kp = KernelParams::new(alpha)?;
    let mut report = KernelReport {
        alpha,
        c_alpha: kp.c_alpha,
        normalization: None,
        max_normalization_error: None,
        eigen_test: None,
    };
    if a.check_normalization || a.eigen_test.is_none() {
        let mut samples = Vec::new();
        for i in 0..5 {
            for j in 0..5 {
                let t = 0.1 + 4.9 * i as f64 / 4.0;
                let x = 10.0 * j as f64 / 4.0;
                samples.push(MassSample {
                    t,
                    x,
                    mass: check_normalization(t, x, &kp)?,
                });
            }
        }
        report.max_normalization_error = Some(samples.iter().map(|s| (s.mass - 1.0).abs()).fold(0.0, f64::max));
        report.normalization = Some(samples);
    }
    if let Some(v) = &a.eigen_test {
        let j: usize = v[0].parse().map_err(|_| CliError::Domain(format!("bad j: {}", v[0])))?;
        let s: f64 = v[1].parse().map_err(|_| CliError::Domain(format!("bad s: {}", v[1])))?;
        if (alpha - m.alpha).abs() > 1e-12 {
            return domain(format!("--alpha {alpha} does not match α = {} of p = {}", m.alpha, m.p));
        }
        let space = WeightedSpace::for_params(&m)?;
        let phi = eigenpoly(j, &space, &m)?;
        let grid = Arc::new(Grid::uniform(6.0, 60)?);
        let f = |y: f64| phi.eval(y);
        let w = apply_semigroup(s, &f, GrowthTag::polynomial(2.0 * j as f64), &kp, &m, Arc::clone(&grid))?;
        let decay = (-phi.lambda * s).exp();
        let exact: Vec<f64> = grid.nodes().iter().map(|&y| decay * phi.eval(y)).collect();
        let sup = exact.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let err = w.values.iter().zip(&exact).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        report.eigen_test = Some(EigenTest {
            j,
            s,
            lambda: phi.lambda,
            relative_error: err / sup,
        });
    }
    let manifest = Manifest::new("kernel", a, Some(&m));
    emit(&a.out, envelope(&manifest, report)?)
}

// ---------------------------------------------------------------- solve

#[derive(Serialize)]
struct SolveSummary<'a> {
    kind: &'a vhj_core::solver::RunKind,
    stats: &'a vhj_core::solver::RunStats,
    final_t: f64,
    gbu_flagged: bool,
    /// First down-crossing of z(0, t) through 0 (singular runs).
    rbc_time: Option<f64>,
    snapshots: usize,
    warnings: Vec<&'a str>,
    seed: serde_json::Value,
}

fn bump(grid: &Arc<Grid>, amplitude: f64, singular: bool) -> Result<GridFunction, CliError> {
    let r = *grid.nodes().last().unwrap_or(&1.0);
    let pi = std::f64::consts::PI;
    Ok(if singular {
        GridFunction::from_fn(Arc::clone(grid), 0.0, |x| amplitude * (0.5 * pi * x / r).cos().powi(2))?
    } else {
        GridFunction::from_fn(Arc::clone(grid), 0.0, |x| amplitude * (pi * x / r).sin().powi(2))?
    })
}

fn solve(a: &SolveArgs, singular: bool) -> Result<Done, CliError> {
    let mut cfg = RunConfig::load(&a.config)?;
    if let Some(p) = &a.p {
        cfg.params.p = Exponent::Text(p.clone());
    }
    if let Some(t) = a.truncation {
        cfg.params.truncation = Some(t);
    }
    if let Some(s) = a.a {
        cfg.params.a = Some(s);
    }
    if let Some(r) = a.grid_ratio {
        cfg.grid.ratio = Some(r);
    }
    let m = cfg.params.p.params()?;
    let grid = cfg.grid()?;
    let sc = cfg.solver(&m)?;
    let command = if singular { "solve-singular" } else { "solve" };
    let mut manifest = Manifest::new(command, &cfg, Some(&m));
    manifest.config_path = Some(a.config.display().to_string());

    let (result, seed_info) = if singular {
        if cfg.params.truncation.is_some() {
            return domain("truncation applies to solve, not solve-singular");
        }
        let shift = cfg.params.a.unwrap_or(1e-6);
        match &cfg.data {
            DataSection::Rbc {
                ell,
                s0,
                eps,
                sigma,
                d,
                shoot,
            } => {
                let mut spec = RbcSeedSpec::new(*ell, *s0);
                if let Some(e) = eps {
                    spec.eps = *e;
                }
                if let Some(s) = sigma {
                    spec.sigma = *s;
                }
                if let Some(d) = d {
                    spec.d = d.clone();
                }
                let mut shot = None;
                if *shoot {
                    let sh = ShootConfig {
                        a: shift,
                        ..Default::default()
                    };
                    let r = shoot_rbc_seed(&spec, &m, Arc::clone(&grid), &sc, &sh)?;
                    spec = r.spec.clone();
                    shot = Some(r);
                }
                let seed = build_rbc_data(&spec, &m, Arc::clone(&grid))?;
                let info = serde_json::json!({
                    "spec": spec,
                    "lambda": seed.lambda,
                    "tau0": seed.tau0,
                    "boundary_value": seed.boundary_value,
                    "shooting": shot,
                });
                (solve_singular(&seed.z0, &sc, shift)?, info)
            }
            DataSection::Bump { amplitude } => {
                let z0 = bump(&grid, *amplitude, true)?;
                (solve_singular(&z0, &sc, shift)?, serde_json::json!({ "bump": amplitude }))
            }
            DataSection::Gbu { .. } => return domain("gbu seeds are Dirichlet data; use solve"),
        }
    } else {
        if cfg.params.a.is_some() {
            return domain("the shift a applies to solve-singular, not solve");
        }
        let (u0, info) = match &cfg.data {
            DataSection::Gbu {
                ell,
                s0,
                eps,
                sigma,
                d,
            } => {
                let mut spec = GbuSeedSpec::new(*ell, *s0);
                if let Some(e) = eps {
                    spec.eps = *e;
                }
                if let Some(s) = sigma {
                    spec.sigma = *s;
                }
                if let Some(d) = d {
                    spec.d = d.clone();
                }
                let seed = build_gbu_data(&spec, &m, Arc::clone(&grid))?;
                let info = serde_json::json!({
                    "spec": spec,
                    "lambda": seed.lambda,
                    "a": seed.a,
                    "glue_residual": seed.glue_residual,
                    "tau0": seed.tau0,
                });
                (seed.u0, info)
            }
            DataSection::Bump { amplitude } => (bump(&grid, *amplitude, false)?, serde_json::json!({ "bump": amplitude })),
            DataSection::Rbc { .. } => return domain("rbc seeds are data for solve-singular"),
        };
        let r = match cfg.params.truncation {
            Some(level) => solve_truncated(&u0, &sc, level)?,
            None => solve_classical(&u0, &sc)?,
        };
        (r, info)
    };

    let dir = out_dir(&a.out, &manifest);
    let mut art = Artifacts::create(&dir, manifest)?;
    write_run(&mut art, &result, singular, seed_info)?;
    let manifest = art.finish()?;
    let mut text = format!(
        "{} run {}: t = {:.6e}, {} steps, {} snapshots",
        command,
        manifest.id,
        result.stats.final_t,
        result.stats.steps,
        result.snapshots.len()
    );
    if result.gbu_flagged() {
        text += ", gradient threshold reached";
    }
    if singular {
        if let Some(t) = detect_rbc_time(&result) {
            text += &format!(", boundary value reached 0 at t = {t:.9e}");
        }
    }
    text += &format!("\nwrote {}\n", dir.display());
    Ok(Done::ok(text))
}

fn write_run(art: &mut Artifacts, r: &SolveResult, singular: bool, seed: serde_json::Value) -> Result<(), CliError> {
    let col = if singular { "z" } else { "u" };
    for s in &r.snapshots {
        let rows: Vec<Vec<f64>> = s.nodes().iter().zip(&s.values).map(|(&x, &v)| vec![x, v]).collect();
        let name = format!("snapshots/{}", snapshot_name(s.t));
        art.csv(&name, &name, &["x", col], &rows)?;
    }
    let trace = |t: &[(f64, f64)]| t.iter().map(|&(a, b)| vec![a, b]).collect::<Vec<_>>();
    art.csv("boundary", "boundary.csv", &["t", "value"], &trace(&r.boundary_trace))?;
    art.csv("gradient", "gradient.csv", &["t", "value"], &trace(&r.gradient_trace))?;
    art.json_lines("events", "events.jsonl", &r.events)?;
    let summary = SolveSummary {
        kind: &r.kind,
        stats: &r.stats,
        final_t: r.final_state.t,
        gbu_flagged: r.gbu_flagged(),
        rbc_time: if singular { detect_rbc_time(r) } else { None },
        snapshots: r.snapshots.len(),
        warnings: r.warnings(),
        seed,
    };
    art.json("summary", "summary.json", summary)
}

// ---------------------------------------------------------------- zeros

/// Snapshots sorted by time, the value column name, and the shared grid.
fn load_snapshots(dir: &Path) -> Result<(Vec<GridFunction>, String), CliError> {
    let mut files: Vec<(f64, PathBuf)> = std::fs::read_dir(dir)
        .map_err(|e| CliError::Domain(format!("cannot read {}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .filter_map(|p| snapshot_time(&p).map(|t| (t, p)))
        .collect();
    if files.is_empty() {
        return domain(format!("no t=<time>.csv files in {}", dir.display()));
    }
    files.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut grid: Option<Arc<Grid>> = None;
    let mut column = String::new();
    let mut snaps = Vec::new();
    for (t, path) in files {
        let (header, rows) = read_csv(&path)?;
        if header.len() != 2 || header[0] != "x" {
            return domain(format!("{}: expected header x,u or x,z", path.display()));
        }
        if column.is_empty() {
            column = header[1].clone();
        } else if column != header[1] {
            return domain(format!("{}: mixed value columns {column} and {}", path.display(), header[1]));
        }
        let xs: Vec<f64> = rows.iter().map(|r| r[0]).collect();
        let g = match &grid {
            Some(g) if g.nodes() == xs.as_slice() => Arc::clone(g),
            Some(_) => return domain(format!("{}: grid differs from the first snapshot", path.display())),
            None => {
                let g = Arc::new(Grid::from_nodes(xs)?);
                grid = Some(Arc::clone(&g));
                g
            }
        };
        snaps.push(GridFunction::new(g, rows.iter().map(|r| r[1]).collect(), t)?);
    }
    Ok((snaps, column))
}

#[derive(Serialize)]
struct TrackSummary {
    label: usize,
    event: vhj_core::zeros::TerminalEvent,
    degenerate_times: Vec<f64>,
    samples: usize,
}

#[derive(Serialize)]
struct ZerosReport {
    reference: &'static str,
    snapshots: usize,
    tracks: Vec<TrackSummary>,
    counts: Vec<(f64, usize)>,
    counts_nonincreasing: bool,
    ambiguities: Vec<String>,
    vanishing: Option<vhj_core::zeros::VanishingCount>,
}

fn zeros(a: &ZerosArgs) -> Result<Done, CliError> {
    let m = params(&a.p)?;
    let (snaps, column) = load_snapshots(&a.snapshots)?;
    let against_steady = match a.reference {
        Reference::Steady => true,
        Reference::Zero => false,
        Reference::Auto => column != "z",
    };
    let mut cfg = TrackConfig {
        tol: a.tol,
        ..Default::default()
    };
    if let Some(iv) = &a.interval {
        cfg.interval = Some((iv[0], iv[1]));
    }
    let tracking = if against_steady {
        track_intersections(&snaps, |x| m.u(x), &cfg)?
    } else {
        track_intersections(&snaps, |_| 0.0, &cfg)?
    };
    let vanishing = a.t_sing.map(|t| {
        let mut vc = VanishConfig::default();
        if let Some(s) = a.span {
            vc.span = s;
        }
        vanishing_count(&tracking, t, &vc)
    });
    let manifest = Manifest::new("zeros", a, Some(&m));
    let dir = out_dir(&a.out, &manifest);
    let mut art = Artifacts::create(&dir, manifest)?;
    let rows: Vec<Vec<f64>> = tracking
        .tracks
        .iter()
        .flat_map(|tr| tr.samples.iter().map(move |&(t, x)| vec![tr.label as f64, t, x]))
        .collect();
    art.csv("tracks", "tracks.csv", &["label", "t", "x"], &rows)?;
    let report = ZerosReport {
        reference: if against_steady { "U" } else { "0" },
        snapshots: snaps.len(),
        tracks: tracking
            .tracks
            .iter()
            .map(|t| TrackSummary {
                label: t.label,
                event: t.event.clone(),
                degenerate_times: t.degenerate_times.clone(),
                samples: t.samples.len(),
            })
            .collect(),
        counts_nonincreasing: tracking.counts_nonincreasing(),
        counts: tracking.counts.clone(),
        ambiguities: tracking.ambiguities.clone(),
        vanishing,
    };
    let n = report.vanishing.as_ref().map(|v| v.n);
    art.json("events", "events.json", &report)?;
    let manifest = art.finish()?;
    let mut text = format!(
        "zeros {}: {} tracks over {} snapshots, counts {}",
        manifest.id,
        report.tracks.len(),
        report.snapshots,
        if report.counts_nonincreasing { "non-increasing" } else { "INCREASING" }
    );
    if let Some(n) = n {
        text += &format!(", vanishing intersections n = {n}");
    }
    if !report.ambiguities.is_empty() {
        text += &format!(", {} ambiguities", report.ambiguities.len());
    }
    text += &format!("\nwrote {}\n", dir.display());
    Ok(Done::ok(text))
}

// ---------------------------------------------------------------- rates

fn read_trace(path: &Path) -> Result<Vec<(f64, f64)>, CliError> {
    let (header, rows) = read_csv(path)?;
    if header.len() != 2 {
        return domain(format!("{}: expected two columns t,value", path.display()));
    }
    Ok(rows.into_iter().map(|r| (r[0], r[1])).collect())
}

fn rate_fit(a: &RateFitArgs) -> Result<Done, CliError> {
    let m = params(&a.p)?;
    let trace = read_trace(&a.trace)?;
    let manifest = Manifest::new("rate-fit", a, Some(&m));
    let text = if let Some(n) = a.gbu_n {
        let r = gbu_rate_check(&trace, n, &m, (a.m_range[0], a.m_range[1]))?;
        envelope(&manifest, r)?
    } else {
        let series = match (&a.gap, a.t_sing) {
            (Some(g), Some(t)) => select_window(&trace, t, g[0], g[1]),
            (Some(_), None) => return domain("--gap needs --t-sing"),
            (None, _) => trace,
        };
        let st = a.t_sing.map(SingularTime::Known).unwrap_or(SingularTime::Fit);
        envelope(&manifest, fit_power_law(&series, st)?)?
    };
    emit(&a.out, text)
}

fn profile_check(a: &ProfileArgs) -> Result<Done, CliError> {
    let m = params(&a.p)?;
    let (snaps, column) = load_snapshots(&a.snapshots)?;
    let snaps = if column == "z" {
        snaps
    } else {
        // u snapshots: the profile is fitted to u − U
        snaps.iter().map(|s| s.minus_fn(|x| m.u(x))).collect()
    };
    let cfg = RbcProfileConfig {
        y_max: a.y_max,
        min_gap: a.min_gap,
        ..Default::default()
    };
    let report = rbc_profile_check(&snaps, a.tau, a.n, &m, &cfg)?;
    let manifest = Manifest::new("profile-check", a, Some(&m));
    let dir = out_dir(&a.out, &manifest);
    let mut art = Artifacts::create(&dir, manifest)?;
    let rows: Vec<Vec<f64>> = report
        .samples
        .iter()
        .map(|s| vec![s.t, s.gap, s.coefficient, s.misfit, s.nodes_used as f64])
        .collect();
    art.csv("misfit", "misfit.csv", &["t", "gap", "coefficient", "misfit", "nodes"], &rows)?;
    art.json("report", "profile.json", &report)?;
    let manifest = art.finish()?;
    Ok(Done::ok(format!(
        "profile-check {}: {} snapshots, max misfit {:.4}, coefficient drift {:.4}\nwrote {}\n",
        manifest.id,
        report.samples.len(),
        report.max_misfit,
        report.coefficient_drift,
        dir.display()
    )))
}

// ---------------------------------------------------------------- braid

fn parse_word(s: &str) -> Result<BraidWord, CliError> {
    Ok(s.parse::<BraidWord>()?)
}

#[derive(Serialize)]
struct EquivReport {
    w1: BraidWord,
    w2: BraidWord,
    equivalent: bool,
    canonical1: BraidWord,
    canonical2: BraidWord,
    class_size: usize,
}

#[derive(Serialize)]
struct VerifyReport {
    identities: vhj_core::braid::IdentityReport,
    nonreductions: Vec<vhj_core::braid::NonReduction>,
    all_certified: bool,
}

fn braid(op: &BraidOp) -> Result<Done, CliError> {
    match op {
        BraidOp::Equiv { w1, w2, bound } => {
            let (a, b) = (parse_word(w1)?, parse_word(w2)?);
            let mut e = BraidEngine::new(*bound)?;
            let class = e.artin_class(&a)?;
            let report = EquivReport {
                equivalent: e.equiv(&a, &b)?,
                canonical1: e.canonical(&a)?,
                canonical2: e.canonical(&b)?,
                class_size: class.members().len(),
                w1: a,
                w2: b,
            };
            let m = Manifest::new("braid equiv", (w1, w2, bound), None);
            Ok(Done::ok(envelope(&m, report)?))
        }
        BraidOp::Reduce { a, b, bound } => {
            let (x, y) = (parse_word(a)?, parse_word(b)?);
            let mut e = BraidEngine::new(*bound)?;
            let cert = e.reduce_reachable(&x, &y)?;
            if cert.reachable && !e.replay(&cert)? {
                return Err(CliError::Numerical("certificate failed to replay".into()));
            }
            let m = Manifest::new("braid reduce", (a, b, bound), None);
            Ok(Done::ok(envelope(&m, cert)?))
        }
        BraidOp::Verify { nmax, kmax, a_len, out } => {
            if *nmax < 2 {
                return domain("--nmax must be at least 2");
            }
            let mut e = BraidEngine::default();
            let identities = verify_identities(&mut e, *kmax, *a_len)?;
            let nonreductions = verify_nonreductions(&mut e, *nmax)?;
            let all = identities.all_hold && nonreductions.iter().all(|n| n.certified);
            let report = VerifyReport {
                identities,
                nonreductions,
                all_certified: all,
            };
            let m = Manifest::new("braid verify", (nmax, kmax, a_len), None);
            let mut done = emit(out, envelope(&m, report)?)?;
            if !all {
                done.verdict = Some(CliError::Domain("some identity or non-reduction was not certified".into()));
            }
            Ok(done)
        }
        BraidOp::Encode {
            curves,
            order,
            tol,
            slope_tol,
        } => {
            let (header, rows) = read_csv(curves)?;
            if header.len() != 4 {
                return domain(format!("{}: expected columns x,c1,c2,c3", curves.display()));
            }
            let grid = Arc::new(Grid::from_nodes(rows.iter().map(|r| r[0]).collect())?);
            let col = |k: usize| GridFunction::new(Arc::clone(&grid), rows.iter().map(|r| r[k]).collect(), 0.0);
            let (c1, c2, c3) = (col(1)?, col(2)?, col(3)?);
            let convention = match order {
                Order::BottomX => GeneratorOrder::BottomIsX,
                Order::BottomY => GeneratorOrder::BottomIsY,
            };
            let enc = encode([&c1, &c2, &c3], convention, *tol, *slope_tol)?;
            let m = Manifest::new("braid encode", (curves.display().to_string(), order, tol, slope_tol), None);
            Ok(Done::ok(envelope(&m, enc)?))
        }
    }
}

// ---------------------------------------------------------------- reproduce

fn reproduce(a: &ReproduceArgs) -> Result<Done, CliError> {
    match a.experiment {
        Experiment::Acceptance => {
            let results = acceptance::run(|r| println!("{r}"));
            let passed = results.iter().filter(|r| r.pass).count();
            let manifest = Manifest::new("reproduce acceptance", a, ModelParams::new(3.0).ok().as_ref());
            if let Some(dir) = &a.out {
                let mut art = Artifacts::create(dir, manifest)?;
                art.json("report", "acceptance.json", &results)?;
                art.finish()?;
            }
            let mut done = Done::ok(format!("acceptance: {passed} of {} criteria passed\n", results.len()));
            if passed < results.len() {
                done.verdict = Some(CliError::Numerical(format!(
                    "{} acceptance criteria failed",
                    results.len() - passed
                )));
            }
            Ok(done)
        }
    }
}
