//! Run configuration: TOML with sections [params], [grid], [stepping], [stop],
//! plus [data] for the initial profile and [output] for snapshots.
//!
//! ```toml
//! [params]
//! p = "3"
//! truncation = 1e4      # solve only
//! a = 1e-8              # solve-singular only
//!
//! [grid]
//! r = 2.5
//! h0 = 2e-7             # graded; or `nodes = 2000` for a uniform grid
//! ratio = 0.97
//! h_max = 2e-3
//!
//! [stepping]
//! dt0 = 1e-7            # adaptive; or `dt = 1e-5` for fixed steps
//! target = 0.003
//!
//! [stop]
//! t_end = 0.05
//! grad_threshold = 1000
//!
//! [data]
//! kind = "gbu"          # gbu | rbc | bump
//! ell = 1
//! s0 = 4.0
//!
//! [output]
//! every = 50
//! slope_levels = [10, 100, 1000]
//! ```

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use vhj_core::solver::{SnapshotPlan, SolverConfig, Stepping};
use vhj_core::{Grid, ModelParams};

use crate::error::{domain, CliError};

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
pub enum Exponent {
    Number(f64),
    Text(String),
}

impl Exponent {
    pub fn params(&self) -> Result<ModelParams, CliError> {
        Ok(match self {
            Exponent::Number(p) => ModelParams::new(*p)?,
            Exponent::Text(s) => ModelParams::parse(s)?,
        })
    }
}

impl Default for Exponent {
    fn default() -> Self {
        Exponent::Number(3.0)
    }
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    #[serde(default)]
    pub p: Exponent,
    pub truncation: Option<f64>,
    pub a: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub r: f64,
    pub h0: Option<f64>,
    pub ratio: Option<f64>,
    pub h_max: Option<f64>,
    pub nodes: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SteppingSection {
    pub dt: Option<f64>,
    pub dt0: Option<f64>,
    pub target: Option<f64>,
    pub dt_min: Option<f64>,
    pub dt_max: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct StopSection {
    pub t_end: f64,
    pub grad_threshold: Option<f64>,
    pub max_steps: Option<usize>,
    pub stop_on_crossing: Option<bool>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DataSection {
    /// Blow-up seed; `d` defaults to zeros.
    Gbu {
        ell: usize,
        s0: f64,
        eps: Option<f64>,
        sigma: Option<f64>,
        d: Option<Vec<f64>>,
    },
    /// Recovery seed; with `shoot = true` the lower coefficients are tuned first.
    Rbc {
        ell: usize,
        s0: f64,
        eps: Option<f64>,
        sigma: Option<f64>,
        d: Option<Vec<f64>>,
        #[serde(default)]
        shoot: bool,
    },
    /// A sin²(πx/R) for the Dirichlet solvers, A cos²(πx/2R) as z0 for the singular one.
    Bump { amplitude: f64 },
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub every: Option<usize>,
    #[serde(default)]
    pub times: Vec<f64>,
    #[serde(default)]
    pub slope_levels: Vec<f64>,
    #[serde(default)]
    pub value_levels: Vec<f64>,
    pub trace_every: Option<usize>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub params: ParamsSection,
    pub grid: GridSection,
    #[serde(default)]
    pub stepping: SteppingSection,
    pub stop: StopSection,
    pub data: DataSection,
    #[serde(default)]
    pub output: OutputSection,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Domain(format!("cannot read {}: {e}", path.display())))?;
        Ok(toml::from_str(&text)?)
    }

    pub fn grid(&self) -> Result<Arc<Grid>, CliError> {
        let g = &self.grid;
        let grid = match (g.nodes, g.h0) {
            (Some(n), None) => Grid::uniform(g.r, n)?,
            (None, Some(h0)) => Grid::graded(g.r, h0, g.ratio.unwrap_or(0.97), g.h_max)?,
            _ => return domain("[grid] needs exactly one of `nodes` (uniform) or `h0` (graded)"),
        };
        Ok(Arc::new(grid))
    }

    pub fn solver(&self, params: &ModelParams) -> Result<SolverConfig, CliError> {
        let s = &self.stepping;
        let stepping = match (s.dt, s.dt0, s.target) {
            (Some(dt), None, None) => Stepping::Fixed { dt },
            (None, Some(dt0), Some(target)) => Stepping::Adaptive {
                dt0,
                dt_min: s.dt_min.unwrap_or(1e-16),
                dt_max: s.dt_max.unwrap_or(f64::INFINITY),
                target,
            },
            _ => return domain("[stepping] needs either `dt` or both `dt0` and `target`"),
        };
        let mut cfg = SolverConfig::new(params.clone(), stepping, self.stop.t_end);
        cfg.grad_threshold = self.stop.grad_threshold;
        if let Some(n) = self.stop.max_steps {
            cfg.max_steps = n;
        }
        if let Some(b) = self.stop.stop_on_crossing {
            cfg.stop_on_crossing = b;
        }
        let o = &self.output;
        cfg.snapshots = SnapshotPlan {
            times: o.times.clone(),
            every: o.every,
            slope_levels: o.slope_levels.clone(),
            value_levels: o.value_levels.clone(),
        };
        if let Some(n) = o.trace_every {
            cfg.trace_every = n;
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
        [params]
        p = "7/2"
        [grid]
        r = 1.0
        nodes = 100
        [stepping]
        dt = 1e-4
        [stop]
        t_end = 0.01
        [data]
        kind = "bump"
        amplitude = 0.3
    "#;

    #[test]
    fn parses_sections() {
        let c: RunConfig = toml::from_str(SAMPLE).unwrap();
        assert_eq!(c.params.p.params().unwrap().p, 3.5);
        assert_eq!(c.grid().unwrap().len(), 101);
        let s = c.solver(&c.params.p.params().unwrap()).unwrap();
        assert_eq!(s.stepping, Stepping::Fixed { dt: 1e-4 });
        assert!(matches!(c.data, DataSection::Bump { amplitude } if amplitude == 0.3));
    }

    #[test]
    fn rejects_unknown_keys_and_mixed_grids() {
        let bad = SAMPLE.replace("nodes = 100", "nodes = 100\nh0 = 1e-3");
        let c: RunConfig = toml::from_str(&bad).unwrap();
        assert!(c.grid().is_err());
        assert!(toml::from_str::<RunConfig>(&SAMPLE.replace("t_end", "tend")).is_err());
    }
}
