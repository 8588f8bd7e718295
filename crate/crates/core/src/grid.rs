//! Spatial grids and sampled functions shared by every module.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::interp::MonotoneCubic;

/// Strictly increasing nodes, optionally graded geometrically toward the left end.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    nodes: Vec<f64>,
    /// Ratio of consecutive cell sizes h_i / h_{i+1} in the graded part; 1 for uniform grids.
    ratio: f64,
}

impl Grid {
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return invalid("a grid needs at least two nodes");
        }
        if nodes.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("grid node".into()));
        }
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return invalid("grid nodes must be strictly increasing");
        }
        Ok(Self { nodes, ratio: 1.0 })
    }

    /// `n` equal cells on [0, r].
    pub fn uniform(r: f64, n: usize) -> Result<Self> {
        if !(r > 0.0) || n < 1 {
            return invalid("uniform grid needs r > 0 and at least one cell");
        }
        let h = r / n as f64;
        let mut nodes: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
        nodes[n] = r;
        Ok(Self { nodes, ratio: 1.0 })
    }

    /// Geometric grading on [0, r]: first cell `h0`, each next cell larger by
    /// the factor `1/ratio`, capped at `h_max` when given.
    pub fn graded(r: f64, h0: f64, ratio: f64, h_max: Option<f64>) -> Result<Self> {
        if !(r > 0.0) || !(h0 > 0.0) || h0 >= r {
            return invalid("graded grid needs 0 < h0 < r");
        }
        if !(ratio > 0.0 && ratio <= 1.0) {
            return invalid("grading ratio must lie in (0, 1]");
        }
        let cap = h_max.unwrap_or(f64::INFINITY);
        if cap < h0 {
            return invalid("cell cap must be at least h0");
        }
        let mut nodes = vec![0.0];
        let mut x = 0.0;
        let mut h = h0;
        loop {
            if x + 1.5 * h >= r {
                nodes.push(r);
                break;
            }
            x += h;
            nodes.push(x);
            h = (h / ratio).min(cap);
        }
        Ok(Self { nodes, ratio })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn left(&self) -> f64 {
        self.nodes[0]
    }

    pub fn right(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn finest_cell(&self) -> f64 {
        self.nodes
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn coarsest_cell(&self) -> f64 {
        self.nodes.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// Index of the cell [x_i, x_{i+1}] containing `x` (clamped to the grid).
    pub fn locate(&self, x: f64) -> usize {
        let n = self.nodes.len();
        match self.nodes.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(n - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 2),
        }
    }
}

/// Values on a grid at one time stamp (physical time `t`, or `s` in similarity variables).
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub grid: Arc<Grid>,
    pub values: Vec<f64>,
    pub t: f64,
}

impl GridFunction {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>, t: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return invalid(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            ));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("value at node {i}")));
        }
        Ok(Self { grid, values, t })
    }

    pub fn from_fn(grid: Arc<Grid>, t: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&x| f(x)).collect();
        Self::new(grid, values, t)
    }

    pub fn nodes(&self) -> &[f64] {
        self.grid.nodes()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Pointwise `self - f(x)`, keeping grid and stamp.
    pub fn minus_fn(&self, f: impl Fn(f64) -> f64) -> Self {
        let values = self
            .nodes()
            .iter()
            .zip(&self.values)
            .map(|(&x, &v)| v - f(x))
            .collect();
        Self {
            grid: Arc::clone(&self.grid),
            values,
            t: self.t,
        }
    }

    /// Pointwise difference of two functions on the same grid.
    pub fn minus(&self, other: &GridFunction) -> Result<Self> {
        if self.grid.nodes() != other.grid.nodes() {
            return invalid("grid functions live on different grids");
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self {
            grid: Arc::clone(&self.grid),
            values,
            t: self.t,
        })
    }

    /// Piecewise-linear evaluation (constant extension outside the grid).
    pub fn eval_linear(&self, x: f64) -> f64 {
        let xs = self.nodes();
        if x <= xs[0] {
            return self.values[0];
        }
        if x >= xs[xs.len() - 1] {
            return self.values[xs.len() - 1];
        }
        let i = self.grid.locate(x);
        let w = (x - xs[i]) / (xs[i + 1] - xs[i]);
        self.values[i] * (1.0 - w) + self.values[i + 1] * w
    }

    pub fn interpolant(&self) -> MonotoneCubic {
        MonotoneCubic::new(self.nodes().to_vec(), self.values.clone())
            .expect("grid functions satisfy interpolation preconditions")
    }

    /// Resample onto another grid with monotone cubic interpolation.
    pub fn resample(&self, grid: Arc<Grid>) -> Result<Self> {
        let m = self.interpolant();
        let values = grid.nodes().iter().map(|&x| m.eval(x)).collect();
        Self::new(grid, values, self.t)
    }
}
