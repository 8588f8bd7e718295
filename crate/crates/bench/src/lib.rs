//! Fixtures shared by the criterion benches.

use std::sync::Arc;

use vhj_core::{Grid, GridFunction, ModelParams};

pub fn params() -> ModelParams {
    ModelParams::new(3.0).expect("p = 3 is valid")
}

/// Graded grid on [0, 1] resolving the boundary layer.
pub fn graded_grid(h0: f64) -> Arc<Grid> {
    Arc::new(Grid::graded(1.0, h0, 0.97, Some(5e-3)).expect("valid grid"))
}

/// Smooth nonnegative data vanishing at 0.
pub fn bump(grid: Arc<Grid>) -> GridFunction {
    GridFunction::from_fn(grid, 0.0, |x| (std::f64::consts::PI * x).sin().powi(2)).expect("finite data")
}
