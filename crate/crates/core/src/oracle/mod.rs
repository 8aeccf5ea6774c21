//! Independent numerical reference: an explicit L1 finite-difference solver
//! and a brute-force Caputo quadrature.

mod l1;
mod quadrature;

pub use l1::{
    alternating_weight_sum, l1_weights, max_stable_dt, solve_fd, solve_fd_with, FdOptions, FdReport,
    FdSolution, Memory, Stability, Substeps, AUTO_EXACT_STEPS, DEFAULT_MAX_STEPS,
};
pub use quadrature::{caputo_quadrature, Integrand, DEFAULT_QUADRATURE_TOL};

use serde::{Deserialize, Serialize};

use crate::expr::ExprError;
use crate::fracops::FracError;
use crate::vimcore::{FracPoly, VimError};

#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error("invalid grid: {reason}")]
    InvalidGrid { reason: String },
    #[error("unsupported: {reason}")]
    Unsupported { reason: String },
    #[error(
        "unstable step dt = {dt:e} for dx = {dx:e}: ratio {ratio:.4} > 1",
        dt = stability.dt,
        dx = stability.dx,
        ratio = stability.ratio()
    )]
    Unstable { stability: Stability },
    #[error("run needs {steps:e} time steps, limit is {max}")]
    TooManySteps { steps: f64, max: usize },
    #[error("solver diverged at step {step} (t = {t}, x = {x})")]
    Diverged { step: usize, t: f64, x: f64 },
    #[error("non-finite value at x index {i}, t index {j}")]
    NonFinite { i: usize, j: usize },
    #[error("quadrature did not converge: {coarse} vs {fine} with n = {n}")]
    NonConvergence { coarse: f64, fine: f64, n: usize },
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Frac(#[from] FracError),
    #[error(transparent)]
    Vim(#[from] VimError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    /// Endpoint values frozen at `g(x_min)`, `g(x_max)`.
    Dirichlet,
    /// `x_max` identified with `x_min`.
    Periodic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub t_max: f64,
    pub nt: usize,
    pub boundary: Boundary,
}

impl GridSpec {
    pub fn new(
        x_min: f64,
        x_max: f64,
        nx: usize,
        t_max: f64,
        nt: usize,
        boundary: Boundary,
    ) -> Result<GridSpec, OracleError> {
        let grid = GridSpec { x_min, x_max, nx, t_max, nt, boundary };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        let bad = |reason: String| Err(OracleError::InvalidGrid { reason });
        if !(self.x_min.is_finite() && self.x_max.is_finite() && self.x_min < self.x_max) {
            return bad(format!("need finite x_min < x_max, got [{}, {}]", self.x_min, self.x_max));
        }
        if self.nx < 3 {
            return bad(format!("nx must be at least 3, got {}", self.nx));
        }
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return bad(format!("t_max must be positive, got {}", self.t_max));
        }
        if self.nt < 2 {
            return bad(format!("nt must be at least 2, got {}", self.nt));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn dt(&self) -> f64 {
        self.t_max / (self.nt - 1) as f64
    }

    /// Node `i` is computed as `x_min + i Δx`, with the last node pinned
    /// to `x_max`.
    pub fn xs(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.nx).map(|i| if i + 1 == self.nx { self.x_max } else { self.x_min + i as f64 * dx }).collect()
    }

    pub fn ts(&self) -> Vec<f64> {
        let dt = self.dt();
        (0..self.nt).map(|j| if j + 1 == self.nt { self.t_max } else { j as f64 * dt }).collect()
    }
}

/// Samples `u(x_i, t_j)`, stored one time row after another.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl GridField {
    /// `values` holds `nt` rows of `nx` samples each.
    pub fn from_rows(grid: GridSpec, values: Vec<f64>) -> Result<GridField, OracleError> {
        grid.validate()?;
        if values.len() != grid.nx * grid.nt {
            return Err(OracleError::InvalidGrid {
                reason: format!("{} values for a {}x{} grid", values.len(), grid.nx, grid.nt),
            });
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(OracleError::NonFinite { i: k % grid.nx, j: k / grid.nx });
        }
        Ok(GridField { grid, values })
    }

    pub fn from_fn(grid: GridSpec, mut f: impl FnMut(f64, f64) -> f64) -> Result<GridField, OracleError> {
        let xs = grid.xs();
        let values = grid
            .ts()
            .iter()
            .flat_map(|&t| xs.iter().map(move |&x| (x, t)).collect::<Vec<_>>())
            .map(|(x, t)| f(x, t))
            .collect();
        GridField::from_rows(grid, values)
    }

    /// Evaluates a truncated series on every grid node.
    pub fn from_series(grid: GridSpec, series: &FracPoly) -> Result<GridField, OracleError> {
        let rows = series.evaluate_grid(&grid.xs(), &grid.ts())?;
        GridField::from_rows(grid, rows.into_iter().flatten().collect())
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.grid.nx + i]
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.values[j * self.grid.nx..(j + 1) * self.grid.nx]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorLocation {
    pub x: f64,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorReport {
    pub max_abs: f64,
    /// `sqrt(Δx Δt Σ e²)`.
    pub l2: f64,
    pub max_at: ErrorLocation,
    pub points: usize,
    pub t_cut: f64,
}

/// Compares a series against a field on the nodes with `t_j ≤ t_cut`.
pub fn compare(series: &FracPoly, fd: &GridField, t_cut: f64) -> Result<ErrorReport, OracleError> {
    let grid = fd.grid();
    if !(t_cut >= 0.0 && t_cut <= grid.t_max * (1.0 + 1e-12)) {
        return Err(OracleError::InvalidGrid {
            reason: format!("t_cut {t_cut} outside [0, {}]", grid.t_max),
        });
    }
    let xs = grid.xs();
    let ts: Vec<f64> = grid.ts().into_iter().filter(|&t| t <= t_cut * (1.0 + 1e-12)).collect();
    let approx = series.evaluate_grid(&xs, &ts)?;
    compare_rows(&approx, fd, t_cut)
}

/// As [`compare`], with the first field playing the part of the series.
pub fn compare_fields(a: &GridField, b: &GridField, t_cut: f64) -> Result<ErrorReport, OracleError> {
    if a.grid() != b.grid() {
        return Err(OracleError::InvalidGrid { reason: "fields on different grids".into() });
    }
    let keep = a.grid().ts().iter().filter(|&&t| t <= t_cut * (1.0 + 1e-12)).count();
    let rows: Vec<Vec<f64>> = (0..keep).map(|j| a.row(j).to_vec()).collect();
    compare_rows(&rows, b, t_cut)
}

fn compare_rows(approx: &[Vec<f64>], fd: &GridField, t_cut: f64) -> Result<ErrorReport, OracleError> {
    let grid = fd.grid();
    let xs = grid.xs();
    let ts = grid.ts();
    let mut max_abs = 0.0;
    let mut max_at = ErrorLocation { x: xs[0], t: 0.0 };
    let mut sum_sq = 0.0;
    let mut points = 0;
    for (j, row) in approx.iter().enumerate() {
        for (i, a) in row.iter().enumerate() {
            let e = (a - fd.at(i, j)).abs();
            if !e.is_finite() {
                return Err(OracleError::NonFinite { i, j });
            }
            if e > max_abs {
                max_abs = e;
                max_at = ErrorLocation { x: xs[i], t: ts[j] };
            }
            sum_sq += e * e;
            points += 1;
        }
    }
    Ok(ErrorReport { max_abs, l2: (grid.dx() * grid.dt() * sum_sq).sqrt(), max_at, points, t_cut })
}
