use serde::Serialize;

use super::SolverError;
use crate::geometry::{Grid, ModelSpace};

/// Values of a scalar on a uniform space–time lattice, stored time-major.
///
/// Derived quantities (w, residuals) reuse the same type with the
/// positivity flag cleared.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpaceTimeField {
    space: ModelSpace,
    grid: Grid,
    t_start: f64,
    dt: f64,
    n_times: usize,
    values: Vec<f64>,
    positive: bool,
}

impl SpaceTimeField {
    pub fn new(
        space: ModelSpace,
        grid: Grid,
        t_start: f64,
        dt: f64,
        values: Vec<f64>,
    ) -> Result<Self, SolverError> {
        let nodes = grid.count;
        if nodes < 5 {
            return Err(SolverError::InvalidField(format!(
                "grid has {nodes} nodes, at least 5 are required"
            )));
        }
        if values.is_empty() || values.len() % nodes != 0 {
            return Err(SolverError::InvalidField(format!(
                "{} values do not fill whole time slices of {nodes} nodes",
                values.len()
            )));
        }
        let n_times = values.len() / nodes;
        if n_times > 1 && !(dt > 0.0 && dt.is_finite()) {
            return Err(SolverError::InvalidField(format!(
                "time step must be positive, got {dt}"
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(SolverError::InvalidField(format!(
                "non-finite value at node {}, time index {}",
                pos % nodes,
                pos / nodes
            )));
        }
        let positive = values.iter().all(|v| *v > 0.0);
        Ok(Self {
            space,
            grid,
            t_start,
            dt,
            n_times,
            values,
            positive,
        })
    }

    /// Same lattice, new values.
    pub(crate) fn derived(&self, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        Self {
            space: self.space.clone(),
            grid: self.grid,
            t_start: self.t_start,
            dt: self.dt,
            n_times: self.n_times,
            values,
            positive: false,
        }
    }

    pub fn space(&self) -> &ModelSpace {
        &self.space
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn nodes(&self) -> usize {
        self.grid.count
    }

    pub fn n_times(&self) -> usize {
        self.n_times
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t_start + self.dt * k as f64
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.n_times - 1)
    }

    pub fn duration(&self) -> f64 {
        self.t_end() - self.t_start
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_times).map(|k| self.time(k)).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn slice(&self, k: usize) -> &[f64] {
        let n = self.nodes();
        &self.values[k * n..(k + 1) * n]
    }

    pub fn value(&self, i: usize, k: usize) -> f64 {
        self.values[k * self.nodes() + i]
    }

    /// True when every stored value is strictly positive.
    pub fn is_positive(&self) -> bool {
        self.positive
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn slice_range(&self, k: usize) -> (f64, f64) {
        self.slice(k)
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(*v), hi.max(*v))
            })
    }

    /// Centred first differences; periodic rows wrap, boundary rows use the
    /// second-order one-sided formula.
    pub fn gradient(&self, k: usize) -> Vec<f64> {
        gradient(self.slice(k), &self.grid)
    }

    /// Final time slice.
    pub fn last(&self) -> &[f64] {
        self.slice(self.n_times - 1)
    }
}

pub(crate) fn gradient(u: &[f64], grid: &Grid) -> Vec<f64> {
    let n = u.len();
    let h = grid.spacing;
    (0..n)
        .map(|i| {
            if grid.periodic {
                let l = u[(i + n - 1) % n];
                let r = u[(i + 1) % n];
                (r - l) / (2.0 * h)
            } else if i == 0 {
                (4.0 * (u[1] - u[0]) - (u[2] - u[0])) / (2.0 * h)
            } else if i + 1 == n {
                (4.0 * (u[n - 1] - u[n - 2]) - (u[n - 1] - u[n - 3])) / (2.0 * h)
            } else {
                (u[i + 1] - u[i - 1]) / (2.0 * h)
            }
        })
        .collect()
}
