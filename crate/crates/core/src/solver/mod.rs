//! Numerical solutions of u_t = Δ_f u + F(u) and Δ_f u + F(u) = 0.
//!
//! The parabolic solver is a first-order IMEX splitting: the drift Laplacian
//! is advanced implicitly (one tridiagonal solve per step) and the reaction
//! explicitly,
//!
//! ```text
//! (I − Δt L) uⁿ⁺¹ = uⁿ + Δt F(uⁿ)
//! ```
//!
//! Since L has non-negative off-diagonals and zero row sums, the implicit
//! half-step obeys the discrete maximum principle for every Δt.

mod exact;
mod field;
mod snapshot;

pub use exact::ExactSolution;
pub(crate) use field::gradient;
pub use field::SpaceTimeField;
pub use snapshot::{
    read_columns, read_snapshot, write_columns, write_snapshot, Snapshot, SnapshotError,
};

use serde::Serialize;
use thiserror::Error;

use crate::geometry::{DriftOperator, GeometryError, Grid, ModelSpace};
use crate::nonlinearity::{Nonlinearity, NonlinearityError};
use crate::tridiag::{self, TridiagError};

/// Δt · max|F'| must not exceed this.
/// Relative level, against the magnitude of the terms summed in a row, at
/// which a standing residual counts as rounding noise.
const ROUNDOFF_RESIDUAL: f64 = 64.0 * f64::EPSILON;

pub const STABILITY_LIMIT: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Nonlinearity(#[from] NonlinearityError),
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("incompatible pairing: {0}")]
    Incompatible(String),
    #[error(
        "solution left the admissible range at step {step}, node {node} (u = {value}): {reason}"
    )]
    RangeViolation {
        step: usize,
        node: usize,
        value: f64,
        reason: String,
    },
    #[error("divergence at step {step}, node {node} (u = {value})")]
    Divergence {
        step: usize,
        node: usize,
        value: f64,
    },
    #[error("time step {dt} violates the stability policy dt <= {limit}")]
    StepTooLarge { dt: f64, limit: f64 },
    #[error("singular Jacobian at Newton iteration {iteration}, row {row} (pivot {pivot:e})")]
    SingularJacobian {
        iteration: usize,
        row: usize,
        pivot: f64,
    },
    #[error("Newton iteration diverged at iteration {iteration}")]
    NewtonDiverged { iteration: usize },
    #[error(transparent)]
    Linear(#[from] TridiagError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParabolicOptions {
    pub t_start: f64,
    pub duration: f64,
    pub dt: f64,
    /// |u| above this aborts the run.
    pub overflow_guard: f64,
}

impl ParabolicOptions {
    pub fn new(t_start: f64, duration: f64, dt: f64) -> Self {
        Self {
            t_start,
            duration,
            dt,
            overflow_guard: 1e12,
        }
    }

    /// Number of steps; the step is adjusted so that they tile the duration.
    pub fn steps(&self) -> usize {
        ((self.duration / self.dt).round() as usize).max(1)
    }

    pub fn effective_dt(&self) -> f64 {
        self.duration / self.steps() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParabolicRun {
    pub field: SpaceTimeField,
    pub steps: usize,
    /// max |u_t − Δ_f u − F(u)| over a coarse subset of interior nodes.
    pub max_residual: f64,
}

fn range_violation(step: usize, node: usize, value: f64, err: NonlinearityError) -> SolverError {
    SolverError::RangeViolation {
        step,
        node,
        value,
        reason: err.to_string(),
    }
}

pub fn solve_parabolic(
    space: &ModelSpace,
    grid: &Grid,
    nl: &Nonlinearity,
    u0: &[f64],
    opts: &ParabolicOptions,
) -> Result<ParabolicRun, SolverError> {
    nl.validate()?;
    if !(opts.duration > 0.0 && opts.dt > 0.0) {
        return Err(SolverError::InvalidField(format!(
            "duration {} and dt {} must be positive",
            opts.duration, opts.dt
        )));
    }
    let op = space.operator(grid)?;
    let n = grid.count;
    if u0.len() != n {
        return Err(GeometryError::LengthMismatch {
            expected: n,
            got: u0.len(),
        }
        .into());
    }
    let steps = opts.steps();
    let dt = opts.effective_dt();

    let (lower, diag, upper) = implicit_matrix(&op, dt);
    let mut values = Vec::with_capacity(n * (steps + 1));
    values.extend_from_slice(u0);
    let mut u = u0.to_vec();
    let mut rhs = vec![0.0; n];
    for step in 0..steps {
        let mut max_fp: f64 = 0.0;
        for i in 0..n {
            let f = nl.f(u[i]).map_err(|e| range_violation(step, i, u[i], e))?;
            let fp = nl
                .f_prime(u[i])
                .map_err(|e| range_violation(step, i, u[i], e))?;
            max_fp = max_fp.max(fp.abs());
            rhs[i] = match op.pinned(i) {
                Some(v) => v,
                None => u[i] + dt * f,
            };
        }
        if dt * max_fp > STABILITY_LIMIT {
            return Err(SolverError::StepTooLarge {
                dt,
                limit: STABILITY_LIMIT / max_fp,
            });
        }
        u = if op.is_periodic() {
            tridiag::solve_cyclic(&lower, &diag, &upper, &rhs)?
        } else {
            tridiag::solve(&lower, &diag, &upper, &rhs)?
        };
        if let Some((node, value)) = u
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || v.abs() > opts.overflow_guard)
        {
            return Err(SolverError::Divergence {
                step: step + 1,
                node,
                value: *value,
            });
        }
        values.extend_from_slice(&u);
    }
    let field = SpaceTimeField::new(space.clone(), *grid, opts.t_start, dt, values)?;
    let max_residual = coarse_residual(&field, &op, nl)?;
    Ok(ParabolicRun {
        field,
        steps,
        max_residual,
    })
}

fn implicit_matrix(op: &DriftOperator, dt: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = op.len();
    let mut lower = vec![0.0; n];
    let mut diag = vec![1.0; n];
    let mut upper = vec![0.0; n];
    for i in 0..n {
        if op.pinned(i).is_some() {
            continue;
        }
        lower[i] = -dt * op.lower()[i];
        diag[i] = 1.0 - dt * op.diag()[i];
        upper[i] = -dt * op.upper()[i];
    }
    (lower, diag, upper)
}

const COARSE_SAMPLES: usize = 64;

fn coarse_residual(
    field: &SpaceTimeField,
    op: &DriftOperator,
    nl: &Nonlinearity,
) -> Result<f64, SolverError> {
    if field.n_times() < 2 {
        return Ok(0.0);
    }
    let stride_t = (field.n_times() / COARSE_SAMPLES).max(1);
    let stride_x = (field.nodes() / COARSE_SAMPLES).max(1);
    let mut worst: f64 = 0.0;
    for k in (0..field.n_times()).step_by(stride_t) {
        let r = residual_slice(field, op, nl, k)?;
        for i in (0..field.nodes()).step_by(stride_x) {
            if !field.grid().is_boundary_row(i) {
                worst = worst.max(r[i].abs());
            }
        }
    }
    Ok(worst)
}

/// u_t − Δ_f u − F(u) at time index `k`.
fn residual_slice(
    field: &SpaceTimeField,
    op: &DriftOperator,
    nl: &Nonlinearity,
    k: usize,
) -> Result<Vec<f64>, SolverError> {
    let nt = field.n_times();
    let dt = field.dt();
    let (a, b, scale) = if k == 0 {
        (1, 0, 1.0 / dt)
    } else if k + 1 == nt {
        (k, k - 1, 1.0 / dt)
    } else {
        (k + 1, k - 1, 0.5 / dt)
    };
    let u = field.slice(k);
    let lap = op.apply(u)?;
    let (ua, ub) = (field.slice(a), field.slice(b));
    (0..field.nodes())
        .map(|i| Ok((ua[i] - ub[i]) * scale - lap[i] - nl.f(u[i])?))
        .collect()
}

/// Pointwise u_t − Δ_f u − F(u), with centred time differences at interior
/// time nodes and one-sided differences at the first and last.
pub fn residual(field: &SpaceTimeField, nl: &Nonlinearity) -> Result<SpaceTimeField, SolverError> {
    if field.n_times() < 2 {
        return Err(SolverError::InvalidField(
            "residual needs at least two time nodes".into(),
        ));
    }
    let op = field.space().operator(field.grid())?;
    let mut values = Vec::with_capacity(field.values().len());
    for k in 0..field.n_times() {
        values.extend(residual_slice(field, &op, nl, k)?);
    }
    Ok(field.derived(values))
}

/// Δ_f u + F(u) on every node of a single profile.
pub fn standing_residual(
    space: &ModelSpace,
    grid: &Grid,
    nl: &Nonlinearity,
    u: &[f64],
) -> Result<Vec<f64>, SolverError> {
    let lap = space.drift_laplacian(grid, u)?;
    lap.iter().zip(u).map(|(l, v)| Ok(l + nl.f(*v)?)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub overflow_guard: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 50,
            overflow_guard: 1e12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NewtonRecord {
    pub iterations: usize,
    pub converged: bool,
    pub last_update: f64,
    /// max |Δ_f u + F(u)| over free (non-Dirichlet) rows at the returned iterate.
    pub residual_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StandingSolution {
    pub field: SpaceTimeField,
    pub record: NewtonRecord,
}

/// Newton iteration on Δ_f u + F(u) = 0 with Dirichlet rows pinned.
///
/// Stops when max |update| ≤ `tol`, or when the residual of the current
/// iterate is at rounding level (the step that would follow is recorded as
/// a zero update).
pub fn solve_standing(
    space: &ModelSpace,
    grid: &Grid,
    nl: &Nonlinearity,
    guess: &[f64],
    opts: &NewtonOptions,
) -> Result<StandingSolution, SolverError> {
    nl.validate()?;
    let op = space.operator(grid)?;
    let n = grid.count;
    if guess.len() != n {
        return Err(GeometryError::LengthMismatch {
            expected: n,
            got: guess.len(),
        }
        .into());
    }
    let mut u = guess.to_vec();
    for i in 0..n {
        if let Some(v) = op.pinned(i) {
            u[i] = v;
        }
    }
    let mut record = NewtonRecord {
        iterations: 0,
        converged: false,
        last_update: f64::INFINITY,
        residual_max: f64::INFINITY,
    };
    for iteration in 1..=opts.max_iter {
        let lap = op.apply(&u)?;
        let mut lower = vec![0.0; n];
        let mut diag = vec![1.0; n];
        let mut upper = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        let mut floor = 0.0f64;
        for i in 0..n {
            if op.pinned(i).is_some() {
                continue;
            }
            let f = nl
                .f(u[i])
                .map_err(|e| range_violation(iteration, i, u[i], e))?;
            let fp = nl
                .f_prime(u[i])
                .map_err(|e| range_violation(iteration, i, u[i], e))?;
            lower[i] = op.lower()[i];
            diag[i] = op.diag()[i] + fp;
            upper[i] = op.upper()[i];
            rhs[i] = -(lap[i] + f);
            let neighbours = [i.checked_sub(1), Some(i), (i + 1 < n).then_some(i + 1)];
            let u_max = neighbours
                .iter()
                .flatten()
                .fold(0.0f64, |m, &j| m.max(u[j].abs()));
            let row = op.lower()[i].abs() + op.diag()[i].abs() + op.upper()[i].abs();
            floor = floor.max(row * u_max + f.abs());
        }
        // Residual at rounding level: further steps would only amplify
        // rounding along near-null modes of the Jacobian.
        let res_max = rhs.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        if res_max <= ROUNDOFF_RESIDUAL * floor {
            record.iterations = iteration;
            record.last_update = 0.0;
            record.converged = true;
            break;
        }
        let solved = if op.is_periodic() {
            tridiag::solve_cyclic(&lower, &diag, &upper, &rhs)
        } else {
            tridiag::solve(&lower, &diag, &upper, &rhs)
        };
        let delta = solved.map_err(|e| match e {
            TridiagError::SingularPivot { row, pivot } => SolverError::SingularJacobian {
                iteration,
                row,
                pivot,
            },
            other => other.into(),
        })?;
        let update = delta.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        for (ui, di) in u.iter_mut().zip(&delta) {
            *ui += di;
        }
        if !update.is_finite()
            || u.iter()
                .any(|v| !v.is_finite() || v.abs() > opts.overflow_guard)
        {
            return Err(SolverError::NewtonDiverged { iteration });
        }
        record.iterations = iteration;
        record.last_update = update;
        if update <= opts.tol {
            record.converged = true;
            break;
        }
    }
    let res = standing_residual(space, grid, nl, &u)?;
    record.residual_max = (0..n)
        .filter(|i| op.pinned(*i).is_none())
        .map(|i| res[i].abs())
        .fold(0.0, f64::max);
    let field = SpaceTimeField::new(space.clone(), *grid, 0.0, 0.0, u)?;
    Ok(StandingSolution { field, record })
}
