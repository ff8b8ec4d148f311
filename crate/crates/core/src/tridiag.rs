//! Tridiagonal and cyclic tridiagonal solvers.
//!
//! Row i reads `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]`.
//! For the plain solver `lower[0]` and `upper[n-1]` are ignored; the cyclic
//! solver uses them as the corner couplings to `x[n-1]` and `x[0]`.

use thiserror::Error;

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum TridiagError {
    #[error("singular pivot {pivot:e} at row {row}")]
    SingularPivot { row: usize, pivot: f64 },
    #[error("system of size {0} is too small")]
    TooSmall(usize),
}

const PIVOT_FLOOR: f64 = 1e-300;
/// Pivots this small relative to their inputs are treated as exact cancellation.
const CANCELLATION: f64 = 1e-13;

/// Thomas algorithm.
pub fn solve(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &[f64],
) -> Result<Vec<f64>, TridiagError> {
    let n = diag.len();
    if n == 0 {
        return Err(TridiagError::TooSmall(0));
    }
    let mut c = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut pivot = diag[0];
    if pivot.abs() < PIVOT_FLOOR || !pivot.is_finite() {
        return Err(TridiagError::SingularPivot { row: 0, pivot });
    }
    c[0] = if n > 1 { upper[0] / pivot } else { 0.0 };
    x[0] = rhs[0] / pivot;
    for i in 1..n {
        let elim = lower[i] * c[i - 1];
        pivot = diag[i] - elim;
        if pivot.abs() < PIVOT_FLOOR.max(CANCELLATION * (diag[i].abs() + elim.abs()))
            || !pivot.is_finite()
        {
            return Err(TridiagError::SingularPivot { row: i, pivot });
        }
        if i + 1 < n {
            c[i] = upper[i] / pivot;
        }
        x[i] = (rhs[i] - lower[i] * x[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Ok(x)
}

/// Cyclic system via the Sherman–Morrison correction.
pub fn solve_cyclic(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &[f64],
) -> Result<Vec<f64>, TridiagError> {
    let n = diag.len();
    if n < 3 {
        return Err(TridiagError::TooSmall(n));
    }
    let alpha = upper[n - 1];
    let beta = lower[0];
    let gamma = -diag[0];
    let mut b = diag.to_vec();
    b[0] -= gamma;
    b[n - 1] -= alpha * beta / gamma;
    let x = solve(lower, &b, upper, rhs)?;
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = alpha;
    let z = solve(lower, &b, upper, &u)?;
    let denom = 1.0 + z[0] + beta * z[n - 1] / gamma;
    if denom.abs() < PIVOT_FLOOR {
        return Err(TridiagError::SingularPivot {
            row: 0,
            pivot: denom,
        });
    }
    let fact = (x[0] + beta * x[n - 1] / gamma) / denom;
    Ok(x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect())
}
