//! Flux-form discretisation of the drift Laplacian.
//!
//! Δ_f u is written in divergence form with respect to the weighted measure
//! dμ = φ^{n−1} e^{−f} dr, i.e. Δ_f u = μ'⁻¹ (μ' u')' with μ' the density.
//! Each node owns the control volume between neighbouring midpoints; the
//! geometric factor φ^{n−1} is integrated exactly over the control volume and
//! sampled at the faces, while the weight factor is fitted across each face:
//!
//! ```text
//! (Δ_f u)_i = Σ_faces φ(face)^{n−1} (u_j − u_i) / ( ∫_face e^{f−f(x_i)} · ∫_cell φ^{n−1} )
//! ```
//!
//! The stencil is second order, is exact on quadratics when f ≡ 0 (including
//! the radial origin row, which reduces to 2n(u₁ − u₀)/h²), is exact on the
//! weight's kernel e^{f} when f is linear, and has non-negative off-diagonal
//! entries for every h.

use super::{Boundary, GeometryError, Grid, ModelSpace};

#[derive(Debug, Clone, PartialEq)]
pub struct DriftOperator {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    periodic: bool,
    left: Boundary,
    right: Boundary,
}

impl DriftOperator {
    pub(crate) fn assemble(space: &ModelSpace, grid: &Grid) -> Result<Self, GeometryError> {
        let n = grid.count;
        if n < 3 {
            return Err(GeometryError::GridTooSmall(n));
        }
        let h = grid.spacing;
        let dom = space.domain();
        let weight = space.weight();
        let dim = space.dimension();

        let face_area = |x: f64| -> Result<f64, GeometryError> {
            match space.warp() {
                None => Ok(1.0),
                Some(w) => {
                    let phi = w.jet(x).value;
                    if phi <= 0.0 {
                        return Err(GeometryError::WarpVanishes(x));
                    }
                    Ok(phi.powi(dim as i32 - 1))
                }
            }
        };
        let cell_volume = |a: f64, b: f64| match space.warp() {
            None => b - a,
            Some(w) => w.volume(dim, a, b),
        };

        let mut lower = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut upper = vec![0.0; n];
        for i in 0..n {
            let x = grid.x(i);
            let first = i == 0 && !grid.periodic;
            let last = i + 1 == n && !grid.periodic;
            if (first && matches!(dom.left, Boundary::Dirichlet(_)))
                || (last && matches!(dom.right, Boundary::Dirichlet(_)))
            {
                continue;
            }
            let a = if first { x } else { x - 0.5 * h };
            let b = if last { x } else { x + 0.5 * h };
            let volume = cell_volume(a, b);
            if !last {
                upper[i] = face_area(x + 0.5 * h)? / (weight.exp_integral(x, x + h, x) * volume);
            }
            if !first {
                lower[i] = face_area(x - 0.5 * h)? / (weight.exp_integral(x - h, x, x) * volume);
            }
            diag[i] = -(lower[i] + upper[i]);
        }
        Ok(Self {
            lower,
            diag,
            upper,
            periodic: grid.periodic,
            left: dom.left,
            right: dom.right,
        })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    /// Sub-diagonal coefficients; entry 0 couples to the last node when periodic.
    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    /// Super-diagonal coefficients; the last entry couples to node 0 when periodic.
    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Dirichlet value pinned at row `i`, if any.
    pub fn pinned(&self, i: usize) -> Option<f64> {
        if self.periodic {
            return None;
        }
        let tag = if i == 0 {
            self.left
        } else if i + 1 == self.len() {
            self.right
        } else {
            return None;
        };
        match tag {
            Boundary::Dirichlet(v) => Some(v),
            _ => None,
        }
    }

    /// Operator value at row `i`, ignoring Dirichlet pinning.
    fn row(&self, u: &[f64], i: usize) -> f64 {
        let n = u.len();
        let left = if i > 0 {
            u[i - 1]
        } else if self.periodic {
            u[n - 1]
        } else {
            u[i]
        };
        let right = if i + 1 < n {
            u[i + 1]
        } else if self.periodic {
            u[0]
        } else {
            u[i]
        };
        self.lower[i] * (left - u[i]) + self.upper[i] * (right - u[i])
    }

    /// Applies the operator. Dirichlet rows carry the linear extrapolation of
    /// the adjacent interior values.
    pub fn apply(&self, u: &[f64]) -> Result<Vec<f64>, GeometryError> {
        let n = self.len();
        if u.len() != n {
            return Err(GeometryError::LengthMismatch {
                expected: n,
                got: u.len(),
            });
        }
        let mut out: Vec<f64> = (0..n).map(|i| self.row(u, i)).collect();
        let extrapolate = |a: f64, b: f64| if n >= 4 { 2.0 * a - b } else { a };
        if self.pinned(0).is_some() {
            out[0] = extrapolate(out[1], out[2]);
        }
        if self.pinned(n - 1).is_some() {
            out[n - 1] = extrapolate(out[n - 2], out[n - 3]);
        }
        Ok(out)
    }
}
