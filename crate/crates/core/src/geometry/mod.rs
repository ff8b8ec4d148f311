//! Model smooth metric measure spaces.
//!
//! Two families are supported: the line (functions of one Euclidean
//! coordinate x₁ of ℝⁿ, with weight f(x₁)) and rotationally symmetric models
//! dr² + φ(r)² g_{S^{n-1}} carrying a radial weight f(r). The drift Laplacian
//! Δ_f u = Δu − ⟨∇f, ∇u⟩ of a function of the single coordinate reduces to
//!
//! ```text
//! line:    u'' − f'(x) u'
//! radial:  u'' + ((n−1) φ'/φ − f') u'
//! ```
//!
//! Curvature is only assessed along the radial (or x₁) direction, which is
//! the only direction seen by the fields handled here.

mod operator;
mod profile;

pub use operator::DriftOperator;
pub use profile::{Jet, Warp, Weight};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of samples used for probe-region maximisations.
const PROBE_SAMPLES: usize = 1001;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("grid has {0} nodes, at least 3 are required")]
    GridTooSmall(usize),
    #[error("warping function vanishes at interior point r = {0}")]
    WarpVanishes(f64),
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("dimension must be at least 1")]
    InvalidDimension,
    #[error("invalid warping function: {0}")]
    InvalidWarp(String),
    #[error("distance must be positive, got {0}")]
    NonPositiveDistance(f64),
    #[error("empty probe region [{0}, {1}]")]
    EmptyProbe(f64, f64),
    #[error("probe region [{0}, {1}] is not inside the domain or touches the radial origin")]
    ProbeOutsideDomain(f64, f64),
    #[error("negative radial curvature {0} cannot be bounded by -(n-1)K when n = 1")]
    UnboundedCurvature(f64),
    #[error("field has {got} values but the grid has {expected} nodes")]
    LengthMismatch { expected: usize, got: usize },
}

/// Boundary-condition tag for one end of the domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Dirichlet(f64),
    /// Homogeneous Neumann, u' = 0.
    Neumann,
    Periodic,
}

/// Coordinate interval with a boundary tag per end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub lo: f64,
    pub hi: f64,
    pub left: Boundary,
    pub right: Boundary,
}

impl Domain {
    pub fn new(lo: f64, hi: f64, left: Boundary, right: Boundary) -> Self {
        Self {
            lo,
            hi,
            left,
            right,
        }
    }

    pub fn neumann(lo: f64, hi: f64) -> Self {
        Self::new(lo, hi, Boundary::Neumann, Boundary::Neumann)
    }

    pub fn periodic(lo: f64, hi: f64) -> Self {
        Self::new(lo, hi, Boundary::Periodic, Boundary::Periodic)
    }

    pub fn is_periodic(&self) -> bool {
        self.left == Boundary::Periodic
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceKind {
    Line,
    EuclideanRadial,
    HyperbolicRadial,
    WarpedRadial,
}

/// A one-dimensional or rotationally symmetric smooth metric measure space.
///
/// Immutable after construction; every accessor is a pure function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpace {
    n: usize,
    warp: Option<Warp>,
    weight: Weight,
    domain: Domain,
}

impl ModelSpace {
    /// Functions of x₁ on ℝⁿ with weight f(x₁). `n` only enters the
    /// curvature summary through the (n−1)K normalisation.
    pub fn line(n: usize, weight: Weight, domain: Domain) -> Result<Self, GeometryError> {
        let space = Self {
            n,
            warp: None,
            weight,
            domain,
        };
        space.validate()?;
        Ok(space)
    }

    pub fn radial(
        n: usize,
        warp: Warp,
        weight: Weight,
        domain: Domain,
    ) -> Result<Self, GeometryError> {
        let space = Self {
            n,
            warp: Some(warp),
            weight,
            domain,
        };
        space.validate()?;
        Ok(space)
    }

    fn validate(&self) -> Result<(), GeometryError> {
        if self.n == 0 {
            return Err(GeometryError::InvalidDimension);
        }
        let d = &self.domain;
        if !(d.lo.is_finite() && d.hi.is_finite() && d.lo < d.hi) {
            return Err(GeometryError::InvalidDomain(format!(
                "need lo < hi, got [{}, {}]",
                d.lo, d.hi
            )));
        }
        if (d.left == Boundary::Periodic) != (d.right == Boundary::Periodic) {
            return Err(GeometryError::InvalidDomain(
                "periodic boundary must be set on both ends".into(),
            ));
        }
        let Some(warp) = &self.warp else {
            return Ok(());
        };
        if d.is_periodic() {
            return Err(GeometryError::InvalidDomain(
                "radial models cannot be periodic".into(),
            ));
        }
        if d.lo < 0.0 {
            return Err(GeometryError::InvalidDomain(format!(
                "radial domain must start at r >= 0, got {}",
                d.lo
            )));
        }
        if d.lo == 0.0 && d.left != Boundary::Neumann {
            return Err(GeometryError::InvalidDomain(
                "the radial origin needs the symmetric (Neumann) tag".into(),
            ));
        }
        if let Warp::Polynomial(c) = warp {
            if c.len() < 2 || c[0] != 0.0 || c[1] != 1.0 {
                return Err(GeometryError::InvalidWarp(
                    "polynomial warp needs phi(0) = 0 and phi'(0) = 1".into(),
                ));
            }
        }
        // φ > 0 on (0, r_hi]
        for k in 1..=PROBE_SAMPLES {
            let r = d.hi * k as f64 / PROBE_SAMPLES as f64;
            if warp.jet(r).value <= 0.0 {
                return Err(GeometryError::WarpVanishes(r));
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> SpaceKind {
        match &self.warp {
            None => SpaceKind::Line,
            Some(Warp::Euclidean) => SpaceKind::EuclideanRadial,
            Some(Warp::Hyperbolic) => SpaceKind::HyperbolicRadial,
            Some(Warp::Polynomial(_)) => SpaceKind::WarpedRadial,
        }
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn warp(&self) -> Option<&Warp> {
        self.warp.as_ref()
    }

    pub fn weight(&self) -> &Weight {
        &self.weight
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn is_radial(&self) -> bool {
        self.warp.is_some()
    }

    /// Centre x₀ of the reference ball: the radial origin, or the interval
    /// midpoint on the line.
    pub fn center(&self) -> f64 {
        if self.is_radial() {
            0.0
        } else {
            0.5 * (self.domain.lo + self.domain.hi)
        }
    }

    /// Radius of the largest ball B(x₀, R) contained in the domain.
    pub fn ball_radius(&self) -> f64 {
        if self.is_radial() {
            self.domain.hi
        } else {
            0.5 * self.domain.length()
        }
    }

    /// Distance of a coordinate from x₀.
    pub fn distance(&self, x: f64) -> f64 {
        (x - self.center()).abs()
    }

    /// Drift coefficient b with Δ_f u = u'' + b u'.
    pub fn drift(&self, x: f64) -> Result<f64, GeometryError> {
        let fp = self.weight.jet(x).d1;
        match &self.warp {
            None => Ok(-fp),
            Some(w) => {
                let j = w.jet(x);
                if j.value <= 0.0 {
                    return Err(GeometryError::WarpVanishes(x));
                }
                Ok((self.n as f64 - 1.0) * j.d1 / j.value - fp)
            }
        }
    }

    /// Uniform grid over the domain. Periodic grids omit the right endpoint.
    pub fn grid(&self, count: usize) -> Result<Grid, GeometryError> {
        if count < 3 {
            return Err(GeometryError::GridTooSmall(count));
        }
        let d = &self.domain;
        let periodic = d.is_periodic();
        let cells = if periodic { count } else { count - 1 };
        Ok(Grid {
            lo: d.lo,
            spacing: d.length() / cells as f64,
            count,
            periodic,
        })
    }

    /// Δ_f r at distance `r` from x₀.
    ///
    /// On the line the distance is |x₁ − x₀| and Δ_f r = ∓f' on either side;
    /// the larger of the two sides is returned.
    pub fn drift_laplacian_of_distance(&self, r: f64) -> Result<f64, GeometryError> {
        if r.is_nan() || r <= 0.0 {
            return Err(GeometryError::NonPositiveDistance(r));
        }
        match &self.warp {
            Some(_) => self.drift(r),
            None => {
                let x0 = self.center();
                let right = -self.weight.jet(x0 + r).d1;
                let left = self.weight.jet(x0 - r).d1;
                Ok(right.max(left))
            }
        }
    }

    /// Radial Bakry–Émery curvature Ric_f(∂_r, ∂_r) = −(n−1)φ''/φ + f''.
    pub fn radial_curvature(&self, x: f64) -> Result<f64, GeometryError> {
        let fpp = self.weight.jet(x).d2;
        match &self.warp {
            None => Ok(fpp),
            Some(w) => {
                let j = w.jet(x);
                if j.value <= 0.0 {
                    return Err(GeometryError::WarpVanishes(x));
                }
                Ok(-(self.n as f64 - 1.0) * j.d2 / j.value + fpp)
            }
        }
    }

    /// Curvature lower bound K and α = max Δ_f r over the probe annulus
    /// `[r_probe, r_max]` of distances from x₀.
    pub fn curvature_summary(
        &self,
        r_probe: f64,
        r_max: f64,
    ) -> Result<CurvatureSummary, GeometryError> {
        if !(r_probe <= r_max) {
            return Err(GeometryError::EmptyProbe(r_probe, r_max));
        }
        let inside = if self.is_radial() {
            r_probe > 0.0 && r_probe >= self.domain.lo && r_max <= self.domain.hi
        } else {
            r_probe >= 0.0 && r_max <= self.ball_radius()
        };
        if !inside {
            return Err(GeometryError::ProbeOutsideDomain(r_probe, r_max));
        }
        let x0 = self.center();
        let mut min_rho = f64::INFINITY;
        let mut alpha = f64::NEG_INFINITY;
        for k in 0..PROBE_SAMPLES {
            let r = r_probe + (r_max - r_probe) * k as f64 / (PROBE_SAMPLES - 1) as f64;
            if self.is_radial() {
                min_rho = min_rho.min(self.radial_curvature(r)?);
            } else {
                min_rho = min_rho
                    .min(self.radial_curvature(x0 + r)?)
                    .min(self.radial_curvature(x0 - r)?);
            }
            if r > 0.0 {
                alpha = alpha.max(self.drift_laplacian_of_distance(r)?);
            }
        }
        let k = if min_rho >= 0.0 {
            0.0
        } else if self.n == 1 {
            return Err(GeometryError::UnboundedCurvature(min_rho));
        } else {
            -min_rho / (self.n as f64 - 1.0)
        };
        if alpha == f64::NEG_INFINITY {
            // r_probe == r_max == 0 on the line
            alpha = self.drift_laplacian_of_distance(f64::MIN_POSITIVE)?;
        }
        Ok(CurvatureSummary {
            k,
            alpha,
            r_probe,
            r_max,
        })
    }

    /// Inputs of the gradient bound: K over `[r_probe, R]` and α over
    /// `[r_probe, min(1, R)]`, R the ball radius.
    pub fn estimate_curvature(&self, r_probe: f64) -> Result<CurvatureSummary, GeometryError> {
        let radius = self.ball_radius();
        let outer = self.curvature_summary(r_probe, radius)?;
        let unit = self.curvature_summary(r_probe, radius.min(1.0).max(r_probe))?;
        Ok(CurvatureSummary {
            k: outer.k,
            alpha: unit.alpha,
            r_probe,
            r_max: radius,
        })
    }

    /// Drift operator assembled on `grid`.
    pub fn operator(&self, grid: &Grid) -> Result<DriftOperator, GeometryError> {
        DriftOperator::assemble(self, grid)
    }

    /// Δ_f u on the grid nodes, with boundary rows per the domain tags.
    pub fn drift_laplacian(&self, grid: &Grid, u: &[f64]) -> Result<Vec<f64>, GeometryError> {
        self.operator(grid)?.apply(u)
    }
}

/// Lower curvature bound and the comparison constant α.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureSummary {
    /// Ric_f ≥ −(n−1)K along radial directions on the probe region.
    pub k: f64,
    /// max of Δ_f r over the probe annulus.
    pub alpha: f64,
    pub r_probe: f64,
    pub r_max: f64,
}

/// Uniform spatial grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub lo: f64,
    pub spacing: f64,
    pub count: usize,
    pub periodic: bool,
}

impl Grid {
    pub fn x(&self, i: usize) -> f64 {
        self.lo + self.spacing * i as f64
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.x(i)).collect()
    }

    /// Nodes whose value is not fixed by a boundary row.
    pub fn is_boundary_row(&self, i: usize) -> bool {
        !self.periodic && (i == 0 || i + 1 == self.count)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn euclid(n: usize, weight: Weight) -> ModelSpace {
        ModelSpace::radial(n, Warp::Euclidean, weight, Domain::neumann(0.0, 2.0)).unwrap()
    }

    #[test]
    fn distance_laplacian_examples() {
        let e3 = euclid(3, Weight::Zero);
        assert_eq!(e3.drift_laplacian_of_distance(1.0).unwrap(), 2.0);

        let h2 = ModelSpace::radial(2, Warp::Hyperbolic, Weight::Zero, Domain::neumann(0.0, 2.0))
            .unwrap();
        // coth(1) from its series-free definition (e^2 + 1)/(e^2 - 1)
        let e2 = std::f64::consts::E.powi(2);
        let coth1 = (e2 + 1.0) / (e2 - 1.0);
        assert!((h2.drift_laplacian_of_distance(1.0).unwrap() - coth1).abs() < 1e-14);
        assert!((coth1 - 1.3130).abs() < 1e-4);

        let g2 = euclid(2, Weight::Gaussian { s: 1.0 });
        assert_eq!(g2.drift_laplacian_of_distance(1.0).unwrap(), 0.0);
    }

    #[test]
    fn distance_laplacian_rejects_nonpositive_r() {
        let e3 = euclid(3, Weight::Zero);
        assert!(matches!(
            e3.drift_laplacian_of_distance(0.0),
            Err(GeometryError::NonPositiveDistance(_))
        ));
        assert!(e3.drift_laplacian_of_distance(-1.0).is_err());
    }

    #[test]
    fn curvature_summary_examples() {
        let gauss =
            ModelSpace::line(1, Weight::Gaussian { s: 1.0 }, Domain::neumann(-5.0, 5.0)).unwrap();
        let c = gauss.curvature_summary(0.1, 1.0).unwrap();
        assert_eq!(c.k, 0.0);

        let h2 = ModelSpace::radial(2, Warp::Hyperbolic, Weight::Zero, Domain::neumann(0.0, 3.0))
            .unwrap();
        let c = h2.curvature_summary(0.1, 1.0).unwrap();
        assert!((c.k - 1.0).abs() < 1e-12);

        let e3 = euclid(3, Weight::Zero);
        let c = e3.curvature_summary(0.5, 1.0).unwrap();
        assert_eq!(c.alpha, 4.0);
        assert_eq!(c.k, 0.0);
    }

    #[test]
    fn curvature_summary_errors() {
        let e3 = euclid(3, Weight::Zero);
        assert!(matches!(
            e3.curvature_summary(1.0, 0.5),
            Err(GeometryError::EmptyProbe(..))
        ));
        assert!(matches!(
            e3.curvature_summary(0.0, 1.0),
            Err(GeometryError::ProbeOutsideDomain(..))
        ));
        let concave =
            ModelSpace::line(1, Weight::Gaussian { s: -1.0 }, Domain::neumann(-5.0, 5.0)).unwrap();
        assert!(matches!(
            concave.curvature_summary(0.1, 1.0),
            Err(GeometryError::UnboundedCurvature(_))
        ));
    }

    #[test]
    fn construction_errors() {
        assert!(ModelSpace::line(0, Weight::Zero, Domain::neumann(0.0, 1.0)).is_err());
        assert!(ModelSpace::line(1, Weight::Zero, Domain::neumann(1.0, 0.0)).is_err());
        let mixed = Domain::new(0.0, 1.0, Boundary::Periodic, Boundary::Neumann);
        assert!(ModelSpace::line(1, Weight::Zero, mixed).is_err());
        let origin_dirichlet = Domain::new(0.0, 1.0, Boundary::Dirichlet(1.0), Boundary::Neumann);
        assert!(ModelSpace::radial(3, Warp::Euclidean, Weight::Zero, origin_dirichlet).is_err());
        // φ = r − r² vanishes at r = 1
        let warp = Warp::Polynomial(vec![0.0, 1.0, -1.0]);
        assert!(matches!(
            ModelSpace::radial(2, warp, Weight::Zero, Domain::neumann(0.0, 2.0)),
            Err(GeometryError::WarpVanishes(_))
        ));
        let bad = Warp::Polynomial(vec![0.0, 2.0]);
        assert!(ModelSpace::radial(2, bad, Weight::Zero, Domain::neumann(0.0, 2.0)).is_err());
    }

    #[test]
    fn periodic_grid_omits_right_endpoint() {
        let s = ModelSpace::line(1, Weight::Zero, Domain::periodic(0.0, 1.0)).unwrap();
        let g = s.grid(4).unwrap();
        assert_eq!(g.spacing, 0.25);
        assert_eq!(g.x(3), 0.75);
        assert!(!g.is_boundary_row(0));
        assert!(s.grid(2).is_err());
    }
}
