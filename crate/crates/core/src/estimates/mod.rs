//! Cutoff construction and checks of the weighted gradient estimate.

mod cutoff;
mod lemma;

pub use cutoff::{
    build_cutoff, smooth_step, CutoffCertificate, CutoffProfile, FactorJet, PropertyCheck,
    SpatialConstant, StepJet, CERTIFY_POINTS, CUTOFF_EXPONENTS,
};
pub use lemma::{lemma21_check, w_field, w_field_power, Lemma21Report, DEFAULT_C_V};

use std::fmt::Write as _;
use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{CurvatureSummary, GeometryError};
use crate::nonlinearity::{Nonlinearity, NonlinearityError};
use crate::solver::{SolverError, SpaceTimeField};

/// Attached to every report: the checks see only radial (or x₁) curvature.
pub const RADIAL_CLASS_NOTE: &str =
    "curvature bound assessed along the radial direction only; valid for radial (x1-dependent) solutions";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimateError {
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Nonlinearity(#[from] NonlinearityError),
    #[error("field is not positive: u = {value} at node {node}, time index {time_index}")]
    NotPositive {
        node: usize,
        time_index: usize,
        value: f64,
    },
    #[error("epsilon must lie in (0, 1), got {0}")]
    EpsilonOutOfRange(f64),
    #[error("verification region is empty")]
    EmptyRegion,
    #[error("verification region touches boundary row {0}")]
    RegionTouchesBoundary(usize),
    #[error("verification region includes the first time node")]
    RegionIncludesInitialTime,
    #[error("bracket must be positive, got {0}")]
    NonPositiveBracket(f64),
    #[error("invalid cutoff: {0}")]
    InvalidCutoff(String),
}

/// Index box of lattice points: nodes × time indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub nodes: Range<usize>,
    pub times: Range<usize>,
}

impl Region {
    /// Nodes within R/2 of the centre, excluding boundary rows, at every
    /// time after the first.
    pub fn inner_half(field: &SpaceTimeField) -> Result<Self, EstimateError> {
        let space = field.space();
        let half = 0.5 * space.ball_radius();
        let grid = field.grid();
        let inside: Vec<usize> = (0..grid.count)
            .filter(|&i| {
                !grid.is_boundary_row(i) && space.distance(grid.x(i)) <= half + 1e-12 * half
            })
            .collect();
        let (Some(&first), Some(&last)) = (inside.first(), inside.last()) else {
            return Err(EstimateError::EmptyRegion);
        };
        let region = Self {
            nodes: first..last + 1,
            times: 1..field.n_times(),
        };
        region.validate(field)?;
        Ok(region)
    }

    pub fn nodes(&self) -> Range<usize> {
        self.nodes.clone()
    }

    pub fn times(&self) -> Range<usize> {
        self.times.clone()
    }

    pub fn validate(&self, field: &SpaceTimeField) -> Result<(), EstimateError> {
        if self.nodes.is_empty() || self.times.is_empty() {
            return Err(EstimateError::EmptyRegion);
        }
        if self.nodes.end > field.nodes() || self.times.end > field.n_times() {
            return Err(EstimateError::EmptyRegion);
        }
        let grid = field.grid();
        for i in [self.nodes.start, self.nodes.end - 1] {
            if grid.is_boundary_row(i) {
                return Err(EstimateError::RegionTouchesBoundary(i));
            }
        }
        if self.times.start == 0 {
            return Err(EstimateError::RegionIncludesInitialTime);
        }
        Ok(())
    }
}

/// Outcome of the gradient-bound check on one field.
///
/// Field order is the serialisation order of both the text and JSON forms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub eps: f64,
    pub m: f64,
    #[serde(rename = "M")]
    pub big_m: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub alpha: f64,
    #[serde(rename = "R")]
    pub radius: f64,
    #[serde(rename = "T")]
    pub duration: f64,
    /// sup over [m, M] of max{(n−1)K + H, 0}.
    #[serde(rename = "supH")]
    pub sup_h: f64,
    /// max of ε u^{ε−1} |∇u| over the region.
    pub lhs_max: f64,
    /// Bracket at the point realising `c_empirical`.
    pub bracket: f64,
    /// Bracket with its time term at its smallest over the region (t = t₀).
    pub bracket_min: f64,
    /// max over the region of lhs / (M^ε √(ε/(1−ε)) bracket(t)).
    pub c_empirical: f64,
    /// lhs_max / (M^ε √(ε/(1−ε)) bracket_min).
    pub c_conservative: f64,
    pub lemma21_min_residual: f64,
    pub lemma21_tol_disc: f64,
    pub note: String,
}

impl EstimateReport {
    pub fn lemma_holds(&self) -> bool {
        self.lemma21_min_residual >= -self.lemma21_tol_disc
    }

    /// One `key = value` line per field.
    pub fn to_text(&self) -> String {
        let value = serde_json::to_value(self).expect("report serialises");
        let mut out = String::new();
        if let serde_json::Value::Object(map) = value {
            for (key, v) in map {
                match v {
                    serde_json::Value::String(s) => writeln!(out, "{key} = {s}"),
                    other => writeln!(out, "{key} = {other}"),
                }
                .expect("write to string");
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

/// ε u^{ε−1} |∇u| at every region point of slice `k`.
fn lhs_slice(field: &SpaceTimeField, eps: f64, k: usize, nodes: Range<usize>) -> Vec<f64> {
    let u = field.slice(k);
    let du = field.gradient(k);
    nodes
        .map(|i| eps * u[i].powf(eps - 1.0) * du[i].abs())
        .collect()
}

/// Compares ε u^{ε−1}|∇u| with the bound's bracket
///
/// ```text
/// 1/R + √((1−ε)/ε)/R + √α/√R + 1/√(t − t₀ + T) + √(sup max{(n−1)K + H, 0})
/// ```
///
/// on the inner half of the domain, every time after the first.
pub fn theorem11_check(
    field: &SpaceTimeField,
    nl: &Nonlinearity,
    eps: f64,
    curvature: &CurvatureSummary,
) -> Result<EstimateReport, EstimateError> {
    theorem11_check_with(field, nl, eps, curvature, DEFAULT_C_V)
}

/// As [`theorem11_check`], with the discretisation constant of the lemma
/// residual tolerance given explicitly.
pub fn theorem11_check_with(
    field: &SpaceTimeField,
    nl: &Nonlinearity,
    eps: f64,
    curvature: &CurvatureSummary,
    c_v: f64,
) -> Result<EstimateReport, EstimateError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(EstimateError::EpsilonOutOfRange(eps));
    }
    lemma::check_positive(field)?;
    let region = Region::inner_half(field)?;
    let space = field.space();
    let n_dim = space.dimension() as f64;
    let m = field.min();
    let big_m = field.max();
    let radius = space.ball_radius();
    let duration = field.duration();
    let t_first = field.t_start();
    let k = curvature.k;
    let alpha = curvature.alpha;
    let sup_h = ((n_dim - 1.0) * k + nl.sup_h(m, big_m, eps)?).max(0.0);

    let static_part = 1.0 / radius
        + ((1.0 - eps) / eps).sqrt() / radius
        + alpha.max(0.0).sqrt() / radius.sqrt()
        + sup_h.sqrt();
    let bracket_at = |t: f64| static_part + 1.0 / (t - t_first).sqrt();
    let norm = big_m.powf(eps) * (eps / (1.0 - eps)).sqrt();

    let per_slice: Vec<(f64, f64, f64)> = region
        .times()
        .into_par_iter()
        .map(|kt| {
            let lhs = lhs_slice(field, eps, kt, region.nodes());
            let b = bracket_at(field.time(kt));
            let l = lhs.iter().copied().fold(0.0, f64::max);
            (l, l / (norm * b), b)
        })
        .collect();
    let bracket_min = region
        .times()
        .map(|kt| bracket_at(field.time(kt)))
        .fold(f64::INFINITY, f64::min);
    if !(bracket_min > 0.0) {
        return Err(EstimateError::NonPositiveBracket(bracket_min));
    }
    let lhs_max = per_slice.iter().map(|p| p.0).fold(0.0, f64::max);
    let (c_empirical, bracket) = per_slice.iter().fold((0.0, bracket_min), |best, p| {
        if p.1 > best.0 {
            (p.1, p.2)
        } else {
            best
        }
    });
    let lemma = lemma21_check(field, nl, eps, &region, k, c_v)?;
    Ok(EstimateReport {
        eps,
        m,
        big_m,
        k,
        alpha,
        radius,
        duration,
        sup_h,
        lhs_max,
        bracket,
        bracket_min,
        c_empirical,
        c_conservative: lhs_max / (norm * bracket_min),
        lemma21_min_residual: lemma.min_residual,
        lemma21_tol_disc: lemma.tol_disc,
        note: RADIAL_CLASS_NOTE.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Domain, ModelSpace, Weight};
    use crate::solver::ExactSolution;

    fn line() -> (ModelSpace, crate::geometry::Grid) {
        let s = ModelSpace::line(1, Weight::Zero, Domain::neumann(-4.0, 4.0)).unwrap();
        let g = s.grid(81).unwrap();
        (s, g)
    }

    #[test]
    fn inner_half_region_bounds() {
        let (s, g) = line();
        let f = ExactSolution::Constant { v: 1.0 }
            .sample(&s, &g, 0.0, 0.1, 3)
            .unwrap();
        let r = Region::inner_half(&f).unwrap();
        assert_eq!(g.x(r.nodes.start), -2.0);
        assert!((g.x(r.nodes.end - 1) - 2.0).abs() < 1e-12);
        assert_eq!(r.times, 1..3);
    }

    #[test]
    fn region_validation() {
        let (s, g) = line();
        let f = ExactSolution::Constant { v: 1.0 }
            .sample(&s, &g, 0.0, 0.1, 3)
            .unwrap();
        let bad = Region {
            nodes: 0..10,
            times: 1..3,
        };
        assert_eq!(
            bad.validate(&f),
            Err(EstimateError::RegionTouchesBoundary(0))
        );
        let bad = Region {
            nodes: 3..10,
            times: 0..3,
        };
        assert_eq!(
            bad.validate(&f),
            Err(EstimateError::RegionIncludesInitialTime)
        );
        let bad = Region {
            nodes: 3..3,
            times: 1..3,
        };
        assert_eq!(bad.validate(&f), Err(EstimateError::EmptyRegion));
    }

    #[test]
    fn constant_field_gives_zero_constant() {
        let (s, g) = line();
        let f = ExactSolution::Constant { v: 0.8 }
            .sample(&s, &g, 0.0, 0.1, 6)
            .unwrap();
        let curv = s.curvature_summary(0.0, 1.0).unwrap();
        let rep = theorem11_check(&f, &Nonlinearity::Zero, 0.5, &curv).unwrap();
        assert_eq!(rep.lhs_max, 0.0);
        assert_eq!(rep.c_empirical, 0.0);
        assert_eq!(rep.c_conservative, 0.0);
        assert!(rep.note.contains("radial"));
    }

    #[test]
    fn text_report_lists_every_key() {
        let (s, g) = line();
        let f = ExactSolution::Constant { v: 0.8 }
            .sample(&s, &g, 0.0, 0.1, 6)
            .unwrap();
        let curv = s.curvature_summary(0.0, 1.0).unwrap();
        let rep = theorem11_check(&f, &Nonlinearity::Zero, 0.5, &curv).unwrap();
        let text = rep.to_text();
        let keys: Vec<&str> = text
            .lines()
            .map(|l| l.split(" = ").next().unwrap())
            .collect();
        assert_eq!(keys[..4], ["eps", "m", "M", "K"]);
        assert!(keys.contains(&"c_empirical") && keys.contains(&"note"));
        let back: EstimateReport = serde_json::from_str(&rep.to_json()).unwrap();
        assert_eq!(back.to_json(), rep.to_json());
    }
}
