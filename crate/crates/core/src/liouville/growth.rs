use serde::{Deserialize, Serialize};

use super::ScenarioError;
use crate::solver::SpaceTimeField;

pub const DEFAULT_BOXES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub radius: f64,
    pub time: f64,
    pub sup: f64,
    /// R^{N1} + T^{N2}
    pub scale: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthProbe {
    pub n1: f64,
    pub n2: f64,
    pub rows: Vec<GrowthRow>,
    /// Least-squares slope of ln(ratio) against ln(R).
    pub slope: f64,
    pub trends_to_zero: bool,
}

/// Trend test for sup |u| = o(R^{N1} + T^{N2}) over nested boxes
/// B(x₀, R_j) × [t_end − T_j, t_end] with R_j, T_j halving from the full
/// extent of the field.
pub fn growth_probe(
    field: &SpaceTimeField,
    n1: f64,
    n2: f64,
    boxes: usize,
) -> Result<GrowthProbe, ScenarioError> {
    if boxes < 3 {
        return Err(ScenarioError::Invalid(format!(
            "growth probe needs at least 3 boxes, got {boxes}"
        )));
    }
    let space = field.space();
    let grid = field.grid();
    let r_max = space.ball_radius();
    let t_max = field.duration();
    let mut rows = Vec::with_capacity(boxes);
    for j in 0..boxes {
        let shrink = 0.5f64.powi((boxes - 1 - j) as i32);
        let radius = r_max * shrink;
        let time = t_max * shrink;
        let k_first = field.n_times()
            - 1
            - ((time / field.dt().max(f64::MIN_POSITIVE)).round() as usize)
                .min(field.n_times() - 1);
        let nodes: Vec<usize> = (0..grid.count)
            .filter(|&i| space.distance(grid.x(i)) <= radius * (1.0 + 1e-12))
            .collect();
        if nodes.is_empty() {
            return Err(ScenarioError::Invalid(format!(
                "box of radius {radius} contains no grid node"
            )));
        }
        let sup = (k_first..field.n_times())
            .flat_map(|k| nodes.iter().map(move |&i| field.value(i, k).abs()))
            .fold(0.0, f64::max);
        let scale = radius.powf(n1) + time.powf(n2);
        rows.push(GrowthRow {
            radius,
            time,
            sup,
            scale,
            ratio: sup / scale,
        });
    }
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.radius.ln(), r.ratio.ln())).collect();
    let slope = if pts.iter().any(|p| p.1 == f64::NEG_INFINITY) {
        // identically zero on some box
        f64::NEG_INFINITY
    } else {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    };
    Ok(GrowthProbe {
        n1,
        n2,
        rows,
        slope,
        trends_to_zero: slope < 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Domain, ModelSpace, Warp, Weight};

    #[test]
    fn bounded_field_is_little_o() {
        let s = ModelSpace::line(1, Weight::Zero, Domain::neumann(-32.0, 32.0)).unwrap();
        let g = s.grid(257).unwrap();
        let f = SpaceTimeField::new(s, g, 0.0, 1.0, vec![1.0; 257 * 9]).unwrap();
        let p = growth_probe(&f, 1.0, 1.0, DEFAULT_BOXES).unwrap();
        assert!(p.trends_to_zero);
        assert_eq!(p.rows.len(), 4);
        assert_eq!(p.rows[3].radius, 32.0);
    }

    #[test]
    fn exponential_is_not_polynomial() {
        let s =
            ModelSpace::line(1, Weight::Linear { a: 1.0 }, Domain::neumann(-32.0, 32.0)).unwrap();
        let g = s.grid(257).unwrap();
        let values: Vec<f64> = g.coordinates().iter().map(|x| x.exp()).collect();
        let f = SpaceTimeField::new(s, g, 0.0, 0.0, values).unwrap();
        let p = growth_probe(&f, 3.0, 1.0, DEFAULT_BOXES).unwrap();
        assert!(!p.trends_to_zero, "{p:?}");
    }

    #[test]
    fn quadratic_is_little_o_of_cubic() {
        let s = ModelSpace::radial(3, Warp::Euclidean, Weight::Zero, Domain::neumann(0.0, 64.0))
            .unwrap();
        let g = s.grid(257).unwrap();
        let values: Vec<f64> = g.coordinates().iter().map(|r| r * r).collect();
        let f = SpaceTimeField::new(s, g, 0.0, 0.0, values).unwrap();
        let p = growth_probe(&f, 3.0, 1.0, DEFAULT_BOXES).unwrap();
        assert!(p.trends_to_zero);
        assert!((p.slope + 1.0).abs() < 0.05, "{}", p.slope);
    }

    #[test]
    fn too_few_boxes() {
        let s = ModelSpace::line(1, Weight::Zero, Domain::neumann(-1.0, 1.0)).unwrap();
        let g = s.grid(9).unwrap();
        let f = SpaceTimeField::new(s, g, 0.0, 0.0, vec![1.0; 9]).unwrap();
        assert!(growth_probe(&f, 1.0, 1.0, 2).is_err());
    }
}
