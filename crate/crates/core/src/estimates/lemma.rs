use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{EstimateError, Region};
use crate::nonlinearity::Nonlinearity;
use crate::solver::{gradient, SpaceTimeField};

pub(super) fn check_positive(field: &SpaceTimeField) -> Result<(), EstimateError> {
    if field.is_positive() {
        return Ok(());
    }
    let n = field.nodes();
    let pos = field.values().iter().position(|v| *v <= 0.0).unwrap_or(0);
    Err(EstimateError::NotPositive {
        node: pos % n,
        time_index: pos / n,
        value: field.values()[pos],
    })
}

fn check_eps(eps: f64) -> Result<(), EstimateError> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(EstimateError::EpsilonOutOfRange(eps))
    }
}

/// w = ε² u^{2ε−2} |∇u|² from the gradient of u.
pub fn w_field(field: &SpaceTimeField, eps: f64) -> Result<SpaceTimeField, EstimateError> {
    check_positive(field)?;
    check_eps(eps)?;
    let values = (0..field.n_times())
        .flat_map(|k| {
            let u = field.slice(k);
            let du = field.gradient(k);
            u.iter()
                .zip(du)
                .map(|(u, g)| eps * eps * u.powf(2.0 * eps - 2.0) * g * g)
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(field.derived(values))
}

/// w = |∇(u^ε)|², differentiating u^ε directly.
pub fn w_field_power(field: &SpaceTimeField, eps: f64) -> Result<SpaceTimeField, EstimateError> {
    check_positive(field)?;
    check_eps(eps)?;
    let values = (0..field.n_times())
        .flat_map(|k| {
            let v: Vec<f64> = field.slice(k).iter().map(|u| u.powf(eps)).collect();
            gradient(&v, field.grid())
                .into_iter()
                .map(|g| g * g)
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(field.derived(values))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma21Report {
    pub eps: f64,
    pub k: f64,
    pub c_v: f64,
    pub min_residual: f64,
    /// Coordinate and time of the minimum.
    pub argmin: (f64, f64),
    pub scale: f64,
    pub tol_disc: f64,
    /// max(0, −min_residual)
    pub violation: f64,
    pub passed: bool,
    /// Residual on the region, time-major.
    #[serde(skip)]
    pub residual: Vec<f64>,
}

pub const DEFAULT_C_V: f64 = 10.0;

/// Evaluates
///
/// ```text
/// Δ_f w − w_t + 2 max{K(n−1)+H, 0} w − 2 ((ε−1)/ε) u^{−ε} ⟨∇w, ∇u^ε⟩ − 2 ((1−ε)/ε) u^{−2ε} w²
/// ```
///
/// on `region` with H = H(u(x, t), ε) taken pointwise, and compares its
/// minimum with −C_v (Δx² + Δt) max(1, max w, max w² u^{−2ε}).
pub fn lemma21_check(
    field: &SpaceTimeField,
    nl: &Nonlinearity,
    eps: f64,
    region: &Region,
    k: f64,
    c_v: f64,
) -> Result<Lemma21Report, EstimateError> {
    check_positive(field)?;
    check_eps(eps)?;
    region.validate(field)?;
    if field.n_times() < 2 {
        return Err(EstimateError::EmptyRegion);
    }
    let w = w_field(field, eps)?;
    let op = field.space().operator(field.grid())?;
    let n_dim = field.space().dimension() as f64;
    let dt = field.dt();
    let nt = field.n_times();
    let nodes = region.nodes();

    let slabs: Vec<Result<(Vec<f64>, f64), EstimateError>> = region
        .times()
        .into_par_iter()
        .map(|kt| {
            let u = field.slice(kt);
            let wk = w.slice(kt);
            let lap = op.apply(wk)?;
            let grad_w = gradient(wk, field.grid());
            let grad_u = field.gradient(kt);
            let (wa, wb, inv) = if kt + 1 == nt {
                (w.slice(kt), w.slice(kt - 1), 1.0 / dt)
            } else if kt == 0 {
                (w.slice(1), w.slice(0), 1.0 / dt)
            } else {
                (w.slice(kt + 1), w.slice(kt - 1), 0.5 / dt)
            };
            let mut out = Vec::with_capacity(nodes.len());
            let mut scale: f64 = 1.0;
            for i in nodes.clone() {
                let ue = u[i].powf(eps);
                let grad_ue = eps * u[i].powf(eps - 1.0) * grad_u[i];
                let h = nl.h(u[i], eps)?;
                let wt = (wa[i] - wb[i]) * inv;
                let w2 = wk[i] * wk[i] / (ue * ue);
                let r = lap[i] - wt + 2.0 * (k * (n_dim - 1.0) + h).max(0.0) * wk[i]
                    - 2.0 * ((eps - 1.0) / eps) / ue * grad_w[i] * grad_ue
                    - 2.0 * ((1.0 - eps) / eps) * w2;
                out.push(r);
                scale = scale.max(wk[i]).max(w2);
            }
            Ok((out, scale))
        })
        .collect();

    let mut residual = Vec::with_capacity(nodes.len() * region.times().len());
    let mut scale: f64 = 1.0;
    for slab in slabs {
        let (r, s) = slab?;
        residual.extend(r);
        scale = scale.max(s);
    }
    let (pos, min_residual) =
        residual
            .iter()
            .copied()
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |best, (p, v)| if v < best.1 { (p, v) } else { best },
            );
    let width = nodes.len();
    let argmin = (
        field.grid().x(nodes.start + pos % width),
        field.time(region.times().start + pos / width),
    );
    let hx = field.grid().spacing;
    let tol_disc = c_v * (hx * hx + dt) * scale;
    Ok(Lemma21Report {
        eps,
        k,
        c_v,
        min_residual,
        argmin,
        scale,
        tol_disc,
        violation: (-min_residual).max(0.0),
        passed: min_residual >= -tol_disc,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Domain, ModelSpace, Weight};
    use crate::solver::ExactSolution;

    fn line(count: usize) -> (ModelSpace, crate::geometry::Grid) {
        let s = ModelSpace::line(1, Weight::Zero, Domain::neumann(-4.0, 4.0)).unwrap();
        let g = s.grid(count).unwrap();
        (s, g)
    }

    #[test]
    fn constant_field_has_zero_w_and_residual() {
        let (s, g) = line(41);
        let f = ExactSolution::Constant { v: 0.7 }
            .sample(&s, &g, 0.0, 0.1, 5)
            .unwrap();
        let w = w_field(&f, 0.5).unwrap();
        assert!(w.values().iter().all(|v| *v == 0.0));
        let region = Region::inner_half(&f).unwrap();
        let rep = lemma21_check(&f, &Nonlinearity::Zero, 0.5, &region, 0.0, DEFAULT_C_V).unwrap();
        assert_eq!(rep.min_residual, 0.0);
        assert!(rep.passed);
    }

    #[test]
    fn exponential_routes_agree_with_closed_form() {
        // u = e^x, ε = 1/2: w = e^x / 4 by either route
        let (s, g) = line(801);
        let values: Vec<f64> = g.coordinates().iter().map(|x| x.exp()).collect();
        let f = SpaceTimeField::new(s, g, 0.0, 0.0, values).unwrap();
        let chain = w_field(&f, 0.5).unwrap();
        let power = w_field_power(&f, 0.5).unwrap();
        let h = g.spacing;
        for i in 1..g.count - 1 {
            let exact = 0.25 * g.x(i).exp();
            assert!((chain.value(i, 0) - exact).abs() <= h * h * exact);
            assert!((power.value(i, 0) - exact).abs() <= h * h * exact);
        }
    }

    #[test]
    fn nonpositive_field_is_rejected() {
        let (s, g) = line(11);
        let f = ExactSolution::Constant { v: -1.0 }
            .sample(&s, &g, 0.0, 0.1, 2)
            .unwrap();
        assert!(matches!(
            w_field(&f, 0.5),
            Err(EstimateError::NotPositive { .. })
        ));
    }

    #[test]
    fn log_flow_residual_is_zero() {
        let (s, g) = line(21);
        let f = ExactSolution::LogFlow { a: -1.0, d: -0.5 }
            .sample(&s, &g, 0.0, 0.01, 20)
            .unwrap();
        let region = Region::inner_half(&f).unwrap();
        let rep = lemma21_check(
            &f,
            &Nonlinearity::LogType { a: -1.0 },
            0.5,
            &region,
            0.0,
            DEFAULT_C_V,
        )
        .unwrap();
        assert_eq!(rep.min_residual, 0.0);
    }
}
