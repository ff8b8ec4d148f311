use serde::{Deserialize, Serialize};

use super::{SolverError, SpaceTimeField};
use crate::geometry::{Grid, ModelSpace, SpaceKind, Weight};
use crate::nonlinearity::Nonlinearity;

/// Closed-form solutions used as references.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExactSolution {
    /// u = e^{a x₁}, a static solution of u_t = Δ_f u for f = a x₁.
    ExpLinear {
        a: f64,
    },
    /// u = exp(d e^{a t}), the spatially constant solution of u_t = a u log u.
    LogFlow {
        a: f64,
        d: f64,
    },
    /// u = tanh((x₁ − x₀)/√2), a standing Allen–Cahn solution on the flat line.
    TanhProfile,
    Constant {
        v: f64,
    },
    /// Heat kernel normalised to peak 1 at t = 0:
    /// u = (s/(t+s))^{n/2} exp(−|x − x₀|²/(4(t+s))).
    GaussianHeat {
        shift: f64,
    },
}

impl ExactSolution {
    /// The reaction term this family solves.
    pub fn nonlinearity(&self) -> Nonlinearity {
        match self {
            ExactSolution::ExpLinear { .. } | ExactSolution::GaussianHeat { .. } => {
                Nonlinearity::Zero
            }
            ExactSolution::LogFlow { a, .. } => Nonlinearity::LogType { a: *a },
            ExactSolution::TanhProfile => Nonlinearity::AllenCahn,
            ExactSolution::Constant { .. } => Nonlinearity::Zero,
        }
    }

    pub fn check_compatible(&self, space: &ModelSpace) -> Result<(), SolverError> {
        let flat_weight = matches!(space.weight(), Weight::Zero);
        let ok = match self {
            ExactSolution::ExpLinear { a } => {
                space.kind() == SpaceKind::Line
                    && match space.weight() {
                        Weight::Linear { a: b } => a == b,
                        Weight::Zero => *a == 0.0,
                        _ => false,
                    }
            }
            ExactSolution::LogFlow { .. } | ExactSolution::Constant { .. } => true,
            ExactSolution::TanhProfile => space.kind() == SpaceKind::Line && flat_weight,
            ExactSolution::GaussianHeat { shift } => {
                *shift > 0.0
                    && flat_weight
                    && matches!(space.kind(), SpaceKind::Line | SpaceKind::EuclideanRadial)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(SolverError::Incompatible(format!(
                "{self:?} does not solve the equation on a {:?} space with weight {:?}",
                space.kind(),
                space.weight()
            )))
        }
    }

    /// u(x, t) with `x` measured in the space's coordinate.
    pub fn value(&self, space: &ModelSpace, x: f64, t: f64) -> f64 {
        match *self {
            ExactSolution::ExpLinear { a } => (a * x).exp(),
            ExactSolution::LogFlow { a, d } => (d * (a * t).exp()).exp(),
            ExactSolution::TanhProfile => ((x - space.center()) / 2f64.sqrt()).tanh(),
            ExactSolution::Constant { v } => v,
            ExactSolution::GaussianHeat { shift } => {
                let tau = t + shift;
                let dims = if space.is_radial() {
                    space.dimension() as f64
                } else {
                    1.0
                };
                let r = space.distance(x);
                (shift / tau).powf(0.5 * dims) * (-r * r / (4.0 * tau)).exp()
            }
        }
    }

    /// lim_{t→−∞} u, when the family is ancient and the limit exists
    /// (possibly infinite).
    pub fn ancient_limit(&self) -> Option<f64> {
        match *self {
            ExactSolution::LogFlow { a, d } => Some(if a > 0.0 || d == 0.0 {
                1.0
            } else if a == 0.0 {
                d.exp()
            } else if d < 0.0 {
                0.0
            } else {
                f64::INFINITY
            }),
            ExactSolution::Constant { v } => Some(v),
            ExactSolution::ExpLinear { .. } | ExactSolution::TanhProfile => None,
            ExactSolution::GaussianHeat { .. } => None,
        }
    }

    /// Samples the closed form on `grid` × {t_start + k dt}.
    pub fn sample(
        &self,
        space: &ModelSpace,
        grid: &Grid,
        t_start: f64,
        dt: f64,
        n_times: usize,
    ) -> Result<SpaceTimeField, SolverError> {
        self.check_compatible(space)?;
        if let ExactSolution::GaussianHeat { shift } = self {
            if t_start + shift <= 0.0 {
                return Err(SolverError::Incompatible(format!(
                    "heat kernel with shift {shift} is undefined at t = {t_start}"
                )));
            }
        }
        let xs = grid.coordinates();
        let values = (0..n_times.max(1))
            .flat_map(|k| {
                let t = t_start + dt * k as f64;
                xs.iter().map(move |&x| self.value(space, x, t))
            })
            .collect();
        SpaceTimeField::new(space.clone(), *grid, t_start, dt, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Domain, Warp};

    fn line() -> ModelSpace {
        ModelSpace::line(1, Weight::Zero, Domain::neumann(-5.0, 5.0)).unwrap()
    }

    #[test]
    fn log_flow_limits() {
        let s = line();
        let flow = ExactSolution::LogFlow { a: 1.0, d: -0.5 };
        assert_eq!(flow.ancient_limit(), Some(1.0));
        assert!((flow.value(&s, 0.0, -50.0) - 1.0).abs() < 1e-15);
        let still = ExactSolution::LogFlow { a: 0.7, d: 0.0 };
        for t in [-3.0, 0.0, 4.0] {
            assert_eq!(still.value(&s, 1.0, t), 1.0);
        }
        assert_eq!(
            ExactSolution::LogFlow { a: -1.0, d: -1.0 }.ancient_limit(),
            Some(0.0)
        );
    }

    #[test]
    fn exp_linear_at_origin_is_one() {
        let s = ModelSpace::line(1, Weight::Linear { a: 2.0 }, Domain::neumann(-1.0, 1.0)).unwrap();
        let e = ExactSolution::ExpLinear { a: 2.0 };
        for t in [0.0, 1.0, 10.0] {
            assert_eq!(e.value(&s, 0.0, t), 1.0);
        }
    }

    #[test]
    fn incompatible_pairings_are_rejected() {
        let hyp = ModelSpace::radial(2, Warp::Hyperbolic, Weight::Zero, Domain::neumann(0.0, 2.0))
            .unwrap();
        let g = hyp.grid(10).unwrap();
        assert!(matches!(
            ExactSolution::TanhProfile.sample(&hyp, &g, 0.0, 1.0, 1),
            Err(SolverError::Incompatible(_))
        ));
        let s = line();
        assert!(ExactSolution::ExpLinear { a: 1.0 }
            .check_compatible(&s)
            .is_err());
        assert!(ExactSolution::GaussianHeat { shift: 0.25 }
            .sample(&s, &s.grid(10).unwrap(), -1.0, 0.1, 2)
            .is_err());
    }

    #[test]
    fn gaussian_heat_starts_at_unit_peak() {
        let s = line();
        let g = ExactSolution::GaussianHeat { shift: 0.25 };
        assert_eq!(g.value(&s, 0.0, 0.0), 1.0);
        assert!((g.value(&s, 1.0, 0.0) - (-1.0f64).exp()).abs() < 1e-15);
    }
}
