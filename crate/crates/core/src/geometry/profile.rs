//! Warping functions φ(r) and weight functions f for the model spaces.

use serde::{Deserialize, Serialize};

/// 8-point Gauss–Legendre nodes on [-1, 1].
const GL_NODES: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329_0,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_3,
    0.222_381_034_453_374_5,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362_0,
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Integrates `g` over `[a, b]` with a single 8-point Gauss–Legendre panel.
pub(crate) fn gauss_legendre<G: Fn(f64) -> f64>(g: G, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    GL_NODES
        .iter()
        .zip(GL_WEIGHTS.iter())
        .map(|(&x, &w)| w * g(mid + half * x))
        .sum::<f64>()
        * half
}

/// Value and first two derivatives of a scalar profile at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

fn poly_jet(coeffs: &[f64], x: f64) -> Jet {
    let (mut v, mut d1, mut d2) = (0.0, 0.0, 0.0);
    for &c in coeffs.iter().rev() {
        d2 = d2 * x + 2.0 * d1;
        d1 = d1 * x + v;
        v = v * x + c;
    }
    Jet { value: v, d1, d2 }
}

/// Warping function of a rotationally symmetric metric dr² + φ(r)² g_{S^{n-1}}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Warp {
    /// φ(r) = r
    Euclidean,
    /// φ(r) = sinh r
    Hyperbolic,
    /// φ(r) = Σ c_k r^k with c_0 = 0 and c_1 = 1.
    Polynomial(Vec<f64>),
}

impl Warp {
    pub fn jet(&self, r: f64) -> Jet {
        match self {
            Warp::Euclidean => Jet {
                value: r,
                d1: 1.0,
                d2: 0.0,
            },
            Warp::Hyperbolic => Jet {
                value: r.sinh(),
                d1: r.cosh(),
                d2: r.sinh(),
            },
            Warp::Polynomial(c) => poly_jet(c, r),
        }
    }

    /// ∫_a^b φ(r)^{n-1} dr
    pub(crate) fn volume(&self, n: usize, a: f64, b: f64) -> f64 {
        let p = n as i32 - 1;
        match self {
            Warp::Euclidean => (b.powi(p + 1) - a.powi(p + 1)) / (p + 1) as f64,
            _ => gauss_legendre(|r| self.jet(r).value.powi(p), a, b),
        }
    }
}

/// Weight function f of the measure e^{-f} dv, as a function of the
/// coordinate (x on the line, r on radial models).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weight {
    Zero,
    /// f = a·x
    Linear {
        a: f64,
    },
    /// f = s·x²/2
    Gaussian {
        s: f64,
    },
    /// f = Σ c_k x^k
    Polynomial(Vec<f64>),
}

impl Weight {
    pub fn jet(&self, x: f64) -> Jet {
        match self {
            Weight::Zero => Jet {
                value: 0.0,
                d1: 0.0,
                d2: 0.0,
            },
            Weight::Linear { a } => Jet {
                value: a * x,
                d1: *a,
                d2: 0.0,
            },
            Weight::Gaussian { s } => Jet {
                value: 0.5 * s * x * x,
                d1: s * x,
                d2: *s,
            },
            Weight::Polynomial(c) => poly_jet(c, x),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.jet(x).value
    }

    /// ∫_a^b e^{f(x) - f(x_ref)} dx, exact for the zero and linear weights.
    pub(crate) fn exp_integral(&self, a: f64, b: f64, x_ref: f64) -> f64 {
        match self {
            Weight::Zero => b - a,
            Weight::Linear { a: slope } if *slope == 0.0 => b - a,
            Weight::Linear { a: slope } => {
                (slope * (a - x_ref)).exp() * (slope * (b - a)).exp_m1() / slope
            }
            _ => {
                let f_ref = self.value(x_ref);
                gauss_legendre(|x| (self.value(x) - f_ref).exp(), a, b)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_degree_fifteen() {
        let g = |x: f64| x.powi(15) + 3.0 * x.powi(4);
        let exact = (2f64.powi(16) - 1.0) / 16.0 + 3.0 * (32.0 - 1.0) / 5.0;
        assert!((gauss_legendre(g, 1.0, 2.0) - exact).abs() < 1e-10 * exact);
    }

    #[test]
    fn polynomial_jet_matches_hand_derivatives() {
        // 1 + 2x + 3x^2 + 4x^3 at x = 2
        let j = poly_jet(&[1.0, 2.0, 3.0, 4.0], 2.0);
        assert_eq!(j.value, 1.0 + 4.0 + 12.0 + 32.0);
        assert_eq!(j.d1, 2.0 + 12.0 + 48.0);
        assert_eq!(j.d2, 6.0 + 48.0);
    }

    #[test]
    fn linear_exp_integral_closed_form_matches_quadrature() {
        let w = Weight::Linear { a: 1.3 };
        let q = gauss_legendre(|x| (1.3 * (x - 0.4)).exp(), 0.5, 0.6);
        assert!((w.exp_integral(0.5, 0.6, 0.4) - q).abs() < 1e-15);
    }

    #[test]
    fn euclidean_volume_closed_form_matches_quadrature() {
        let v = Warp::Euclidean.volume(4, 0.3, 0.7);
        let q = gauss_legendre(|r| r.powi(3), 0.3, 0.7);
        assert!((v - q).abs() < 1e-15);
    }
}
