//! Reaction terms F, the quantity H(u, ε) = (ε − 1)F(u)/u + F'(u), and the
//! set of exponents ε for which H ≤ 0 on a solution range.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default ε used when the feasibility window allows it.
pub const DEFAULT_EPSILON: f64 = 0.1;

const SCAN_POINTS: usize = 10_000;
const GOLDEN_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NonlinearityError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("u = {u} is outside the admissible range: {reason}")]
    NotAdmissible { u: f64, reason: &'static str },
    #[error("epsilon must lie in (0, 1), got {0}")]
    EpsilonOutOfRange(f64),
    #[error("invalid solution range [{0}, {1}]")]
    InvalidRange(f64, f64),
    #[error("feasible epsilons do not form an interval")]
    NonIntervalWindow,
}

/// Reaction term catalog.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Nonlinearity {
    /// F = −c u² + c u
    Fisher {
        c: f64,
    },
    /// F = −u³ + u
    AllenCahn,
    /// F = a u log u
    LogType {
        a: f64,
    },
    /// F = u^q − u^p
    Power {
        p: f64,
        q: f64,
    },
    Zero,
    /// F = Σ c_k u^k
    Custom {
        coeffs: Vec<f64>,
    },
}

fn is_integer(x: f64) -> bool {
    x.fract() == 0.0 && x.abs() < 1e9
}

fn pow(u: f64, e: f64) -> Result<f64, NonlinearityError> {
    if u < 0.0 {
        if !is_integer(e) {
            return Err(NonlinearityError::NotAdmissible {
                u,
                reason: "negative base with non-integer exponent",
            });
        }
        return Ok(u.powi(e as i32));
    }
    Ok(u.powf(e))
}

fn poly(coeffs: &[f64], u: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * u + c)
}

fn poly_derivative(coeffs: &[f64], u: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(0.0, |acc, (k, c)| acc * u + k as f64 * c)
}

fn check_eps(eps: f64) -> Result<(), NonlinearityError> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(NonlinearityError::EpsilonOutOfRange(eps))
    }
}

fn check_range(m: f64, big_m: f64) -> Result<(), NonlinearityError> {
    if m > 0.0 && m <= big_m && big_m.is_finite() {
        Ok(())
    } else {
        Err(NonlinearityError::InvalidRange(m, big_m))
    }
}

impl Nonlinearity {
    pub fn validate(&self) -> Result<(), NonlinearityError> {
        match self {
            Nonlinearity::Fisher { c } if !(*c > 0.0 && c.is_finite()) => Err(
                NonlinearityError::InvalidParameter(format!("fisher c must be positive, got {c}")),
            ),
            Nonlinearity::LogType { a } if !a.is_finite() => Err(
                NonlinearityError::InvalidParameter(format!("log a must be finite, got {a}")),
            ),
            Nonlinearity::Power { p, q } if !(*q >= 1.0 && p > q && p.is_finite()) => {
                Err(NonlinearityError::InvalidParameter(format!(
                    "power needs p > q >= 1, got p = {p}, q = {q}"
                )))
            }
            Nonlinearity::Custom { coeffs } if coeffs.iter().any(|c| !c.is_finite()) => Err(
                NonlinearityError::InvalidParameter("custom coefficients must be finite".into()),
            ),
            _ => Ok(()),
        }
    }

    /// Short catalog name, as used in configuration files.
    pub fn name(&self) -> &'static str {
        match self {
            Nonlinearity::Fisher { .. } => "fisher",
            Nonlinearity::AllenCahn => "allen_cahn",
            Nonlinearity::LogType { .. } => "log",
            Nonlinearity::Power { .. } => "power",
            Nonlinearity::Zero => "zero",
            Nonlinearity::Custom { .. } => "custom",
        }
    }

    /// Whether H is only defined for u > 0.
    pub fn requires_positive(&self) -> bool {
        matches!(
            self,
            Nonlinearity::Fisher { .. } | Nonlinearity::LogType { .. } | Nonlinearity::Power { .. }
        )
    }

    pub fn f(&self, u: f64) -> Result<f64, NonlinearityError> {
        Ok(match self {
            Nonlinearity::Fisher { c } => -c * u * u + c * u,
            Nonlinearity::AllenCahn => -u * u * u + u,
            Nonlinearity::LogType { a } => {
                if u <= 0.0 {
                    return Err(NonlinearityError::NotAdmissible {
                        u,
                        reason: "u log u needs u > 0",
                    });
                }
                a * u * u.ln()
            }
            Nonlinearity::Power { p, q } => pow(u, *q)? - pow(u, *p)?,
            Nonlinearity::Zero => 0.0,
            Nonlinearity::Custom { coeffs } => poly(coeffs, u),
        })
    }

    pub fn f_prime(&self, u: f64) -> Result<f64, NonlinearityError> {
        Ok(match self {
            Nonlinearity::Fisher { c } => -2.0 * c * u + c,
            Nonlinearity::AllenCahn => -3.0 * u * u + 1.0,
            Nonlinearity::LogType { a } => {
                if u <= 0.0 {
                    return Err(NonlinearityError::NotAdmissible {
                        u,
                        reason: "u log u needs u > 0",
                    });
                }
                a * (u.ln() + 1.0)
            }
            Nonlinearity::Power { p, q } => q * pow(u, q - 1.0)? - p * pow(u, p - 1.0)?,
            Nonlinearity::Zero => 0.0,
            Nonlinearity::Custom { coeffs } => poly_derivative(coeffs, u),
        })
    }

    fn check_h_domain(&self, u: f64) -> Result<(), NonlinearityError> {
        if self.requires_positive() && u <= 0.0 {
            return Err(NonlinearityError::NotAdmissible {
                u,
                reason: "H needs u > 0 for this nonlinearity",
            });
        }
        if u == 0.0 {
            return Err(NonlinearityError::NotAdmissible {
                u,
                reason: "H divides by u",
            });
        }
        Ok(())
    }

    /// H = (ε − 1) F(u)/u + F'(u), evaluated from F and F'.
    pub fn h(&self, u: f64, eps: f64) -> Result<f64, NonlinearityError> {
        check_eps(eps)?;
        self.check_h_domain(u)?;
        Ok((eps - 1.0) * self.f(u)? / u + self.f_prime(u)?)
    }

    /// Simplified closed form of H; `None` for custom polynomials.
    pub fn h_closed_form(&self, u: f64, eps: f64) -> Result<Option<f64>, NonlinearityError> {
        check_eps(eps)?;
        self.check_h_domain(u)?;
        Ok(match self {
            Nonlinearity::Fisher { c } => Some(c * (-u * (eps + 1.0) + eps)),
            Nonlinearity::AllenCahn => Some(-(eps + 2.0) * u * u + eps),
            Nonlinearity::LogType { a } => Some(a * (1.0 + eps * u.ln())),
            Nonlinearity::Power { p, q } => {
                Some(u.powf(q - 1.0) * (q + eps - 1.0) - u.powf(p - 1.0) * (p + eps - 1.0))
            }
            Nonlinearity::Zero => Some(0.0),
            Nonlinearity::Custom { .. } => None,
        })
    }

    fn h_exact(&self, u: f64, eps: f64) -> Result<f64, NonlinearityError> {
        match self.h_closed_form(u, eps)? {
            Some(v) => Ok(v),
            None => self.h(u, eps),
        }
    }

    /// sup of H over u ∈ [m, M]. For Allen–Cahn the range is a range of |u|.
    pub fn sup_h(&self, m: f64, big_m: f64, eps: f64) -> Result<f64, NonlinearityError> {
        self.validate()?;
        check_range(m, big_m)?;
        check_eps(eps)?;
        match self {
            // decreasing in u (in u² for Allen–Cahn)
            Nonlinearity::Fisher { .. } | Nonlinearity::AllenCahn => self.h_exact(m, eps),
            Nonlinearity::LogType { a } => {
                if *a > 0.0 {
                    self.h_exact(big_m, eps)
                } else if *a < 0.0 {
                    self.h_exact(m, eps)
                } else {
                    Ok(0.0)
                }
            }
            Nonlinearity::Power { p, q } => {
                if *q == 1.0 {
                    return self.h_exact(m, eps);
                }
                // H' > 0 below the critical point u*, H' < 0 above it.
                let s = (q - 1.0) * (q + eps - 1.0) / ((p - 1.0) * (p + eps - 1.0));
                let u_star = s.powf(1.0 / (p - q));
                self.h_exact(u_star.clamp(m, big_m), eps)
            }
            Nonlinearity::Zero => Ok(0.0),
            Nonlinearity::Custom { .. } => self.sup_h_numeric(m, big_m, eps),
        }
    }

    fn sup_h_numeric(&self, m: f64, big_m: f64, eps: f64) -> Result<f64, NonlinearityError> {
        if m == big_m {
            return self.h(m, eps);
        }
        let step = (big_m - m) / (SCAN_POINTS - 1) as f64;
        let mut best = (f64::NEG_INFINITY, 0usize);
        for k in 0..SCAN_POINTS {
            let u = if k + 1 == SCAN_POINTS {
                big_m
            } else {
                m + step * k as f64
            };
            let v = self.h(u, eps)?;
            if v > best.0 {
                best = (v, k);
            }
        }
        let lo = m + step * best.1.saturating_sub(1) as f64;
        let hi = (m + step * (best.1 + 1) as f64).min(big_m);
        let refined = golden_max(|u| self.h(u, eps), lo, hi)?;
        Ok(best.0.max(refined))
    }

    /// ε ∈ (0, 1) with sup_{[m, M]} H ≤ 0.
    pub fn epsilon_window(&self, m: f64, big_m: f64) -> Result<EpsilonWindow, NonlinearityError> {
        self.validate()?;
        check_range(m, big_m)?;
        Ok(match self {
            Nonlinearity::Fisher { .. } => {
                if m >= 1.0 {
                    EpsilonWindow::full()
                } else {
                    EpsilonWindow::upto(m / (1.0 - m))
                }
            }
            Nonlinearity::AllenCahn => {
                if m >= 1.0 {
                    EpsilonWindow::full()
                } else {
                    EpsilonWindow::upto(2.0 * m * m / (1.0 - m * m))
                }
            }
            Nonlinearity::LogType { a } => {
                if *a > 0.0 {
                    // need 1 + ε log M ≤ 0, i.e. ε ≥ −1/log M
                    if big_m < (-1.0f64).exp() {
                        EpsilonWindow::new(-1.0 / big_m.ln(), 1.0)
                    } else {
                        EpsilonWindow::empty()
                    }
                } else if *a < 0.0 {
                    // need 1 + ε log m ≥ 0 at the worst endpoint u = m
                    if m >= 1.0 {
                        EpsilonWindow::full()
                    } else {
                        EpsilonWindow::upto(-1.0 / m.ln())
                    }
                } else {
                    EpsilonWindow::full()
                }
            }
            Nonlinearity::Power { p, q } => {
                // (q+ε−1)/(p+ε−1) ≤ m^{p−q}; the ratio increases with ε.
                let s = m.powf(p - q);
                if s >= 1.0 {
                    EpsilonWindow::full()
                } else {
                    let eps_star = (s * (p - 1.0) - (q - 1.0)) / (1.0 - s);
                    if eps_star <= 0.0 {
                        EpsilonWindow::empty()
                    } else {
                        EpsilonWindow::upto(eps_star)
                    }
                }
            }
            Nonlinearity::Zero => EpsilonWindow::full(),
            Nonlinearity::Custom { .. } => self.epsilon_window_numeric(m, big_m)?,
        })
    }

    fn epsilon_window_numeric(
        &self,
        m: f64,
        big_m: f64,
    ) -> Result<EpsilonWindow, NonlinearityError> {
        const GRID: usize = 2000;
        let feasible =
            |eps: f64| -> Result<bool, NonlinearityError> { Ok(self.sup_h(m, big_m, eps)? <= 0.0) };
        let eps_at = |k: usize| (k as f64 + 0.5) / GRID as f64;
        let mut flags = Vec::with_capacity(GRID);
        for k in 0..GRID {
            flags.push(feasible(eps_at(k))?);
        }
        let Some(first) = flags.iter().position(|f| *f) else {
            return Ok(EpsilonWindow::empty());
        };
        let last = flags.iter().rposition(|f| *f).unwrap_or(first);
        if flags[first..=last].iter().any(|f| !f) {
            return Err(NonlinearityError::NonIntervalWindow);
        }
        let bisect = |mut inside: f64, mut outside: f64| -> Result<f64, NonlinearityError> {
            for _ in 0..60 {
                let mid = 0.5 * (inside + outside);
                if feasible(mid)? {
                    inside = mid;
                } else {
                    outside = mid;
                }
            }
            Ok(inside)
        };
        let lo = if first == 0 {
            0.0
        } else {
            bisect(eps_at(first), eps_at(first - 1))?
        };
        let hi = if last + 1 == GRID {
            1.0
        } else {
            bisect(eps_at(last), eps_at(last + 1))?
        };
        Ok(EpsilonWindow::new(lo, hi))
    }
}

fn golden_max<G>(g: G, mut a: f64, mut b: f64) -> Result<f64, NonlinearityError>
where
    G: Fn(f64) -> Result<f64, NonlinearityError>,
{
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut gc, mut gd) = (g(c)?, g(d)?);
    while (b - a).abs() > GOLDEN_TOL {
        if gc > gd {
            b = d;
            d = c;
            gd = gc;
            c = b - ratio * (b - a);
            gc = g(c)?;
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + ratio * (b - a);
            gd = g(d)?;
        }
    }
    Ok(gc.max(gd).max(g(0.5 * (a + b))?))
}

/// Interval of feasible exponents ε.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonWindow {
    pub lo: f64,
    pub hi: f64,
    pub empty: bool,
}

impl EpsilonWindow {
    fn new(lo: f64, hi: f64) -> Self {
        let lo = lo.max(0.0);
        let hi = hi.min(1.0);
        if lo < hi {
            Self {
                lo,
                hi,
                empty: false,
            }
        } else {
            Self::empty()
        }
    }

    fn upto(hi: f64) -> Self {
        Self::new(0.0, hi)
    }

    fn full() -> Self {
        Self::new(0.0, 1.0)
    }

    pub fn empty() -> Self {
        Self {
            lo: 0.0,
            hi: 0.0,
            empty: true,
        }
    }

    pub fn contains(&self, eps: f64) -> bool {
        !self.empty && eps > self.lo && eps < self.hi
    }

    /// ε = min(hi/2, `default`), or the window midpoint when that falls at
    /// or below `lo`.
    pub fn select(&self, default: f64) -> Option<f64> {
        if self.empty {
            return None;
        }
        let eps = (0.5 * self.hi).min(default);
        if eps > self.lo {
            Some(eps)
        } else {
            Some(0.5 * (self.lo + self.hi))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f_examples() {
        let ac = Nonlinearity::AllenCahn;
        assert_eq!(ac.f(1.0).unwrap(), 0.0);
        assert_eq!(ac.f_prime(1.0).unwrap(), -2.0);
        let fisher = Nonlinearity::Fisher { c: 2.0 };
        assert_eq!(fisher.f(0.5).unwrap(), -2.0 * 0.25 + 2.0 * 0.5);
        let log = Nonlinearity::LogType { a: 1.0 };
        assert_eq!(log.f(1.0).unwrap(), 0.0);
        assert_eq!(log.f_prime(1.0).unwrap(), 1.0);
    }

    #[test]
    fn f_errors() {
        let log = Nonlinearity::LogType { a: 1.0 };
        assert!(matches!(
            log.f(0.0),
            Err(NonlinearityError::NotAdmissible { .. })
        ));
        assert!(log.f_prime(-1.0).is_err());
        let frac = Nonlinearity::Power { p: 2.5, q: 1.0 };
        assert!(frac.f(-0.5).is_err());
        let int = Nonlinearity::Power { p: 3.0, q: 1.0 };
        assert_eq!(int.f(-0.5).unwrap(), -0.5 + 0.125);
    }

    #[test]
    fn h_boundary_examples() {
        let fisher = Nonlinearity::Fisher { c: 1.0 };
        assert!(fisher.h(1.0 / 3.0, 0.5).unwrap().abs() < 1e-15);
        let ac = Nonlinearity::AllenCahn;
        assert!(ac.h((1.0f64 / 6.0).sqrt(), 0.4).unwrap().abs() < 1e-15);
        let log = Nonlinearity::LogType { a: 2.0 };
        let h = log.h((-1.0f64).exp(), 0.999).unwrap();
        assert!((h - 0.002).abs() < 1e-12);
    }

    #[test]
    fn h_errors() {
        let ac = Nonlinearity::AllenCahn;
        assert!(matches!(
            ac.h(0.5, 0.0),
            Err(NonlinearityError::EpsilonOutOfRange(_))
        ));
        assert!(ac.h(0.5, 1.0).is_err());
        assert!(ac.h(0.0, 0.5).is_err());
        assert!(ac.h(-0.5, 0.5).is_ok());
        assert!(Nonlinearity::Fisher { c: 1.0 }.h(-0.5, 0.5).is_err());
    }

    #[test]
    fn sup_h_examples() {
        let fisher = Nonlinearity::Fisher { c: 1.0 };
        assert!((fisher.sup_h(0.5, 1.0, 0.2).unwrap() + 0.4).abs() < 1e-15);
        let ac = Nonlinearity::AllenCahn;
        assert!((ac.sup_h(1.0, 2.0, 0.4).unwrap() + 2.0).abs() < 1e-15);
        assert_eq!(Nonlinearity::Zero.sup_h(0.3, 7.0, 0.5).unwrap(), 0.0);
        assert!(matches!(
            ac.sup_h(2.0, 1.0, 0.4),
            Err(NonlinearityError::InvalidRange(..))
        ));
        assert!(ac.sup_h(0.0, 1.0, 0.4).is_err());
    }

    #[test]
    fn power_sup_uses_interior_critical_point() {
        let pw = Nonlinearity::Power { p: 5.0, q: 2.0 };
        let eps = 0.3;
        let scan = (0..=20_000)
            .map(|k| 0.1 + 1.9 * k as f64 / 20_000.0)
            .map(|u| pw.h(u, eps).unwrap())
            .fold(f64::NEG_INFINITY, f64::max);
        let sup = pw.sup_h(0.1, 2.0, eps).unwrap();
        assert!(sup >= scan - 1e-12 && sup - scan < 1e-7, "{sup} vs {scan}");
    }

    #[test]
    fn window_examples() {
        let ac = Nonlinearity::AllenCahn.epsilon_window(0.5, 1.0).unwrap();
        assert!((ac.hi - 2.0 / 3.0).abs() < 1e-15 && ac.lo == 0.0);
        let fisher = Nonlinearity::Fisher { c: 1.0 }
            .epsilon_window(0.4, 1.0)
            .unwrap();
        assert!((fisher.hi - 2.0 / 3.0).abs() < 1e-15);
        let pw = Nonlinearity::Power { p: 3.0, q: 1.0 }
            .epsilon_window(1e-3, 1.0)
            .unwrap();
        assert!(!pw.empty);
        let log = Nonlinearity::LogType { a: 1.0 }
            .epsilon_window(0.1, 0.3)
            .unwrap();
        assert!((log.lo - 0.8305835451).abs() < 1e-9 && log.hi == 1.0);
        let none = Nonlinearity::LogType { a: 1.0 }
            .epsilon_window(0.1, 0.5)
            .unwrap();
        assert!(none.empty);
        let stiff = Nonlinearity::Power { p: 5.0, q: 2.0 }
            .epsilon_window(0.5, 1.0)
            .unwrap();
        assert!(stiff.empty, "0.5^3 = 0.125 < 1/4");
    }

    #[test]
    fn window_selection_respects_lower_bound() {
        let log = Nonlinearity::LogType { a: 1.0 }
            .epsilon_window(0.1, 0.3)
            .unwrap();
        let eps = log.select(DEFAULT_EPSILON).unwrap();
        assert!(log.contains(eps));
        let ac = Nonlinearity::AllenCahn.epsilon_window(0.3, 0.9).unwrap();
        assert_eq!(ac.select(DEFAULT_EPSILON).unwrap(), 0.5 * ac.hi);
        assert_eq!(EpsilonWindow::empty().select(0.1), None);
    }

    #[test]
    fn custom_window_matches_allen_cahn() {
        let custom = Nonlinearity::Custom {
            coeffs: vec![0.0, 1.0, 0.0, -1.0],
        };
        let w = custom.epsilon_window(0.5, 1.5).unwrap();
        assert!((w.hi - 2.0 / 3.0).abs() < 1e-9, "{w:?}");
        assert_eq!(w.lo, 0.0);
    }

    #[test]
    fn invalid_parameters() {
        assert!(Nonlinearity::Fisher { c: 0.0 }.validate().is_err());
        assert!(Nonlinearity::Power { p: 1.0, q: 2.0 }.validate().is_err());
        assert!(Nonlinearity::Power { p: 2.0, q: 0.5 }.validate().is_err());
        assert!(Nonlinearity::Power { p: 2.0, q: 1.0 }.validate().is_ok());
    }
}
