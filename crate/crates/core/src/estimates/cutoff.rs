//! Separable space–time cutoff ψ̄(r, t) = η(r) θ(t).
//!
//! Both factors are built from the flat smooth step
//!
//! ```text
//! S(y) = 1 / (1 + e^{q(y)}),   q(y) = 1/y − 1/(1 − y),   0 < y < 1
//! ```
//!
//! with S = 0 for y ≤ 0 and S = 1 for y ≥ 1. All derivatives of S vanish at
//! both ends, so S' and S'' are dominated by any power S^ε̂ with ε̂ < 1.
//! For ε̂ = 1 the ratio S'/S = −q'(1 − S) grows like y⁻² near y = 0; the
//! tabled constant is then the supremum over the values representable
//! before the step is flushed to zero, and is marked as not finite in the
//! continuum limit.

use serde::{Deserialize, Serialize};

use super::EstimateError;

/// |q| beyond which S is flushed to exactly 0 or 1 (e^{−700} is still a
/// normal double).
const FLUSH_Q: f64 = 700.0;
/// Safety factor applied to measured suprema.
const MEASURE_MARGIN: f64 = 1.0 + 1e-9;
const DENSE_SAMPLES: usize = 20_000;
/// Exponents ε̂ for which spatial constants are tabled.
pub const CUTOFF_EXPONENTS: [f64; 4] = [0.25, 0.5, 0.75, 1.0];
pub const CERTIFY_POINTS: usize = 512;

/// S, S', S'' at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepJet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
    /// ln S, finite wherever S > 0.
    pub ln_value: f64,
}

pub fn smooth_step(y: f64) -> StepJet {
    let flat = |value: f64| StepJet {
        value,
        d1: 0.0,
        d2: 0.0,
        ln_value: value.ln(),
    };
    if y <= 0.0 {
        return flat(0.0);
    }
    if y >= 1.0 {
        return flat(1.0);
    }
    let z = 1.0 - y;
    let q = 1.0 / y - 1.0 / z;
    if q > FLUSH_Q {
        return flat(0.0);
    }
    if q < -FLUSH_Q {
        return flat(1.0);
    }
    let s = 1.0 / (1.0 + q.exp());
    let sc = 1.0 / (1.0 + (-q).exp());
    let q1 = -1.0 / (y * y) - 1.0 / (z * z);
    let q2 = 2.0 / (y * y * y) - 2.0 / (z * z * z);
    let d1 = -q1 * s * sc;
    let d2 = -q2 * s * sc - q1 * d1 * (sc - s);
    let ln_value = if q > 0.0 {
        -q - (-q).exp().ln_1p()
    } else {
        -q.exp().ln_1p()
    };
    StepJet {
        value: s,
        d1,
        d2,
        ln_value,
    }
}

/// Smallest y at which the step is not flushed to zero.
fn flush_point() -> f64 {
    // q(y) = FLUSH_Q  ⇔  FLUSH_Q y² − (FLUSH_Q + 2) y + 1 = 0, smaller root
    let a = FLUSH_Q;
    let b = -(FLUSH_Q + 2.0);
    let disc = (b * b - 4.0 * a).sqrt();
    2.0 / (-b + disc)
}

/// Spatial constant for one exponent ε̂.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialConstant {
    pub eps_hat: f64,
    pub c: f64,
    /// False when the supremum diverges as the flush threshold is removed.
    pub finite_in_limit: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffProfile {
    pub r: f64,
    pub t_len: f64,
    pub t0: f64,
    pub tau: f64,
    /// |ψ̄_t| ≤ C (τ − t₀ + T)⁻¹ ψ̄^{1/2}
    pub c_time: f64,
    pub c_eps: Vec<SpatialConstant>,
}

/// Value and first two derivatives of ψ̄ in one variable, plus ln of the value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorJet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
    pub ln_value: f64,
}

fn sup_on_dense<G: Fn(f64) -> f64>(g: G) -> f64 {
    // log-spaced towards y = 0 where the ratios blow up, linear elsewhere
    let y_min = flush_point();
    let mut best = (f64::NEG_INFINITY, y_min);
    let visit = |y: f64, best: &mut (f64, f64)| {
        let v = g(y);
        if v > best.0 {
            *best = (v, y);
        }
    };
    let log_lo = y_min.ln();
    let log_hi = 0.5f64.ln();
    for k in 0..DENSE_SAMPLES {
        let y = (log_lo + (log_hi - log_lo) * k as f64 / (DENSE_SAMPLES - 1) as f64).exp();
        visit(y.max(y_min), &mut best);
    }
    for k in 1..DENSE_SAMPLES {
        visit(k as f64 / DENSE_SAMPLES as f64, &mut best);
    }
    visit(y_min, &mut best);
    // golden refinement around the best sample
    let width = (best.1 * 1e-2).max(1.0 / DENSE_SAMPLES as f64);
    let (mut a, mut b) = ((best.1 - width).max(y_min), (best.1 + width).min(1.0));
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let c = b - ratio * (b - a);
        let d = a + ratio * (b - a);
        let (gc, gd) = (g(c), g(d));
        best.0 = best.0.max(gc).max(gd);
        if gc > gd {
            b = d;
        } else {
            a = c;
        }
        if b - a < 1e-15 * b.max(1e-300) {
            break;
        }
    }
    best.0
}

/// |d|/S^p evaluated in log form; 0 where the derivative vanishes.
fn ratio(d: f64, ln_s: f64, p: f64) -> f64 {
    if d == 0.0 {
        0.0
    } else {
        (d.abs().ln() - p * ln_s).exp()
    }
}

pub fn build_cutoff(r: f64, t_len: f64, t0: f64, tau: f64) -> Result<CutoffProfile, EstimateError> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(EstimateError::InvalidCutoff(format!(
            "radius must be positive, got {r}"
        )));
    }
    if !(t_len > 0.0 && t_len.is_finite() && t0.is_finite()) {
        return Err(EstimateError::InvalidCutoff(format!(
            "duration must be positive, got {t_len}"
        )));
    }
    if !(tau > t0 - t_len && tau <= t0) {
        return Err(EstimateError::InvalidCutoff(format!(
            "tau = {tau} is outside ({}, {t0}]",
            t0 - t_len
        )));
    }
    let c_time = MEASURE_MARGIN
        * sup_on_dense(|y| {
            let s = smooth_step(y);
            ratio(s.d1, s.ln_value, 0.5)
        });
    let c_eps = CUTOFF_EXPONENTS
        .iter()
        .map(|&e| {
            // η' = −(2/R) S', η'' = (4/R²) S''
            let c = sup_on_dense(|y| {
                let s = smooth_step(y);
                (2.0 * ratio(s.d1, s.ln_value, e)).max(4.0 * ratio(s.d2, s.ln_value, e))
            });
            SpatialConstant {
                eps_hat: e,
                c: MEASURE_MARGIN * c,
                finite_in_limit: e < 1.0,
            }
        })
        .collect();
    Ok(CutoffProfile {
        r,
        t_len,
        t0,
        tau,
        c_time,
        c_eps,
    })
}

impl CutoffProfile {
    /// η(r) = S(2(R − r)/R).
    pub fn eta(&self, r: f64) -> FactorJet {
        let s = smooth_step(2.0 * (self.r - r) / self.r);
        let k = 2.0 / self.r;
        FactorJet {
            value: s.value,
            d1: -k * s.d1,
            d2: k * k * s.d2,
            ln_value: s.ln_value,
        }
    }

    /// θ(t) = S((t − t₀ + T)/(τ − t₀ + T)).
    pub fn theta(&self, t: f64) -> FactorJet {
        let len = self.ramp_length();
        let s = smooth_step((t - self.t0 + self.t_len) / len);
        FactorJet {
            value: s.value,
            d1: s.d1 / len,
            d2: s.d2 / (len * len),
            ln_value: s.ln_value,
        }
    }

    /// τ − t₀ + T.
    pub fn ramp_length(&self) -> f64 {
        self.tau - self.t0 + self.t_len
    }

    pub fn value(&self, r: f64, t: f64) -> f64 {
        self.eta(r).value * self.theta(t).value
    }

    pub fn d_r(&self, r: f64, t: f64) -> f64 {
        self.eta(r).d1 * self.theta(t).value
    }

    pub fn d_rr(&self, r: f64, t: f64) -> f64 {
        self.eta(r).d2 * self.theta(t).value
    }

    pub fn d_t(&self, r: f64, t: f64) -> f64 {
        self.eta(r).value * self.theta(t).d1
    }

    pub fn constant(&self, eps_hat: f64) -> Option<&SpatialConstant> {
        self.c_eps.iter().find(|c| c.eps_hat == eps_hat)
    }

    /// Checks every property on a `points × points` grid of
    /// [0, 1.25 R] × [t₀ − T, t₀].
    ///
    /// Power inequalities are compared in log form, factor by factor, so
    /// that products of two small factors cannot underflow into a spurious
    /// failure.
    pub fn certify(&self, points: usize) -> CutoffCertificate {
        let points = points.max(2);
        let rs: Vec<f64> = (0..points)
            .map(|i| 1.25 * self.r * i as f64 / (points - 1) as f64)
            .collect();
        let ts: Vec<f64> = (0..points)
            .map(|k| {
                if k + 1 == points {
                    self.t0
                } else {
                    self.t0 - self.t_len + self.t_len * k as f64 / (points - 1) as f64
                }
            })
            .collect();
        let etas: Vec<FactorJet> = rs.iter().map(|&r| self.eta(r)).collect();
        let thetas: Vec<FactorJet> = ts.iter().map(|&t| self.theta(t)).collect();
        let ln_r = self.r.ln();
        let ln_len = self.ramp_length().ln();

        let mut range = Tally::new("(i) 0 <= psi <= 1, support in [0,R]");
        let mut plateau = Tally::new("(ii) psi = 1 on [0,R/2]x[tau,t0], psi_r = 0 on [0,R/2]");
        let mut initial = Tally::new("(iii) psi(r, t0-T) = 0");
        let mut time = Tally::new("(iii) |psi_t| <= C psi^(1/2)/(tau-t0+T)");
        let mut monotone = Tally::new("(iv) psi_r <= 0");
        let mut spatial: Vec<Tally> = self
            .c_eps
            .iter()
            .map(|c| {
                Tally::new(&format!(
                    "(iv) eps_hat = {}: |psi_r|, R|psi_rr| <= C psi^eps_hat/R",
                    c.eps_hat
                ))
            })
            .collect();

        for (i, (&r, eta)) in rs.iter().zip(&etas).enumerate() {
            for (k, (&t, theta)) in ts.iter().zip(&thetas).enumerate() {
                let psi = eta.value * theta.value;
                range.record(
                    i,
                    k,
                    (0.0..=1.0).contains(&psi) && (r < self.r || psi == 0.0),
                );
                if r <= 0.5 * self.r {
                    let flat = eta.d1 * theta.value == 0.0;
                    plateau.record(i, k, flat && (t < self.tau || psi == 1.0));
                }
                if k == 0 {
                    initial.record(i, k, psi == 0.0);
                }
                let ln_psi = eta.ln_value + theta.ln_value;
                let dt = eta.value * theta.d1;
                time.record(
                    i,
                    k,
                    dt == 0.0
                        || eta.ln_value + theta.d1.abs().ln()
                            <= self.c_time.ln() - ln_len + 0.5 * ln_psi,
                );
                monotone.record(i, k, eta.d1 * theta.value <= 0.0);
                for (tally, c) in spatial.iter_mut().zip(&self.c_eps) {
                    let ln_c = c.c.ln();
                    let ok1 = eta.d1 == 0.0
                        || theta.value == 0.0
                        || eta.d1.abs().ln() + theta.ln_value <= ln_c - ln_r + c.eps_hat * ln_psi;
                    let ok2 = eta.d2 == 0.0
                        || theta.value == 0.0
                        || eta.d2.abs().ln() + theta.ln_value
                            <= ln_c - 2.0 * ln_r + c.eps_hat * ln_psi;
                    tally.record(i, k, ok1 && ok2);
                }
            }
        }
        let mut properties = vec![
            range.finish(),
            plateau.finish(),
            initial.finish(),
            time.finish(),
            monotone.finish(),
        ];
        properties.extend(spatial.into_iter().map(Tally::finish));
        let all_hold = properties.iter().all(|p| p.failures == 0);
        CutoffCertificate {
            points,
            properties,
            all_hold,
        }
    }
}

struct Tally {
    name: String,
    checked: usize,
    failures: usize,
    first_failure: Option<(usize, usize)>,
}

impl Tally {
    fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            checked: 0,
            failures: 0,
            first_failure: None,
        }
    }

    fn record(&mut self, i: usize, k: usize, ok: bool) {
        self.checked += 1;
        if !ok {
            self.failures += 1;
            self.first_failure.get_or_insert((i, k));
        }
    }

    fn finish(self) -> PropertyCheck {
        PropertyCheck {
            name: self.name,
            checked: self.checked,
            failures: self.failures,
            first_failure: self.first_failure,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyCheck {
    pub name: String,
    pub checked: usize,
    pub failures: usize,
    /// (r index, t index) of the first failing grid point.
    pub first_failure: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffCertificate {
    pub points: usize,
    pub properties: Vec<PropertyCheck>,
    pub all_hold: bool,
}
