//! Liouville scenarios: pick ε from the feasibility window, evolve or
//! instantiate a solution, and test the predicted rigidity.

mod growth;
mod suite;

pub use growth::{growth_probe, GrowthProbe, GrowthRow, DEFAULT_BOXES};
pub use suite::{packaged_suite, run_suite};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Boundary, Grid, ModelSpace};
use crate::nonlinearity::{EpsilonWindow, Nonlinearity, NonlinearityError, DEFAULT_EPSILON};
use crate::solver::{self, ExactSolution, ParabolicOptions, SolverError};

pub const DEFAULT_GRAD_TOL: f64 = 1e-6;
pub const DEFAULT_RANGE_TOL: f64 = 1e-4;
/// Interior time residual allowed when checking that a formula family
/// solves the equation.
const FORMULA_RESIDUAL_TOL: f64 = 1e-4;
const FORMULA_TIMES: usize = 2001;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error(transparent)]
    Nonlinearity(#[from] NonlinearityError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Value(f64),
    /// The conserved weighted mean of the initial data.
    InitialMean,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Claim {
    ConvergesToConstant(Target),
    NoSuchSolution,
    FormulaLimit(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialData {
    /// Independent uniform samples per node.
    Uniform {
        lo: f64,
        hi: f64,
        seed: u64,
    },
    Constant {
        value: f64,
    },
}

impl InitialData {
    pub fn sample(&self, grid: &Grid) -> Vec<f64> {
        match *self {
            InitialData::Uniform { lo, hi, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..grid.count).map(|_| rng.gen_range(lo..=hi)).collect()
            }
            InitialData::Constant { value } => vec![value; grid.count],
        }
    }
}

/// Declared solution range [m, M]; for Allen–Cahn a range of |u|.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct URange {
    pub m: f64,
    #[serde(rename = "M")]
    pub big_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub space: ModelSpace,
    pub nodes: usize,
    pub nl: Nonlinearity,
    pub claim: Claim,
    pub u_range: URange,
    pub horizon: f64,
    pub dt: f64,
    pub initial: Option<InitialData>,
    pub exact: Option<ExactSolution>,
    pub grad_tol: f64,
    pub range_tol: f64,
    /// Polynomial-growth exponents (N1, N2) probed on the computed field.
    pub growth: Option<(f64, f64)>,
    /// Overrides the ε picked from the window.
    pub eps: Option<f64>,
    pub notes: Vec<String>,
}

impl ScenarioConfig {
    pub fn new(
        name: &str,
        space: ModelSpace,
        nl: Nonlinearity,
        claim: Claim,
        u_range: URange,
    ) -> Self {
        Self {
            name: name.to_string(),
            space,
            nodes: 128,
            nl,
            claim,
            u_range,
            horizon: 60.0,
            dt: 0.05,
            initial: None,
            exact: None,
            grad_tol: DEFAULT_GRAD_TOL,
            range_tol: DEFAULT_RANGE_TOL,
            growth: None,
            eps: None,
            notes: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.nl.validate()?;
        let invalid = |msg: String| Err(ScenarioError::Invalid(format!("{}: {msg}", self.name)));
        if !(self.u_range.m > 0.0 && self.u_range.m <= self.u_range.big_m) {
            return invalid(format!(
                "range [{}, {}] must satisfy 0 < m <= M",
                self.u_range.m, self.u_range.big_m
            ));
        }
        match self.claim {
            Claim::ConvergesToConstant(target) => {
                if !(self.horizon > 0.0 && self.dt > 0.0) {
                    return invalid("simulation claims need a positive horizon and dt".into());
                }
                if self.initial.is_none() {
                    return invalid("simulation claims need initial data".into());
                }
                if self.nodes < 5 {
                    return invalid(format!("{} nodes, at least 5 are required", self.nodes));
                }
                if target == Target::InitialMean
                    && (self.space.is_radial() || !self.space.domain().is_periodic())
                {
                    return invalid("the initial-mean target needs a periodic line".into());
                }
            }
            Claim::NoSuchSolution | Claim::FormulaLimit(_) => {
                if self.exact.is_none() {
                    return invalid("formula claims need an exact family".into());
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    Violated(String),
}

impl Verdict {
    pub fn is_consistent(&self) -> bool {
        matches!(self, Verdict::Consistent)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub name: String,
    pub claim: Claim,
    pub verdict: Verdict,
    pub eps_used: Option<f64>,
    pub window_used: EpsilonWindow,
    /// Predicted constant, or the analytic limit for formula claims.
    pub predicted: Option<f64>,
    pub final_range: Option<(f64, f64)>,
    pub final_sup_grad: Option<f64>,
    /// max over stored steps of sup H at the realised range.
    pub max_sup_h: Option<f64>,
    pub steps: usize,
    pub growth: Option<GrowthProbe>,
    pub notes: Vec<String>,
    pub sup_grad_history: Vec<f64>,
}

/// Weighted mean conserved by the discrete operator: nodes weighted by
/// their control volume times e^{−f}.
fn conserved_mean(space: &ModelSpace, grid: &Grid, u: &[f64]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (i, v) in u.iter().enumerate() {
        let x = grid.x(i);
        let mut h = grid.spacing;
        if grid.is_boundary_row(i) {
            h *= 0.5;
        }
        let w = h * (-space.weight().value(x)).exp();
        num += w * v;
        den += w;
    }
    num / den
}

/// Range of u, or of |u| for Allen–Cahn.
fn realised_range(nl: &Nonlinearity, u: &[f64]) -> (f64, f64) {
    let map = |v: f64| {
        if *nl == Nonlinearity::AllenCahn {
            v.abs()
        } else {
            v
        }
    };
    u.iter()
        .map(|v| map(*v))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        })
}

struct Choice {
    window: EpsilonWindow,
    eps: Option<f64>,
}

fn choose_eps(cfg: &ScenarioConfig) -> Result<Choice, ScenarioError> {
    let window = cfg.nl.epsilon_window(cfg.u_range.m, cfg.u_range.big_m)?;
    let eps = match cfg.eps {
        Some(e) => Some(e),
        None => window.select(DEFAULT_EPSILON),
    };
    Ok(Choice { window, eps })
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioReport, ScenarioError> {
    cfg.validate()?;
    let choice = choose_eps(cfg)?;
    let mut report = ScenarioReport {
        name: cfg.name.clone(),
        claim: cfg.claim,
        verdict: Verdict::Consistent,
        eps_used: choice.eps,
        window_used: choice.window,
        predicted: None,
        final_range: None,
        final_sup_grad: None,
        max_sup_h: None,
        steps: 0,
        growth: None,
        notes: cfg.notes.clone(),
        sup_grad_history: Vec::new(),
    };
    let mut failures: Vec<String> = Vec::new();
    let Some(eps) = choice.eps else {
        report.verdict = Verdict::Violated("epsilon window is empty on the declared range".into());
        return Ok(report);
    };
    if !choice.window.contains(eps) {
        failures.push(format!(
            "eps = {eps} lies outside the window {:?}",
            choice.window
        ));
    }
    match cfg.claim {
        Claim::ConvergesToConstant(target) => {
            simulate(cfg, target, eps, &mut report, &mut failures)?
        }
        Claim::NoSuchSolution => {
            let declared = cfg.nl.sup_h(cfg.u_range.m, cfg.u_range.big_m, eps)?;
            report.max_sup_h = Some(declared);
            if declared > 0.0 {
                failures.push(format!("sup H = {declared} > 0 on the declared range"));
            }
            contradiction(cfg, &mut report, &mut failures)?;
        }
        Claim::FormulaLimit(value) => {
            let exact = cfg.exact.expect("validated");
            let limit = exact.ancient_limit();
            report.predicted = limit;
            match limit {
                Some(l) if l == value || (l - value).abs() <= 1e-12 * value.abs().max(1.0) => {}
                other => failures.push(format!("ancient limit {other:?} differs from {value}")),
            }
            check_formula_solves(cfg, &exact, &mut failures)?;
        }
    }
    if !failures.is_empty() {
        report.verdict = Verdict::Violated(failures.join("; "));
    }
    Ok(report)
}

fn simulate(
    cfg: &ScenarioConfig,
    target: Target,
    eps: f64,
    report: &mut ScenarioReport,
    failures: &mut Vec<String>,
) -> Result<(), ScenarioError> {
    let space = &cfg.space;
    let grid = space.grid(cfg.nodes).map_err(SolverError::from)?;
    let mut u0 = cfg.initial.expect("validated").sample(&grid);
    let dom = space.domain();
    if let Boundary::Dirichlet(v) = dom.left {
        u0[0] = v;
    }
    if let Boundary::Dirichlet(v) = dom.right {
        u0[grid.count - 1] = v;
    }
    let predicted = match target {
        Target::Value(v) => v,
        Target::InitialMean => conserved_mean(space, &grid, &u0),
    };
    report.predicted = Some(predicted);
    let opts = ParabolicOptions::new(0.0, cfg.horizon, cfg.dt);
    let run = match solver::solve_parabolic(space, &grid, &cfg.nl, &u0, &opts) {
        Ok(run) => run,
        Err(e) => {
            failures.push(format!("simulation aborted: {e}"));
            return Ok(());
        }
    };
    let field = &run.field;
    report.steps = run.steps;
    report.sup_grad_history = (0..field.n_times())
        .map(|k| field.gradient(k).iter().fold(0.0f64, |m, g| m.max(g.abs())))
        .collect();
    let last = field.last();
    let (lo, hi) = field.slice_range(field.n_times() - 1);
    report.final_range = Some((lo, hi));
    let g = *report.sup_grad_history.last().expect("at least one slice");
    report.final_sup_grad = Some(g);
    if g > cfg.grad_tol {
        failures.push(format!(
            "final sup |grad u| = {g:e} exceeds {:e}",
            cfg.grad_tol
        ));
    }
    let dev = last
        .iter()
        .fold(0.0f64, |m, v| m.max((v - predicted).abs()));
    if dev > cfg.range_tol {
        failures.push(format!(
            "final range [{lo}, {hi}] is not within {:e} of {predicted}",
            cfg.range_tol
        ));
    }
    // a-posteriori sign condition on the realised range of every stored step
    let mut worst = f64::NEG_INFINITY;
    for k in 0..field.n_times() {
        let (m, big_m) = realised_range(&cfg.nl, field.slice(k));
        match cfg.nl.sup_h(m, big_m, eps) {
            Ok(s) => worst = worst.max(s),
            Err(e) => {
                failures.push(format!("sup H undefined at step {k}: {e}"));
                break;
            }
        }
    }
    report.max_sup_h = Some(worst);
    if worst > 0.0 {
        failures.push(format!("sup H = {worst} > 0 at the realised range"));
    }
    if let Some((n1, n2)) = cfg.growth {
        let probe = growth_probe(field, n1, n2, DEFAULT_BOXES)?;
        if !probe.trends_to_zero {
            failures.push(format!(
                "growth probe slope {} is not negative",
                probe.slope
            ));
        }
        report.growth = Some(probe);
    }
    Ok(())
}

/// A candidate trajectory that satisfies the assumed bound now but whose
/// ancient limit escapes it.
fn contradiction(
    cfg: &ScenarioConfig,
    report: &mut ScenarioReport,
    failures: &mut Vec<String>,
) -> Result<(), ScenarioError> {
    let exact = cfg.exact.expect("validated");
    let URange { m, big_m } = cfg.u_range;
    let now = exact.value(&cfg.space, cfg.space.center(), 0.0);
    if !(m..=big_m).contains(&now) {
        failures.push(format!(
            "trajectory value {now} at t = 0 is outside [{m}, {big_m}]"
        ));
    }
    let limit = exact.ancient_limit();
    report.predicted = limit;
    match limit {
        Some(l) if !(m..=big_m).contains(&l) => {}
        other => failures.push(format!(
            "ancient limit {other:?} does not leave the assumed bound [{m}, {big_m}]"
        )),
    }
    check_formula_solves(cfg, &exact, failures)
}

/// Centred-time residual of the closed form at interior times of
/// [−horizon, 0].
fn check_formula_solves(
    cfg: &ScenarioConfig,
    exact: &ExactSolution,
    failures: &mut Vec<String>,
) -> Result<(), ScenarioError> {
    if exact.nonlinearity() != cfg.nl {
        failures.push(format!(
            "exact family solves {:?}, not {:?}",
            exact.nonlinearity(),
            cfg.nl
        ));
        return Ok(());
    }
    let grid = cfg
        .space
        .grid(cfg.nodes.max(5))
        .map_err(SolverError::from)?;
    let dt = cfg.horizon / (FORMULA_TIMES - 1) as f64;
    let field = exact.sample(&cfg.space, &grid, -cfg.horizon, dt, FORMULA_TIMES)?;
    let res = solver::residual(&field, &cfg.nl)?;
    let worst = (1..FORMULA_TIMES - 1)
        .flat_map(|k| {
            let s = res.slice(k);
            (0..grid.count)
                .filter(|i| !grid.is_boundary_row(*i))
                .map(move |i| s[i].abs())
        })
        .fold(0.0, f64::max);
    if worst > FORMULA_RESIDUAL_TOL {
        failures.push(format!("closed form leaves residual {worst:e}"));
    }
    Ok(())
}

impl ScenarioReport {
    /// One row of the summary table.
    pub fn summary_row(&self) -> String {
        let verdict = match &self.verdict {
            Verdict::Consistent => "consistent".to_string(),
            Verdict::Violated(why) => format!("VIOLATED ({why})"),
        };
        let eps = self.eps_used.map_or("-".to_string(), |e| format!("{e:.4}"));
        let grad = self
            .final_sup_grad
            .map_or("-".to_string(), |g| format!("{g:.2e}"));
        let range = self
            .final_range
            .map_or("-".to_string(), |(a, b)| format!("[{a:.6}, {b:.6}]"));
        format!(
            "{:<28} {:>8} {:>10} {:<28} {}",
            self.name, eps, grad, range, verdict
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Domain, Weight};

    fn periodic() -> ModelSpace {
        ModelSpace::line(
            1,
            Weight::Zero,
            Domain::periodic(0.0, std::f64::consts::TAU),
        )
        .unwrap()
    }

    #[test]
    fn uniform_initial_data_is_reproducible_and_in_band() {
        let g = periodic().grid(64).unwrap();
        let d = InitialData::Uniform {
            lo: 0.3,
            hi: 0.9,
            seed: 7,
        };
        let a = d.sample(&g);
        assert_eq!(a, d.sample(&g));
        assert!(a.iter().all(|v| (0.3..=0.9).contains(v)));
    }

    #[test]
    fn claims_need_matching_inputs() {
        let cfg = ScenarioConfig::new(
            "x",
            periodic(),
            Nonlinearity::AllenCahn,
            Claim::ConvergesToConstant(Target::Value(1.0)),
            URange { m: 0.3, big_m: 0.9 },
        );
        assert!(matches!(cfg.validate(), Err(ScenarioError::Invalid(_))));
        let cfg = ScenarioConfig {
            claim: Claim::NoSuchSolution,
            ..cfg
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn empty_window_is_reported() {
        let mut cfg = ScenarioConfig::new(
            "power",
            periodic(),
            Nonlinearity::Power { p: 5.0, q: 2.0 },
            Claim::ConvergesToConstant(Target::Value(1.0)),
            URange { m: 0.5, big_m: 1.5 },
        );
        cfg.initial = Some(InitialData::Constant { value: 1.0 });
        let rep = run_scenario(&cfg).unwrap();
        assert!(matches!(rep.verdict, Verdict::Violated(_)));
        assert_eq!(rep.eps_used, None);
    }

    #[test]
    fn wrong_constant_is_violated() {
        let mut cfg = ScenarioConfig::new(
            "fisher",
            periodic(),
            Nonlinearity::Fisher { c: 1.0 },
            Claim::ConvergesToConstant(Target::Value(0.5)),
            URange { m: 0.5, big_m: 2.0 },
        );
        cfg.initial = Some(InitialData::Uniform {
            lo: 0.5,
            hi: 2.0,
            seed: 1,
        });
        cfg.horizon = 5.0;
        let rep = run_scenario(&cfg).unwrap();
        assert!(!rep.verdict.is_consistent());
    }

    #[test]
    fn log_abort_becomes_violation() {
        let mut cfg = ScenarioConfig::new(
            "log",
            periodic(),
            Nonlinearity::LogType { a: -1.0 },
            Claim::ConvergesToConstant(Target::Value(1.0)),
            URange { m: 0.5, big_m: 1.5 },
        );
        cfg.initial = Some(InitialData::Uniform {
            lo: -0.5,
            hi: 1.5,
            seed: 3,
        });
        let rep = run_scenario(&cfg).unwrap();
        match rep.verdict {
            Verdict::Violated(msg) => assert!(msg.contains("aborted"), "{msg}"),
            v => panic!("{v:?}"),
        }
    }
}
