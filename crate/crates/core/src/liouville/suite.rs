use std::f64::consts::TAU;

use rayon::prelude::*;

use super::{
    run_scenario, Claim, InitialData, ScenarioConfig, ScenarioError, ScenarioReport, Target, URange,
};
use crate::geometry::{Domain, ModelSpace, Warp, Weight};
use crate::nonlinearity::Nonlinearity;
use crate::solver::ExactSolution;

fn periodic_line() -> ModelSpace {
    ModelSpace::line(1, Weight::Zero, Domain::periodic(0.0, TAU)).expect("valid domain")
}

fn band(name: &str, nl: Nonlinearity, lo: f64, hi: f64, target: f64, seed: u64) -> ScenarioConfig {
    let m = lo.abs().min(hi.abs());
    let big_m = lo.abs().max(hi.abs()).max(target.abs());
    let mut cfg = ScenarioConfig::new(
        name,
        periodic_line(),
        nl,
        Claim::ConvergesToConstant(Target::Value(target)),
        URange { m, big_m },
    );
    cfg.initial = Some(InitialData::Uniform { lo, hi, seed });
    cfg
}

fn formula(name: &str, a: f64, d: f64, claim: Claim, m: f64, big_m: f64) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::new(
        name,
        periodic_line(),
        Nonlinearity::LogType { a },
        claim,
        URange { m, big_m },
    );
    cfg.exact = Some(ExactSolution::LogFlow { a, d });
    cfg.horizon = 5.0;
    cfg
}

/// The packaged scenarios, one per Liouville statement plus the negation
/// check for Allen–Cahn.
pub fn packaged_suite() -> Vec<ScenarioConfig> {
    let mut suite = Vec::new();

    // a > 0, u ≤ c < 1/e: the spatially constant trajectory escapes to 1
    let mut c = formula(
        "log_a_pos_bound",
        1.0,
        -2.0,
        Claim::NoSuchSolution,
        0.01,
        0.3,
    );
    c.notes
        .push("assumed bound u <= 0.3 < 1/e; contradiction via the constant-in-space flow".into());
    suite.push(c);
    suite.push(formula(
        "log_a_pos_limit",
        1.0,
        -2.0,
        Claim::FormulaLimit(1.0),
        0.01,
        0.3,
    ));

    // a < 0, 0 < c ≤ u ≤ D < 1: the trajectory decays to 0 in the past
    let mut c = formula(
        "log_a_neg_bound",
        -1.0,
        -0.5,
        Claim::NoSuchSolution,
        0.2,
        0.8,
    );
    c.notes.push("assumed bound 0.2 <= u <= 0.8".into());
    suite.push(c);
    let mut c = band(
        "log_a_neg_band",
        Nonlinearity::LogType { a: -1.0 },
        0.5,
        1.5,
        1.0,
        11,
    );
    c.growth = Some((1.0, 1.0));
    suite.push(c);

    // a = 0: weighted heat flow, constant equal to the conserved mean
    let mut c = band(
        "log_a_zero_heat",
        Nonlinearity::LogType { a: 0.0 },
        0.5,
        1.5,
        1.0,
        12,
    );
    c.claim = Claim::ConvergesToConstant(Target::InitialMean);
    c.growth = Some((1.0, 1.0));
    suite.push(c);

    suite.push(band(
        "allen_cahn_positive",
        Nonlinearity::AllenCahn,
        0.3,
        0.9,
        1.0,
        13,
    ));
    suite.push(band(
        "allen_cahn_negative",
        Nonlinearity::AllenCahn,
        -0.9,
        -0.3,
        -1.0,
        14,
    ));
    suite.push(band(
        "fisher",
        Nonlinearity::Fisher { c: 1.0 },
        0.5,
        2.0,
        1.0,
        15,
    ));
    let mut c = band(
        "power_p5_q2",
        Nonlinearity::Power { p: 5.0, q: 2.0 },
        0.7,
        1.3,
        1.0,
        16,
    );
    c.dt = 0.02;
    c.notes.push("m^(p-q) = 0.343 > (q-1)/(p-1) = 0.25".into());
    suite.push(c);

    // Ric_f ≥ 0 on a weighted Euclidean model, Allen–Cahn with u ≥ m
    let radial = ModelSpace::radial(
        3,
        Warp::Euclidean,
        Weight::Gaussian { s: 0.5 },
        Domain::neumann(0.0, 8.0),
    )
    .expect("valid radial model");
    let mut c = ScenarioConfig::new(
        "allen_cahn_radial_weighted",
        radial,
        Nonlinearity::AllenCahn,
        Claim::ConvergesToConstant(Target::Value(1.0)),
        URange { m: 0.3, big_m: 1.0 },
    );
    c.initial = Some(InitialData::Uniform {
        lo: 0.3,
        hi: 0.9,
        seed: 17,
    });
    suite.push(c);

    suite
}

/// Runs every scenario, in parallel on `threads` workers (0 = all cores).
/// Reports come back in input order.
pub fn run_suite(
    suite: &[ScenarioConfig],
    threads: usize,
) -> Result<Vec<Result<ScenarioReport, ScenarioError>>, ScenarioError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| ScenarioError::Invalid(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| suite.par_iter().map(run_scenario).collect()))
}
