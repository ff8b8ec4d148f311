use std::f64::consts::TAU;

use proptest::prelude::*;

use dlab::config::parse_number;
use dlab::estimates::EstimateReport;
use dlab::geometry::{Domain, ModelSpace, Warp, Weight};
use dlab::nonlinearity::Nonlinearity;
use dlab::solver::{
    read_snapshot, solve_parabolic, solve_standing, write_snapshot, NewtonOptions,
    ParabolicOptions, Snapshot,
};

fn nonlinearity() -> impl Strategy<Value = Nonlinearity> {
    prop_oneof![
        (0.1..4.0f64).prop_map(|c| Nonlinearity::Fisher { c }),
        Just(Nonlinearity::AllenCahn),
        (-3.0..3.0f64).prop_map(|a| Nonlinearity::LogType { a }),
        (1.0..3.0f64, 0.2..4.0f64).prop_map(|(q, d)| Nonlinearity::Power { p: q + d, q }),
    ]
}

fn weight() -> impl Strategy<Value = Weight> {
    prop_oneof![
        Just(Weight::Zero),
        (-2.0..2.0f64).prop_map(|a| Weight::Linear { a }),
        (0.0..2.0f64).prop_map(|s| Weight::Gaussian { s }),
    ]
}

fn space() -> impl Strategy<Value = ModelSpace> {
    prop_oneof![
        (weight(), 1.0..6.0f64)
            .prop_map(|(w, len)| { ModelSpace::line(1, w, Domain::neumann(-len, len)).unwrap() }),
        (weight(), 1.0..6.0f64)
            .prop_map(|(w, len)| { ModelSpace::line(1, w, Domain::periodic(0.0, len)).unwrap() }),
        (2usize..4, 0.0..1.0f64, 2.0..6.0f64).prop_map(|(n, s, hi)| {
            ModelSpace::radial(
                n,
                Warp::Euclidean,
                Weight::Gaussian { s },
                Domain::neumann(0.0, hi),
            )
            .unwrap()
        }),
        (2usize..4, 2.0..5.0f64).prop_map(|(n, hi)| {
            ModelSpace::radial(n, Warp::Hyperbolic, Weight::Zero, Domain::neumann(0.0, hi)).unwrap()
        }),
    ]
}

/// H = (ε − 1)F/u + F' with F and F' differentiated by hand here.
fn h_by_hand(nl: &Nonlinearity, u: f64, eps: f64) -> f64 {
    let (f, fp) = match *nl {
        Nonlinearity::Fisher { c } => (c * u * (1.0 - u), c * (1.0 - 2.0 * u)),
        Nonlinearity::AllenCahn => (u - u.powi(3), 1.0 - 3.0 * u * u),
        Nonlinearity::LogType { a } => (a * u * u.ln(), a * (u.ln() + 1.0)),
        Nonlinearity::Power { p, q } => (
            u.powf(q) - u.powf(p),
            q * u.powf(q - 1.0) - p * u.powf(p - 1.0),
        ),
        _ => unreachable!(),
    };
    (eps - 1.0) * f / u + fp
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn h_matches_closed_form(nl in nonlinearity(), u in 0.05..3.0f64, eps in 0.001..0.999f64) {
        let closed = nl.h_closed_form(u, eps).unwrap().unwrap();
        let generic = nl.h(u, eps).unwrap();
        let hand = h_by_hand(&nl, u, eps);
        let scale = 1.0 + hand.abs() + (nl.f(u).unwrap() / u).abs() + nl.f_prime(u).unwrap().abs();
        prop_assert!((closed - hand).abs() <= 1e-12 * scale);
        prop_assert!((generic - hand).abs() <= 1e-12 * scale);
    }

    #[test]
    fn eps_inside_window_makes_h_nonpositive(
        nl in nonlinearity(),
        m in 0.05..1.5f64,
        spread in 1.0..3.0f64,
        pick in 0.01..0.99f64,
    ) {
        let big_m = m * spread;
        let window = nl.epsilon_window(m, big_m).unwrap();
        prop_assume!(!window.empty);
        let eps = window.lo + pick * (window.hi - window.lo);
        for k in 0..=400 {
            let u = m + (big_m - m) * k as f64 / 400.0;
            let h = h_by_hand(&nl, u, eps);
            prop_assert!(h <= 1e-12 * (1.0 + u.powi(6)), "H({u}) = {h} at eps {eps}, {window:?}");
        }
    }

    #[test]
    fn selected_eps_lies_in_window(nl in nonlinearity(), m in 0.05..1.5f64, spread in 1.0..3.0f64) {
        let window = nl.epsilon_window(m, m * spread).unwrap();
        if let Some(eps) = window.select(0.1) {
            prop_assert!(window.contains(eps));
            prop_assert!(nl.sup_h(m, m * spread, eps).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn operator_kills_constants_with_m_matrix_signs(s in space(), count in 8usize..80, c in -5.0..5.0f64) {
        let g = s.grid(count).unwrap();
        let op = s.operator(&g).unwrap();
        let lu = op.apply(&vec![c; g.count]).unwrap();
        let scale = op.diag().iter().fold(1.0f64, |a, d| a.max(d.abs()));
        for v in &lu {
            prop_assert!(v.abs() <= 1e-12 * scale * c.abs().max(1.0), "{v}");
        }
        for i in 0..op.len() {
            prop_assert!(op.lower()[i] >= 0.0 && op.upper()[i] >= 0.0);
            prop_assert!(op.diag()[i] <= 0.0);
        }
    }

    #[test]
    fn heat_flow_stays_positive_and_bounded(
        s in space(),
        seed in proptest::collection::vec(0.0..1.0f64, 24),
        dt in 0.001..0.05f64,
    ) {
        let g = s.grid(seed.len()).unwrap();
        let run = solve_parabolic(&s, &g, &Nonlinearity::Zero, &seed, &ParabolicOptions::new(0.0, 0.5, dt)).unwrap();
        let f = &run.field;
        let (lo0, hi0) = f.slice_range(0);
        let norm = hi0.abs().max(lo0.abs());
        for k in 1..f.n_times() {
            let (lo, hi) = f.slice_range(k);
            prop_assert!(lo >= -10.0 * f64::EPSILON * norm);
            prop_assert!(lo >= lo0 - 10.0 * f64::EPSILON * norm);
            prop_assert!(hi <= hi0 + 10.0 * f64::EPSILON * norm);
        }
    }

    #[test]
    fn allen_cahn_flow_is_odd(seed in proptest::collection::vec(-1.5..1.5f64, 20), dt in 0.005..0.05f64) {
        let s = ModelSpace::line(1, Weight::Zero, Domain::periodic(0.0, TAU)).unwrap();
        let g = s.grid(seed.len()).unwrap();
        let neg: Vec<f64> = seed.iter().map(|v| -v).collect();
        let opts = ParabolicOptions::new(0.0, 1.0, dt);
        let a = solve_parabolic(&s, &g, &Nonlinearity::AllenCahn, &seed, &opts).unwrap();
        let b = solve_parabolic(&s, &g, &Nonlinearity::AllenCahn, &neg, &opts).unwrap();
        for (p, q) in a.field.values().iter().zip(b.field.values()) {
            prop_assert_eq!(*p, -*q);
        }
    }

    #[test]
    fn snapshot_round_trip_is_bitwise(
        values in proptest::collection::vec(-1e6..1e6f64, 18),
        dt in 1e-4..1.0f64,
        t0 in -5.0..5.0f64,
    ) {
        let s = ModelSpace::line(1, Weight::Zero, Domain::neumann(-1.0, 1.0)).unwrap();
        let g = s.grid(6).unwrap();
        let field = dlab::solver::SpaceTimeField::new(s, g, t0, dt, values).unwrap();
        let mut bytes = Vec::new();
        write_snapshot(&field, &mut bytes).unwrap();
        let back = read_snapshot(bytes.as_slice()).unwrap();
        let want = Snapshot::of(&field);
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(&back.coords), bits(&want.coords));
        prop_assert_eq!(bits(&back.times), bits(&want.times));
        prop_assert_eq!(bits(&back.values), bits(&want.values));
    }

    #[test]
    fn report_json_round_trip_is_byte_identical(
        xs in proptest::collection::vec(-1e3..1e3f64, 16),
    ) {
        let report = EstimateReport {
            eps: xs[0], m: xs[1], big_m: xs[2], k: xs[3], alpha: xs[4], radius: xs[5],
            duration: xs[6], sup_h: xs[7], lhs_max: xs[8], bracket: xs[9], bracket_min: xs[10],
            c_empirical: xs[11], c_conservative: xs[12], lemma21_min_residual: xs[13],
            lemma21_tol_disc: xs[14], note: format!("n{}", xs[15]),
        };
        let text = report.to_json();
        let back: EstimateReport = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(&back, &report);
        prop_assert_eq!(back.to_json(), text);
    }

    #[test]
    fn exponent_format_parses_back(x in proptest::num::f64::NORMAL | proptest::num::f64::ZERO) {
        prop_assert_eq!(parse_number(&format!("{x:e}")), Some(x));
        prop_assert_eq!(parse_number(&format!("{x}")), Some(x));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn standing_solution_is_parabolic_fixed_point(n in 2usize..4, hi in 3.0..6.0f64, dt in 0.002..0.01f64) {
        // u ≡ 1 is a root of Allen–Cahn; Newton from a perturbed guess lands on it
        let s = ModelSpace::radial(n, Warp::Euclidean, Weight::Zero, Domain::neumann(0.0, hi)).unwrap();
        let g = s.grid(41).unwrap();
        let guess: Vec<f64> = g.coordinates().iter().map(|r| 1.0 + 0.05 * (r / hi).cos()).collect();
        let sol = solve_standing(&s, &g, &Nonlinearity::AllenCahn, &guess, &NewtonOptions::default()).unwrap();
        prop_assert!(sol.record.converged);
        let u = sol.field.last().to_vec();
        let run = solve_parabolic(&s, &g, &Nonlinearity::AllenCahn, &u, &ParabolicOptions::new(0.0, 100.0 * dt, dt)).unwrap();
        let bound = 10.0 * 1e-12 + 100.0 * dt * sol.record.residual_max;
        for (p, q) in run.field.last().iter().zip(&u) {
            prop_assert!((p - q).abs() <= bound, "{p} vs {q}, bound {bound}");
        }
    }

    #[test]
    fn log_flow_error_halves_with_dt(a in -1.5..-0.3f64, d in -1.0..-0.1f64) {
        let s = ModelSpace::line(1, Weight::Zero, Domain::periodic(0.0, 1.0)).unwrap();
        let g = s.grid(8).unwrap();
        let u0 = vec![d.exp(); g.count];
        let err = |dt: f64| {
            let f = solve_parabolic(&s, &g, &Nonlinearity::LogType { a }, &u0, &ParabolicOptions::new(0.0, 1.0, dt)).unwrap().field;
            (0..f.n_times())
                .map(|k| (f.value(0, k) - (d * (a * f.time(k)).exp()).exp()).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(0.01) / err(0.005);
        prop_assert!(ratio >= 1.9, "{ratio}");
    }
}
