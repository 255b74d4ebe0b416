//! Property checks on the solver, the brute-force oracle and the refinement loop.

use planwise::sensitivity::rank_by_sensitivity;
use planwise::*;
use proptest::prelude::*;

fn arb_intervals() -> impl Strategy<Value = PredictionIntervals> {
    (2usize..6)
        .prop_flat_map(|m| (prop::collection::vec(0.05..1.0f64, m), prop::collection::vec((0.0..0.3f64, 0.0..0.3f64), m)))
        .prop_map(|(weights, widths)| {
            let total: f64 = weights.iter().sum();
            let lower = weights.iter().zip(&widths).map(|(w, (l, _))| (w / total - l).max(0.0)).collect();
            let upper = weights.iter().zip(&widths).map(|(w, (_, h))| (w / total + h).min(1.0)).collect();
            PredictionIntervals::equal_width(Domain::unit(), lower, upper).unwrap()
        })
}

fn arb_market() -> impl Strategy<Value = Utility> {
    (0.1..2.0f64, 0.05..1.0f64).prop_map(|(p, extra)| Utility::market_bidding(p, p + extra, 0.0, 1.0).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn brute_force_plan_never_beats_the_dual(pi in arb_intervals(), u in arb_market()) {
        let fs = pi.to_generic();
        let sol = solve_prediction_intervals(&pi, &u).unwrap();
        let (_, value) = brute_force_plan(&fs, &u, 21, &GridSpec::default()).unwrap();
        prop_assert!(value <= sol.objective + 1e-8);
    }

    #[test]
    fn worst_distribution_is_admissible(pi in arb_intervals(), u in arb_market(), b in 0.0..=1.0f64) {
        let fs = pi.to_generic();
        let (value, worst) = brute_force_worst_case(&fs, &u, b, &GridSpec::default()).unwrap();
        prop_assert!((worst.total_mass() - 1.0).abs() <= 1e-12);
        for (e, f) in fs.expectations(&worst).iter().zip(fs.constraints()) {
            prop_assert!(*e <= f.epsilon + 1e-9);
        }
        prop_assert!((worst.expectation(|x| u.value(x, b)) - value).abs() <= 1e-9);
    }

    #[test]
    fn tightening_never_lowers_the_objective(pi in arb_intervals(), u in arb_market(), j in 0usize..12, t in 0.0..0.05f64) {
        let fs = pi.to_generic();
        let j = j % fs.len();
        let base = solve(&fs, &u, &ExchangeConfig::default()).unwrap();
        let mut eps = fs.epsilons();
        eps[j] -= t;
        match solve(&fs.with_epsilons(&eps).unwrap(), &u, &ExchangeConfig::default()) {
            Ok(s) => prop_assert!(s.objective >= base.objective - 1e-9),
            Err(Error::AmbiguitySetEmpty) => {}
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }

    #[test]
    fn objective_scales_with_the_utility(pi in arb_intervals(), u in arb_market(), alpha in 0.1..10.0f64) {
        let base = solve_prediction_intervals(&pi, &u).unwrap();
        let scaled = solve_prediction_intervals(&pi, &u.scaled(alpha).unwrap()).unwrap();
        prop_assert!((scaled.objective - alpha * base.objective).abs() <= 1e-8 * (1.0 + alpha));
    }

    #[test]
    fn report_repeats_solver_multipliers(pi in arb_intervals(), u in arb_market()) {
        let fs = pi.to_generic();
        let sol = solve_prediction_intervals(&pi, &u).unwrap();
        let report = sensitivities(&sol, &fs).unwrap();
        prop_assert_eq!(report.lambda_by_index(), sol.lambda_star.clone());
        let order: Vec<usize> = report.entries.iter().map(|e| e.forecast_index).collect();
        prop_assert_eq!(order, rank_by_sensitivity(&sol.lambda_star));
        prop_assert_eq!(lower_bound_after_change(&report, &vec![0.0; fs.len()]).unwrap(), sol.objective);
    }

    #[test]
    fn oracle_stays_on_the_safe_side(weights in prop::collection::vec(0.05..1.0f64, 6), step in 0.01..0.2f64, margin in 0.0..0.05f64) {
        let total: f64 = weights.iter().sum();
        let atoms: Vec<(f64, f64)> = weights.iter().enumerate().map(|(k, w)| (k as f64 / 5.0, w / total)).collect();
        let truth = DiscreteDistribution::new(&Domain::unit(), atoms).unwrap();
        let pi = PredictionIntervals::equal_width(Domain::unit(), vec![0.0; 3], vec![1.0; 3]).unwrap();
        let fs = pi.to_generic();
        let mut oracle = ClampedStepOracle::new(truth.clone(), &fs, step, margin).unwrap();
        let mut eps = fs.epsilons();
        for _ in 0..40 {
            for (i, e) in eps.iter_mut().enumerate() {
                if let OracleResponse::NewEpsilon(v) = oracle.refine(i, *e) {
                    prop_assert!(v <= *e);
                    *e = v;
                }
            }
        }
        prop_assert!(fs.with_epsilons(&eps).unwrap().min_slack(&truth) >= -1e-12);
    }
}

#[test]
fn worst_case_distribution_attaches_at_the_optimum() {
    let pi = PredictionIntervals::new(vec![0.0, 0.5, 1.0], vec![0.0, 0.6], vec![0.4, 1.0]).unwrap();
    let u = Utility::market_bidding(1.0, 1.6, 0.0, 1.0).unwrap();
    let fs = pi.to_generic();
    let sol = solve_prediction_intervals(&pi, &u).unwrap().with_worst_case(&fs, &u, &GridSpec::default()).unwrap();
    let worst = sol.worst_case_distribution.as_ref().unwrap();
    assert!((worst.expectation(|x| u.value(x, sol.b_star)) - sol.objective).abs() <= 1e-9);
}

#[test]
fn mean_pinned_gap_through_the_exchange_path() {
    use planwise::forecast::{ConstraintFunction, Forecast};
    let fs = ForecastSet::new(
        Domain::unit(),
        vec![
            Forecast { g: ConstraintFunction::Affine { c0: 0.0, c1: 1.0 }, epsilon: 0.5 },
            Forecast { g: ConstraintFunction::Affine { c0: 0.0, c1: -1.0 }, epsilon: -0.5 },
        ],
    )
    .unwrap();
    let u = Utility::market_bidding(1.0, 1.6, 0.0, 1.0).unwrap();
    assert!(duality_gap(&fs, &u, 1.0, &GridSpec::default()).unwrap() <= 1e-3);
}
