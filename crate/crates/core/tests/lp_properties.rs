use planwise::lp::{solve_lp, ConstraintSense, LinearProgram, LpResult, ObjectiveSense};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random bounded LP that is feasible by construction: every constraint
/// holds at `anchor` with some margin.
#[derive(Debug, Clone)]
struct Case {
    lp: LinearProgram,
    seed: u64,
}

fn arb_case() -> impl Strategy<Value = Case> {
    (2usize..5, 1usize..7, any::<bool>(), any::<u64>()).prop_map(|(n, m, maximize, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let objective: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let sense = if maximize { ObjectiveSense::Maximize } else { ObjectiveSense::Minimize };
        let mut lp = LinearProgram::new(sense, objective);
        for j in 0..n {
            lp.set_bounds(j, -1.0, 1.0);
        }
        let anchor: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
        for _ in 0..m {
            let row: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let at: f64 = row.iter().zip(&anchor).map(|(a, x)| a * x).sum();
            let margin = rng.gen_range(0.1..2.0);
            if rng.gen_bool(0.5) {
                lp.add_constraint(row, ConstraintSense::Le, at + margin);
            } else {
                lp.add_constraint(row, ConstraintSense::Ge, at - margin);
            }
        }
        Case { lp, seed }
    })
}

fn feasible_samples(lp: &LinearProgram, seed: u64, want: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut out = Vec::new();
    for _ in 0..200_000 {
        if out.len() == want {
            break;
        }
        let x: Vec<f64> = (0..lp.num_vars()).map(|j| rng.gen_range(lp.lower[j]..=lp.upper[j])).collect();
        if lp.max_violation(&x) <= 0.0 {
            out.push(x);
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn optimum_dominates_sampled_feasible_points(case in arb_case()) {
        let LpResult::Optimal(sol) = solve_lp(&case.lp).unwrap() else {
            panic!("feasible bounded problem not solved to optimality");
        };
        for (i, row) in case.lp.rows.iter().enumerate() {
            let lhs: f64 = row.iter().zip(&sol.x).map(|(a, x)| a * x).sum();
            let v = match case.lp.senses[i] {
                ConstraintSense::Le => lhs - case.lp.rhs[i],
                ConstraintSense::Ge => case.lp.rhs[i] - lhs,
                ConstraintSense::Eq => (lhs - case.lp.rhs[i]).abs(),
            };
            prop_assert!(v <= 1e-9, "row {} violated by {}", i, v);
        }
        for (j, x) in sol.x.iter().enumerate() {
            prop_assert!(*x >= case.lp.lower[j] - 1e-9 && *x <= case.lp.upper[j] + 1e-9);
        }
        for x in feasible_samples(&case.lp, case.seed, 100) {
            let f = case.lp.objective_at(&x);
            match case.lp.sense {
                ObjectiveSense::Maximize => prop_assert!(sol.objective >= f - 1e-8),
                ObjectiveSense::Minimize => prop_assert!(sol.objective <= f + 1e-8),
            }
        }
    }

    #[test]
    fn resolve_is_bitwise_identical(case in arb_case()) {
        let a = solve_lp(&case.lp).unwrap();
        let b = solve_lp(&case.lp).unwrap();
        let bits = |r: &LpResult| r.solution().map(|s| s.x.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        prop_assert_eq!(bits(&a), bits(&b));
    }
}

#[test]
fn degenerate_vertex_with_many_tight_rows() {
    // twelve constraints through the optimum (1, 1)
    let mut lp = LinearProgram::new(ObjectiveSense::Maximize, vec![1.0, 1.0]);
    for k in 0..12 {
        let t = 0.1 + 0.8 * k as f64 / 11.0;
        lp.add_constraint(vec![t, 1.0 - t], ConstraintSense::Le, 1.0);
    }
    let LpResult::Optimal(sol) = solve_lp(&lp).unwrap() else { panic!() };
    assert!((sol.objective - 2.0).abs() <= 1e-9);
    assert!(lp.max_violation(&sol.x) <= 1e-9);
}
