//! Exchange method for the semi-infinite dual.
//!
//! A finite working set of points stands in for "for all x". After each LP
//! solve the dense search grid is scanned for the most violated constraint,
//! and that point joins the working set.

use super::{dual_slack, into_solution, solve_dual, DualPoint, DualRow, ExchangeConfig, PlanningSolution};
use crate::brute_force::{brute_force_worst_case, GridSpec};
use crate::error::{Error, Result};
use crate::forecast::{sort_dedup, ForecastSet, ENDPOINT_SHIFT};
use crate::utility::Utility;

/// Multipliers are boxed so every working-set LP is bounded, even while the
/// working set is too small to pin them down.
const LAMBDA_CAP: f64 = 1e4;

/// Robust plan for arbitrary forecasts via the exchange method.
pub fn solve_generic(fs: &ForecastSet, u: &Utility, cfg: &ExchangeConfig) -> Result<PlanningSolution> {
    let (point, residual) = run(fs, u, u.decision_bounds(), cfg)?;
    Ok(into_solution(point, residual))
}

pub(super) fn run(fs: &ForecastSet, u: &Utility, b_range: (f64, f64), cfg: &ExchangeConfig) -> Result<(DualPoint, f64)> {
    cfg.validate()?;
    let domain = fs.domain();
    let epsilons = fs.epsilons();

    let mut working = fs.critical_points(ENDPOINT_SHIFT);
    working.extend(domain.uniform_grid(cfg.initial_grid_points));
    let b_mid = 0.5 * (b_range.0 + b_range.1);
    for b in [b_range.0, b_mid, b_range.1] {
        working.extend(u.kinks_in_x(domain, b));
    }
    sort_dedup(&mut working);

    let mut search = domain.uniform_grid(cfg.search_grid_points);
    search.extend(fs.critical_points(ENDPOINT_SHIFT));
    sort_dedup(&mut search);

    let mut rows: Vec<DualRow> = working.iter().map(|&x| DualRow { x, g: fs.g_values(x) }).collect();
    let mut last: Option<(DualPoint, f64)> = None;
    for _ in 0..cfg.max_rounds {
        let point = solve_dual(&rows, &epsilons, u, b_range, Some(LAMBDA_CAP))?;
        let kinks = u.kinks_in_x(domain, point.b);
        let (worst_x, violation) = search
            .iter()
            .chain(&kinks)
            .map(|&x| (x, -dual_slack(fs, u, point.b, &point.lambda, point.eta, x)))
            .fold((f64::NAN, f64::NEG_INFINITY), |acc, c| if c.1 > acc.1 { c } else { acc });
        let residual = violation.max(0.0);
        if violation <= cfg.violation_tolerance {
            if point.lambda.iter().any(|&l| l >= 0.5 * LAMBDA_CAP) {
                // Either the dual is unbounded (no distribution satisfies the
                // forecasts) or the multipliers really are this large; the
                // discretized primal tells the two apart.
                let grid = GridSpec { base_points: cfg.search_grid_points, ..GridSpec::default() };
                brute_force_worst_case(fs, u, point.b, &grid)?;
                return Err(Error::ConvergenceFailure {
                    rounds: cfg.max_rounds,
                    residual,
                    best: Box::new(into_solution(point, residual)),
                });
            }
            return Ok((point, residual));
        }
        rows.push(DualRow { x: worst_x, g: fs.g_values(worst_x) });
        last = Some((point, residual));
    }
    let (point, residual) = last.expect("at least one round");
    Err(Error::ConvergenceFailure {
        rounds: cfg.max_rounds,
        residual,
        best: Box::new(into_solution(point, residual)),
    })
}
