//! Robust planning: maximize over decisions `b` the worst-case expected
//! utility over every distribution consistent with the forecasts.
//!
//! The max-min problem is solved through its Lagrangian dual
//!
//! ```text
//! maximize_{b, λ ≥ 0, η}   -Σ λ_i ε_i - η
//! subject to               J(x, b) + Σ λ_i g_i(x) + η ≥ 0   for all x in the domain
//! ```
//!
//! which has the same optimal value. For prediction intervals the
//! semi-infinite constraint collapses to the interval endpoints, because
//! `J(·, b)` is concave and the indicators are constant on each interval; for
//! general forecasts the constraint is handled by an exchange (cutting-plane)
//! method over a finite working set of points. Each concave constraint
//! `J(x, b) + … ≥ 0` becomes one linear row per affine piece of `J`.

mod exchange;

use rayon::prelude::*;

use crate::brute_force::{brute_force_worst_case, GridSpec};
use crate::error::{Error, Result};
use crate::forecast::{uniform_points, DiscreteDistribution, ForecastSet, PredictionIntervals};
use crate::lp::{solve_lp, ConstraintSense, LinearProgram, LpResult, ObjectiveSense};
use crate::utility::Utility;

pub use exchange::solve_generic;

/// Optimal decision and dual certificate of a robust planning problem.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanningSolution {
    /// Robustly optimal decision `b*`.
    pub b_star: f64,
    /// One multiplier per forecast, ordered like the forecast set.
    pub lambda_star: Vec<f64>,
    pub eta_star: f64,
    /// `P* = -Σ λ*_i ε_i - η*`.
    pub objective: f64,
    /// Largest violation of the dual constraint found on the search grid
    /// (zero for the exact finite reductions).
    pub residual: f64,
    pub worst_case_distribution: Option<DiscreteDistribution>,
}

impl PlanningSolution {
    /// Attach the worst-case distribution at `b*`, computed by the
    /// discretized primal.
    pub fn with_worst_case(mut self, fs: &ForecastSet, u: &Utility, grid: &GridSpec) -> Result<Self> {
        let (_, worst) = brute_force_worst_case(fs, u, self.b_star, grid)?;
        self.worst_case_distribution = Some(worst);
        Ok(self)
    }

    /// `J(x, b*) + Σ λ*_i g_i(x) + η*`, which is nonnegative everywhere at a
    /// dual-feasible point.
    pub fn dual_slack(&self, fs: &ForecastSet, u: &Utility, x: f64) -> f64 {
        dual_slack(fs, u, self.b_star, &self.lambda_star, self.eta_star, x)
    }
}

/// Settings for the exchange method used with non-interval forecasts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExchangeConfig {
    pub initial_grid_points: usize,
    pub violation_tolerance: f64,
    pub max_rounds: usize,
    pub search_grid_points: usize,
}

impl Default for ExchangeConfig {
    fn default() -> Self {
        Self { initial_grid_points: 64, violation_tolerance: 1e-7, max_rounds: 100, search_grid_points: 10_000 }
    }
}

impl ExchangeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.initial_grid_points < 2 {
            return Err(Error::validation("initial_grid_points", "must be at least 2"));
        }
        if self.search_grid_points < 2 {
            return Err(Error::validation("search_grid_points", "must be at least 2"));
        }
        if self.max_rounds == 0 {
            return Err(Error::validation("max_rounds", "must be positive"));
        }
        if !(self.violation_tolerance > 0.0) {
            return Err(Error::validation("violation_tolerance", "must be positive"));
        }
        Ok(())
    }
}

/// Worst-case expected utility at a fixed decision, with its dual certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct WorstCase {
    pub value: f64,
    pub lambda: Vec<f64>,
    pub eta: f64,
}

pub(crate) fn dual_slack(fs: &ForecastSet, u: &Utility, b: f64, lambda: &[f64], eta: f64, x: f64) -> f64 {
    let penalty: f64 = fs.constraints().iter().zip(lambda).map(|(f, l)| l * f.g.value(x)).sum();
    u.value(x, b) + penalty + eta
}

/// One semi-infinite constraint instance: `J(x, b) + λ·g + η ≥ 0`.
pub(crate) struct DualRow {
    pub x: f64,
    pub g: Vec<f64>,
}

pub(crate) struct DualPoint {
    pub b: f64,
    pub lambda: Vec<f64>,
    pub eta: f64,
    pub objective: f64,
}

/// Solve the finite dual LP over `rows`, with `b` restricted to `b_range`
/// and, optionally, every multiplier capped at `lambda_cap`.
pub(crate) fn solve_dual(
    rows: &[DualRow],
    epsilons: &[f64],
    u: &Utility,
    b_range: (f64, f64),
    lambda_cap: Option<f64>,
) -> Result<DualPoint> {
    let n = epsilons.len();
    // Variables: b, λ_1..λ_n, η.
    let eta = n + 1;
    let mut objective = vec![0.0; n + 2];
    for (i, e) in epsilons.iter().enumerate() {
        objective[1 + i] = -e;
    }
    objective[eta] = -1.0;
    let mut lp = LinearProgram::new(ObjectiveSense::Maximize, objective);
    lp.set_bounds(0, b_range.0, b_range.1);
    if let Some(cap) = lambda_cap {
        for i in 0..n {
            lp.set_bounds(1 + i, 0.0, cap);
        }
    }
    lp.set_bounds(eta, f64::NEG_INFINITY, f64::INFINITY);
    for r in rows {
        for piece in u.pieces() {
            let mut coeffs = vec![0.0; n + 2];
            coeffs[0] = piece.d;
            coeffs[1..=n].copy_from_slice(&r.g);
            coeffs[eta] = 1.0;
            lp.add_constraint(coeffs, ConstraintSense::Ge, -piece.a - piece.c * r.x);
        }
    }
    match solve_lp(&lp)? {
        LpResult::Optimal(s) => {
            let b = s.x[0].clamp(b_range.0, b_range.1);
            let lambda: Vec<f64> = s.x[1..=n].iter().map(|l| l.max(0.0)).collect();
            // adding 0.0 turns a negative zero into a positive one
            let eta = s.x[eta] + 0.0;
            let objective = -lambda.iter().zip(epsilons).map(|(l, e)| l * e).sum::<f64>() - eta + 0.0;
            Ok(DualPoint { b, lambda, eta, objective })
        }
        // The dual is unbounded exactly when the discretized primal has no
        // feasible distribution.
        LpResult::Unbounded => Err(Error::AmbiguitySetEmpty),
        LpResult::Infeasible => Err(Error::Internal("dual LP infeasible; η can always be raised".into())),
    }
}

/// Endpoint rows for a partition: at both ends of interval `i` the
/// multipliers of interval `i` apply (the right end as a left limit).
fn interval_rows(breakpoints: &[f64]) -> Vec<DualRow> {
    let m = breakpoints.len() - 1;
    let mut rows = Vec::with_capacity(2 * m);
    for i in 0..m {
        let mut g = vec![0.0; 2 * m];
        g[i] = 1.0;
        g[m + i] = -1.0;
        rows.push(DualRow { x: breakpoints[i], g: g.clone() });
        rows.push(DualRow { x: breakpoints[i + 1], g });
    }
    rows
}

/// Exact rows for an arbitrary set of indicator forecasts: every endpoint
/// with its own value, plus both ends of each open cell between endpoints
/// with the cell's constant value.
fn cell_rows(fs: &ForecastSet) -> Vec<DualRow> {
    let pts = fs.critical_points(0.0);
    let mut rows = Vec::with_capacity(3 * pts.len());
    for &p in &pts {
        rows.push(DualRow { x: p, g: fs.g_values(p) });
    }
    for w in pts.windows(2) {
        let inside = fs.g_values(0.5 * (w[0] + w[1]));
        rows.push(DualRow { x: w[0], g: inside.clone() });
        rows.push(DualRow { x: w[1], g: inside });
    }
    rows
}

fn into_solution(p: DualPoint, residual: f64) -> PlanningSolution {
    PlanningSolution {
        b_star: p.b,
        lambda_star: p.lambda,
        eta_star: p.eta,
        objective: p.objective,
        residual,
        worst_case_distribution: None,
    }
}

/// Exact robust plan for prediction-interval forecasts.
///
/// `lambda_star` is ordered like [`PredictionIntervals::to_generic`]: upper
/// bound multipliers `λ̄_1..λ̄_m`, then lower bound multipliers `λ̲_1..λ̲_m`.
pub fn solve_prediction_intervals(pi: &PredictionIntervals, u: &Utility) -> Result<PlanningSolution> {
    let fs = pi.to_generic();
    solve_interval_layout(&fs, pi.breakpoints(), u)
}

fn solve_interval_layout(fs: &ForecastSet, breakpoints: &[f64], u: &Utility) -> Result<PlanningSolution> {
    let rows = interval_rows(breakpoints);
    let p = solve_dual(&rows, &fs.epsilons(), u, u.decision_bounds(), None)?;
    Ok(into_solution(p, 0.0))
}

/// Robust plan for any forecast set: the exact endpoint reduction when the
/// set is a prediction-interval layout, the exact cell reduction when every
/// forecast is an indicator, and the exchange method otherwise.
pub fn solve(fs: &ForecastSet, u: &Utility, cfg: &ExchangeConfig) -> Result<PlanningSolution> {
    if let Some(breakpoints) = fs.interval_layout() {
        solve_interval_layout(fs, &breakpoints, u)
    } else if fs.all_indicators() {
        let p = solve_dual(&cell_rows(fs), &fs.epsilons(), u, u.decision_bounds(), None)?;
        Ok(into_solution(p, 0.0))
    } else {
        solve_generic(fs, u, cfg)
    }
}

/// Worst-case expected utility `min_{F} E_F J(x, b)` at a fixed decision,
/// computed through the dual with `b` pinned.
pub fn worst_case_value(fs: &ForecastSet, u: &Utility, b: f64) -> Result<WorstCase> {
    worst_case_value_with(fs, u, b, &ExchangeConfig::default())
}

pub fn worst_case_value_with(fs: &ForecastSet, u: &Utility, b: f64, cfg: &ExchangeConfig) -> Result<WorstCase> {
    u.check_decision(b)?;
    let p = if fs.all_indicators() {
        solve_dual(&cell_rows(fs), &fs.epsilons(), u, (b, b), None)?
    } else {
        exchange::run(fs, u, (b, b), cfg)?.0
    };
    Ok(WorstCase { value: p.objective, lambda: p.lambda, eta: p.eta })
}

/// Worst-case value at `grid_size` evenly spaced decisions spanning the
/// decision bounds.
pub fn sweep(fs: &ForecastSet, u: &Utility, grid_size: usize) -> Result<Vec<(f64, f64)>> {
    sweep_with(fs, u, grid_size, &ExchangeConfig::default())
}

pub fn sweep_with(fs: &ForecastSet, u: &Utility, grid_size: usize, cfg: &ExchangeConfig) -> Result<Vec<(f64, f64)>> {
    if grid_size < 2 {
        return Err(Error::Precondition(format!("grid_size must be at least 2, got {grid_size}")));
    }
    let (lo, hi) = u.decision_bounds();
    uniform_points(lo, hi, grid_size)
        .into_par_iter()
        .map(|b| worst_case_value_with(fs, u, b, cfg).map(|w| (b, w.value)))
        .collect()
}

/// Expected utility under a known distribution.
pub fn true_expected(truth: &DiscreteDistribution, u: &Utility, b: f64) -> Result<f64> {
    u.check_decision(b)?;
    Ok(truth.expectation(|x| u.value(x, b)))
}
