//! Robust planning under probabilistic forecasts.
//!
//! Forecasts about a scalar random quantity `x` are read as constraints
//! `E[g_i(x)] ≤ ε_i` on its unknown distribution. Given a concave utility
//! `J(x, b)`, the planner picks the decision `b` that maximizes the worst-case
//! expected utility over every distribution consistent with the forecasts.
//!
//! * [`solver`] computes the robust decision through the Lagrangian dual,
//!   exactly for prediction intervals and by an exchange method otherwise.
//! * [`sensitivity`] turns the dual multipliers into per-forecast values
//!   with a guaranteed lower bound on the objective after a forecast changes.
//! * [`refine`] repeatedly asks an oracle to tighten the most valuable forecast.
//! * [`brute_force`] solves the discretized primal as an independent check.
//!
//! ```
//! use planwise::{solve_prediction_intervals, PredictionIntervals, Utility};
//!
//! let forecasts = PredictionIntervals::new(vec![0.0, 0.5, 1.0], vec![0.0, 0.6], vec![0.4, 1.0]).unwrap();
//! let profit = Utility::market_bidding(1.0, 1.6, 0.0, 1.0).unwrap();
//! let plan = solve_prediction_intervals(&forecasts, &profit).unwrap();
//! assert!((plan.b_star - 0.5).abs() < 1e-9);
//! assert!((plan.objective - 0.18).abs() < 1e-9);
//! ```

pub mod brute_force;
pub mod error;
pub mod forecast;
pub mod lp;
pub mod refine;
pub mod sensitivity;
pub mod solver;
pub mod utility;

pub use brute_force::{brute_force_plan, brute_force_worst_case, duality_gap, duality_gap_with, GridSpec};
pub use error::{Error, Result};
pub use forecast::{
    feasibility_ball_radius, strict_feasibility_slack, ConstraintFunction, DiscreteDistribution, Domain,
    FeasibilitySlack, Forecast, ForecastSet, PredictionIntervals,
};
pub use refine::{
    refine_loop, ClampedStepOracle, OracleResponse, RefineConfig, RefinementOracle, RefinementTrace,
    TerminationReason,
};
pub use sensitivity::{lower_bound_after_change, sensitivities, ForecastKind, SensitivityReport};
pub use solver::{
    solve, solve_generic, solve_prediction_intervals, sweep, sweep_with, true_expected, worst_case_value,
    worst_case_value_with, ExchangeConfig, PlanningSolution, WorstCase,
};
pub use utility::{AffinePiece, Utility};
