//! Sensitivity-driven forecast refinement.
//!
//! Each iteration solves the robust problem, ranks the forecasts by their
//! multipliers, and asks an oracle to tighten the most valuable forecast it
//! is able to tighten. All other bounds stay fixed.

use crate::error::{Error, Result};
use crate::forecast::{DiscreteDistribution, ForecastSet};
use crate::sensitivity::{forecast_labels, rank_by_sensitivity, ForecastKind};
use crate::solver::{solve, ExchangeConfig, PlanningSolution};
use crate::utility::Utility;

/// Multipliers at or below this are never sent to the oracle.
pub const MIN_SENSITIVITY: f64 = 1e-8;

pub const DEFAULT_MAX_ITERATIONS: usize = 50;
pub const DEFAULT_IMPROVEMENT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleResponse {
    /// The refined bound; must not exceed the current one.
    NewEpsilon(f64),
    CannotRefine,
}

/// Source of refined forecasts.
pub trait RefinementOracle {
    fn refine(&mut self, forecast_index: usize, current_epsilon: f64) -> OracleResponse;
}

/// Moves a bound by a fixed `step` toward its true value, stopping `margin`
/// short of it.
#[derive(Debug, Clone, PartialEq)]
pub struct ClampedStepOracle {
    truth: DiscreteDistribution,
    true_values: Vec<f64>,
    step: f64,
    margin: f64,
}

impl ClampedStepOracle {
    pub fn new(truth: DiscreteDistribution, fs: &ForecastSet, step: f64, margin: f64) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::validation("step", format!("must be positive, got {step}")));
        }
        if !(margin >= 0.0) || !margin.is_finite() {
            return Err(Error::validation("margin", format!("must be nonnegative, got {margin}")));
        }
        let true_values = fs.expectations(&truth);
        Ok(Self { truth, true_values, step, margin })
    }

    pub fn truth(&self) -> &DiscreteDistribution {
        &self.truth
    }

    /// `E_truth[g_i]` for every forecast.
    pub fn true_values(&self) -> &[f64] {
        &self.true_values
    }
}

impl RefinementOracle for ClampedStepOracle {
    fn refine(&mut self, forecast_index: usize, current_epsilon: f64) -> OracleResponse {
        let Some(&t) = self.true_values.get(forecast_index) else {
            return OracleResponse::CannotRefine;
        };
        let floor = t + self.margin;
        if current_epsilon <= floor + 1e-12 {
            OracleResponse::CannotRefine
        } else {
            OracleResponse::NewEpsilon((current_epsilon - self.step).max(floor))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Refinement {
    pub index: usize,
    pub kind: ForecastKind,
    pub previous: f64,
    pub new_epsilon: f64,
}

/// State at iteration `k` and the refinement chosen there (none on the final record).
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub epsilons: Vec<f64>,
    pub objective: f64,
    pub b_star: f64,
    pub lambda: Vec<f64>,
    pub refinement: Option<Refinement>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminationReason {
    MaxIterations,
    NoRefinableForecast,
    ImprovementBelowTolerance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefinementTrace {
    pub iterations: Vec<IterationRecord>,
    pub termination_reason: TerminationReason,
    /// A refinement that was rolled back because it emptied the ambiguity set.
    pub rejected: Option<Refinement>,
}

impl RefinementTrace {
    pub fn objectives(&self) -> Vec<f64> {
        self.iterations.iter().map(|r| r.objective).collect()
    }

    pub fn last(&self) -> &IterationRecord {
        self.iterations.last().expect("a trace always holds the initial solve")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefineConfig {
    pub max_iterations: usize,
    pub improvement_tolerance: f64,
    pub exchange: ExchangeConfig,
}

impl Default for RefineConfig {
    fn default() -> Self {
        Self {
            max_iterations: DEFAULT_MAX_ITERATIONS,
            improvement_tolerance: DEFAULT_IMPROVEMENT_TOLERANCE,
            exchange: ExchangeConfig::default(),
        }
    }
}

fn record(iteration: usize, fs: &ForecastSet, sol: &PlanningSolution, refinement: Option<Refinement>) -> IterationRecord {
    IterationRecord {
        iteration,
        epsilons: fs.epsilons(),
        objective: sol.objective,
        b_star: sol.b_star,
        lambda: sol.lambda_star.clone(),
        refinement,
    }
}

pub fn refine_loop(
    fs: &ForecastSet,
    u: &Utility,
    oracle: &mut dyn RefinementOracle,
    cfg: &RefineConfig,
) -> Result<RefinementTrace> {
    let labels = forecast_labels(fs);
    let mut current_fs = fs.clone();
    let mut current = solve(&current_fs, u, &cfg.exchange)?;
    let mut iterations = Vec::new();
    let mut k = 0;

    loop {
        if k >= cfg.max_iterations {
            iterations.push(record(k, &current_fs, &current, None));
            return Ok(RefinementTrace { iterations, termination_reason: TerminationReason::MaxIterations, rejected: None });
        }

        let mut choice = None;
        for j in rank_by_sensitivity(&current.lambda_star) {
            if current.lambda_star[j] <= MIN_SENSITIVITY {
                break;
            }
            let previous = current_fs.constraints()[j].epsilon;
            match oracle.refine(j, previous) {
                OracleResponse::CannotRefine => continue,
                OracleResponse::NewEpsilon(v) if v > previous || v.is_nan() => {
                    return Err(Error::ContractViolation { index: j, current: previous, returned: v });
                }
                OracleResponse::NewEpsilon(v) => {
                    choice = Some(Refinement { index: j, kind: labels[j].0, previous, new_epsilon: v });
                    break;
                }
            }
        }
        let Some(step) = choice else {
            iterations.push(record(k, &current_fs, &current, None));
            return Ok(RefinementTrace {
                iterations,
                termination_reason: TerminationReason::NoRefinableForecast,
                rejected: None,
            });
        };

        let mut eps = current_fs.epsilons();
        eps[step.index] = step.new_epsilon;
        let next_fs = current_fs.with_epsilons(&eps)?;
        let next = match solve(&next_fs, u, &cfg.exchange) {
            Ok(s) => s,
            Err(Error::AmbiguitySetEmpty) => {
                iterations.push(record(k, &current_fs, &current, None));
                return Ok(RefinementTrace {
                    iterations,
                    termination_reason: TerminationReason::NoRefinableForecast,
                    rejected: Some(step),
                });
            }
            Err(e) => return Err(e),
        };

        iterations.push(record(k, &current_fs, &current, Some(step)));
        let improvement = next.objective - current.objective;
        current_fs = next_fs;
        current = next;
        k += 1;
        if improvement < cfg.improvement_tolerance {
            iterations.push(record(k, &current_fs, &current, None));
            return Ok(RefinementTrace {
                iterations,
                termination_reason: TerminationReason::ImprovementBelowTolerance,
                rejected: None,
            });
        }
    }
}
