//! Forecast values from dual multipliers.
//!
//! For any perturbation `Δε`, `P*(ε - Δε) ≥ P*(ε) + Σ λ*_i Δε_i`: the optimal
//! dual point stays feasible when the bounds move, because the bounds only
//! enter the dual objective. A large `λ*_i` marks forecast `i` as the one
//! whose refinement is guaranteed to pay off most.

use crate::error::{Error, Result};
use crate::forecast::{ConstraintFunction, ForecastSet};
use crate::solver::PlanningSolution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ForecastKind {
    /// Upper bound on an interval probability (an indicator forecast).
    UpperBound,
    /// Lower bound on an interval probability (a negated indicator forecast).
    LowerBound,
    Generic,
}

impl ForecastKind {
    pub fn of(g: &ConstraintFunction) -> Self {
        match g {
            ConstraintFunction::Indicator { .. } => ForecastKind::UpperBound,
            ConstraintFunction::NegIndicator { .. } => ForecastKind::LowerBound,
            _ => ForecastKind::Generic,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            ForecastKind::UpperBound => "upper",
            ForecastKind::LowerBound => "lower",
            ForecastKind::Generic => "generic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivityEntry {
    pub forecast_index: usize,
    pub kind: ForecastKind,
    /// Interval of a prediction-interval layout, when the set has one.
    pub interval_index: Option<usize>,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityReport {
    /// Sorted by `lambda` descending, ties by lowest forecast index.
    pub entries: Vec<SensitivityEntry>,
    pub base_objective: f64,
}

/// Kind and interval of every forecast in `fs`.
pub fn forecast_labels(fs: &ForecastSet) -> Vec<(ForecastKind, Option<usize>)> {
    let m = fs.interval_layout().map(|b| b.len() - 1);
    fs.constraints()
        .iter()
        .enumerate()
        .map(|(i, f)| (ForecastKind::of(&f.g), m.map(|m| i % m)))
        .collect()
}

/// Forecast indices ordered by decreasing `lambda`, ties by lowest index.
pub fn rank_by_sensitivity(lambda: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..lambda.len()).collect();
    order.sort_by(|&a, &b| lambda[b].total_cmp(&lambda[a]).then(a.cmp(&b)));
    order
}

pub fn sensitivities(sol: &PlanningSolution, fs: &ForecastSet) -> Result<SensitivityReport> {
    if sol.lambda_star.len() != fs.len() {
        return Err(Error::DimensionMismatch { expected: fs.len(), found: sol.lambda_star.len() });
    }
    let labels = forecast_labels(fs);
    let entries = rank_by_sensitivity(&sol.lambda_star)
        .into_iter()
        .map(|i| SensitivityEntry {
            forecast_index: i,
            kind: labels[i].0,
            interval_index: labels[i].1,
            lambda: sol.lambda_star[i],
        })
        .collect();
    Ok(SensitivityReport { entries, base_objective: sol.objective })
}

impl SensitivityReport {
    /// Multipliers in forecast order.
    pub fn lambda_by_index(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.entries.len()];
        for e in &self.entries {
            out[e.forecast_index] = e.lambda;
        }
        out
    }
}

/// Guaranteed lower bound on `P*(ε - Δε)`. Positive `Δε_i` tightens forecast `i`.
pub fn lower_bound_after_change(report: &SensitivityReport, delta_eps: &[f64]) -> Result<f64> {
    if delta_eps.len() != report.entries.len() {
        return Err(Error::DimensionMismatch { expected: report.entries.len(), found: delta_eps.len() });
    }
    Ok(report.base_objective + report.entries.iter().map(|e| e.lambda * delta_eps[e.forecast_index]).sum::<f64>())
}

/// A change to one prediction-interval bound, in probability units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundChange {
    /// Lower the upper bound of `interval` by `amount`.
    TightenUpper { interval: usize, amount: f64 },
    /// Raise the lower bound of `interval` by `amount`.
    RaiseLower { interval: usize, amount: f64 },
}

/// `Δε` for a prediction-interval set with `m` intervals in generic order.
pub fn interval_delta(m: usize, changes: &[BoundChange]) -> Result<Vec<f64>> {
    let mut delta = vec![0.0; 2 * m];
    for c in changes {
        let (interval, slot, amount) = match *c {
            BoundChange::TightenUpper { interval, amount } => (interval, interval, amount),
            BoundChange::RaiseLower { interval, amount } => (interval, m + interval, amount),
        };
        if interval >= m {
            return Err(Error::Precondition(format!("interval {interval} out of range for {m} intervals")));
        }
        // ε = δ̄ for upper bounds and ε = -δ̲ for lower bounds; both tighten
        // with a positive Δε.
        delta[slot] += amount;
    }
    Ok(delta)
}
