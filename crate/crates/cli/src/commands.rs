//! One function per subcommand. Each returns the full text to emit so the
//! caller decides between stdout and `--out`.

use planwise::refine::{refine_loop, RefineConfig};
use planwise::sensitivity::forecast_labels;
use planwise::{
    duality_gap_with, feasibility_ball_radius, lower_bound_after_change, sensitivities, solve, strict_feasibility_slack,
    sweep_with, true_expected, ClampedStepOracle, Domain, FeasibilitySlack, ForecastKind,
};
use serde::Serialize;

use crate::config::{OracleConfig, Scenario};
use crate::error::CliError;

/// Decisions at which `check` compares the dual and brute-force values.
const CHECK_POINTS: usize = 21;

#[derive(Serialize)]
struct LambdaEntry {
    index: usize,
    kind: &'static str,
    interval: Option<usize>,
    value: f64,
}

#[derive(Serialize)]
struct SolveOutput {
    b_star: f64,
    objective: f64,
    lambda: Vec<LambdaEntry>,
    eta: f64,
}

pub fn solve_cmd(s: &Scenario) -> Result<String, CliError> {
    let sol = solve(&s.forecasts, &s.utility, &s.exchange)?;
    let labels = forecast_labels(&s.forecasts);
    let lambda = sol
        .lambda_star
        .iter()
        .zip(&labels)
        .enumerate()
        .map(|(index, (&value, &(kind, interval)))| LambdaEntry { index, kind: kind.as_str(), interval, value })
        .collect();
    let out = SolveOutput { b_star: sol.b_star, objective: sol.objective, lambda, eta: sol.eta_star };
    Ok(to_json(&out))
}

pub fn sweep_cmd(s: &Scenario, grid: usize) -> Result<String, CliError> {
    if grid < 2 {
        return Err(CliError::config("--grid", format!("must be at least 2, got {grid}")));
    }
    let rows = sweep_with(&s.forecasts, &s.utility, grid, &s.exchange)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["b", "worst_case"];
    if s.truth.is_some() {
        header.push("true_expected");
    }
    w.write_record(&header).map_err(csv_bug)?;
    for (b, worst) in rows {
        let mut rec = vec![b.to_string(), worst.to_string()];
        if let Some(t) = &s.truth {
            rec.push(true_expected(t, &s.utility, b)?.to_string());
        }
        w.write_record(&rec).map_err(csv_bug)?;
    }
    finish_csv(w)
}

#[derive(Serialize)]
struct SensitivityEntryOut {
    forecast_index: usize,
    kind: &'static str,
    interval: Option<usize>,
    lambda: f64,
    /// Guaranteed objective after tightening only this forecast by `delta`.
    predicted_bound: f64,
}

#[derive(Serialize)]
struct SensitivityOutput {
    base_objective: f64,
    b_star: f64,
    delta: f64,
    entries: Vec<SensitivityEntryOut>,
}

pub fn sensitivity_cmd(s: &Scenario, delta: f64) -> Result<String, CliError> {
    if !delta.is_finite() {
        return Err(CliError::config("--delta", format!("must be finite, got {delta}")));
    }
    let sol = solve(&s.forecasts, &s.utility, &s.exchange)?;
    let report = sensitivities(&sol, &s.forecasts)?;
    let n = s.forecasts.len();
    let mut entries = Vec::with_capacity(n);
    for e in &report.entries {
        let mut d = vec![0.0; n];
        d[e.forecast_index] = delta;
        entries.push(SensitivityEntryOut {
            forecast_index: e.forecast_index,
            kind: e.kind.as_str(),
            interval: e.interval_index,
            lambda: e.lambda,
            predicted_bound: lower_bound_after_change(&report, &d)?,
        });
    }
    let out = SensitivityOutput { base_objective: report.base_objective, b_star: sol.b_star, delta, entries };
    Ok(to_json(&out))
}

/// Bound value as users write it: lower bounds are stored negated.
fn user_bound(kind: ForecastKind, epsilon: f64) -> f64 {
    match kind {
        ForecastKind::LowerBound => -epsilon,
        ForecastKind::UpperBound | ForecastKind::Generic => epsilon,
    }
}

pub fn refine_cmd(s: &Scenario, iters: usize) -> Result<(String, String), CliError> {
    let Some(truth) = &s.truth else {
        return Err(CliError::config("truth", "refine needs a truth distribution for the oracle"));
    };
    let Some(OracleConfig::ClampedStep { step, margin }) = s.oracle else {
        return Err(CliError::config("oracle", "refine needs an oracle"));
    };
    let mut oracle = ClampedStepOracle::new(truth.clone(), &s.forecasts, step, margin)
        .map_err(|e| CliError::from_config("oracle", e))?;
    let cfg = RefineConfig { max_iterations: iters, improvement_tolerance: s.improvement_tolerance, exchange: s.exchange };
    let trace = refine_loop(&s.forecasts, &s.utility, &mut oracle, &cfg)?;

    let n = s.forecasts.len();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> =
        ["iter", "refined_index", "refined_kind", "new_bound", "objective", "b_star"].map(String::from).to_vec();
    header.extend((0..n).map(|i| format!("lambda_{i}")));
    w.write_record(&header).map_err(csv_bug)?;
    for r in &trace.iterations {
        let mut rec = vec![r.iteration.to_string()];
        match r.refinement {
            Some(step) => {
                rec.push(step.index.to_string());
                rec.push(step.kind.as_str().to_string());
                rec.push(user_bound(step.kind, step.new_epsilon).to_string());
            }
            None => rec.extend([String::new(), String::new(), String::new()]),
        }
        rec.push(r.objective.to_string());
        rec.push(r.b_star.to_string());
        rec.extend(r.lambda.iter().map(|l| l.to_string()));
        w.write_record(&rec).map_err(csv_bug)?;
    }
    let note = format!(
        "refinement stopped after {} refinements: {:?}",
        trace.iterations.len() - 1,
        trace.termination_reason
    );
    Ok((finish_csv(w)?, note))
}

#[derive(Serialize)]
struct CheckOutput {
    duality_gap_max: f64,
    /// `None` when the slack is unbounded (no forecasts) or the set is empty.
    strict_feasibility_slack: Option<f64>,
    feasibility_status: &'static str,
    /// Present only for strictly feasible sets.
    feasibility_ball_radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    truth_consistent: Option<bool>,
}

pub fn check_cmd(s: &Scenario) -> Result<String, CliError> {
    let slack = strict_feasibility_slack(&s.forecasts, s.grid.base_points)?;
    let (value, status) = match slack {
        FeasibilitySlack::Slack(z) if z > 0.0 => (Some(z), "strict"),
        FeasibilitySlack::Slack(z) => (Some(z), "not_strict"),
        FeasibilitySlack::Unbounded => (None, "unconstrained"),
        FeasibilitySlack::Infeasible => (None, "infeasible"),
    };
    let radius = match value {
        Some(z) if z > 0.0 => Some(feasibility_ball_radius(z, &s.forecasts.epsilons())?),
        _ => None,
    };
    let (lo, hi) = s.utility.decision_bounds();
    let mut gap: f64 = 0.0;
    for b in Domain::new(lo, hi)?.uniform_grid(CHECK_POINTS) {
        gap = gap.max(duality_gap_with(&s.forecasts, &s.utility, b, &s.grid, &s.exchange)?);
    }
    let out = CheckOutput {
        duality_gap_max: gap,
        strict_feasibility_slack: value,
        feasibility_status: status,
        feasibility_ball_radius: radius,
        truth_consistent: s.truth_consistent,
    };
    Ok(to_json(&out))
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("output types serialize");
    s.push('\n');
    s
}

fn csv_bug(e: csv::Error) -> CliError {
    // Writing into memory cannot fail for I/O reasons.
    CliError::Solver(planwise::Error::Internal(format!("csv encoding failed: {e}")))
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String, CliError> {
    let bytes = w.into_inner().map_err(|e| csv_bug(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv of ascii fields is utf-8"))
}
