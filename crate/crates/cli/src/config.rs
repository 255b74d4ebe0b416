//! Scenario files: JSON on disk, validated into core types on load.

use std::path::Path;

use planwise::forecast::{ConstraintFunction, Forecast};
use planwise::{
    AffinePiece, DiscreteDistribution, Domain, ExchangeConfig, ForecastSet, GridSpec, PredictionIntervals, Utility,
};
use serde::Deserialize;

use crate::error::CliError;

/// Slack below which the configured truth counts as violating a forecast.
const TRUTH_TOL: f64 = 1e-9;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub domain: Bounds,
    pub decision: Bounds,
    pub utility: UtilityConfig,
    pub forecasts: ForecastConfig,
    #[serde(default)]
    pub truth: Option<TruthConfig>,
    #[serde(default)]
    pub oracle: Option<OracleConfig>,
    #[serde(default)]
    pub solver: SolverConfig,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum UtilityConfig {
    MarketBidding { p: f64, q: f64 },
    /// Rows `[a, c, d]` of `min_k (a + c·x + d·b)`.
    PiecewiseAffineMin { pieces: Vec<[f64; 3]> },
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ForecastConfig {
    PredictionIntervals {
        /// Equal-width intervals on the domain when omitted.
        #[serde(default)]
        breakpoints: Option<Vec<f64>>,
        lower_probs: Vec<f64>,
        upper_probs: Vec<f64>,
    },
    Generic {
        constraints: Vec<ConstraintConfig>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintConfig {
    pub g: FunctionConfig,
    pub epsilon: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionConfig {
    Indicator {
        lo: f64,
        hi: f64,
        #[serde(default)]
        closed_right: bool,
    },
    NegIndicator {
        lo: f64,
        hi: f64,
        #[serde(default)]
        closed_right: bool,
    },
    Affine {
        c0: f64,
        c1: f64,
    },
    Power {
        k: u32,
    },
    NegPower {
        k: u32,
    },
}

impl From<FunctionConfig> for ConstraintFunction {
    fn from(g: FunctionConfig) -> Self {
        match g {
            FunctionConfig::Indicator { lo, hi, closed_right } => ConstraintFunction::Indicator { lo, hi, closed_right },
            FunctionConfig::NegIndicator { lo, hi, closed_right } => {
                ConstraintFunction::NegIndicator { lo, hi, closed_right }
            }
            FunctionConfig::Affine { c0, c1 } => ConstraintFunction::Affine { c0, c1 },
            FunctionConfig::Power { k } => ConstraintFunction::Power { k },
            FunctionConfig::NegPower { k } => ConstraintFunction::NegPower { k },
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruthConfig {
    /// `[location, probability]` pairs.
    pub atoms: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum OracleConfig {
    ClampedStep { step: f64, margin: f64 },
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub initial_grid_points: Option<usize>,
    pub search_grid_points: Option<usize>,
    pub max_rounds: Option<usize>,
    pub violation_tolerance: Option<f64>,
    pub improvement_tolerance: Option<f64>,
    /// Base points of the brute-force grid used by `check`.
    pub brute_force_points: Option<usize>,
}

/// A validated scenario.
#[derive(Debug)]
pub struct Scenario {
    pub forecasts: ForecastSet,
    pub utility: Utility,
    pub truth: Option<DiscreteDistribution>,
    /// `None` without a truth; otherwise whether it satisfies every forecast.
    pub truth_consistent: Option<bool>,
    pub oracle: Option<OracleConfig>,
    pub exchange: ExchangeConfig,
    pub improvement_tolerance: f64,
    pub grid: GridSpec,
    pub warnings: Vec<String>,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: ScenarioConfig = serde_json::from_str(text)?;
        Self::from_config(cfg)
    }

    pub fn from_config(cfg: ScenarioConfig) -> Result<Self, CliError> {
        let domain = Domain::new(cfg.domain.lower, cfg.domain.upper).map_err(|e| CliError::from_config("domain", e))?;
        let utility = build_utility(&cfg.utility, cfg.decision)?;
        let forecasts = build_forecasts(cfg.forecasts, domain)?;

        let mut warnings = Vec::new();
        let (truth, truth_consistent) = match cfg.truth {
            None => (None, None),
            Some(t) => {
                let atoms = t.atoms.iter().map(|a| (a[0], a[1])).collect();
                let dist = DiscreteDistribution::new(&domain, atoms).map_err(|e| CliError::from_config("truth", e))?;
                let violated: Vec<usize> = forecasts
                    .expectations(&dist)
                    .iter()
                    .zip(forecasts.constraints())
                    .enumerate()
                    .filter(|(_, (e, f))| **e > f.epsilon + TRUTH_TOL)
                    .map(|(i, _)| i)
                    .collect();
                if !violated.is_empty() {
                    warnings.push(format!("truth violates forecasts {violated:?}"));
                }
                (Some(dist), Some(violated.is_empty()))
            }
        };

        if let Some(OracleConfig::ClampedStep { step, margin }) = cfg.oracle {
            if !(step > 0.0 && step.is_finite()) {
                return Err(CliError::config("oracle.step", format!("must be positive, got {step}")));
            }
            if !(margin >= 0.0 && margin.is_finite()) {
                return Err(CliError::config("oracle.margin", format!("must be nonnegative, got {margin}")));
            }
        }

        let defaults = ExchangeConfig::default();
        let s = &cfg.solver;
        let exchange = ExchangeConfig {
            initial_grid_points: s.initial_grid_points.unwrap_or(defaults.initial_grid_points),
            violation_tolerance: s.violation_tolerance.unwrap_or(defaults.violation_tolerance),
            max_rounds: s.max_rounds.unwrap_or(defaults.max_rounds),
            search_grid_points: s.search_grid_points.unwrap_or(defaults.search_grid_points),
        };
        exchange.validate().map_err(|e| CliError::from_config("solver", e))?;
        let improvement_tolerance = s.improvement_tolerance.unwrap_or(planwise::refine::DEFAULT_IMPROVEMENT_TOLERANCE);
        if !(improvement_tolerance >= 0.0 && improvement_tolerance.is_finite()) {
            return Err(CliError::config("solver.improvement_tolerance", "must be nonnegative"));
        }
        let mut grid = GridSpec::default();
        if let Some(n) = s.brute_force_points {
            grid.base_points = n;
        }
        grid.validate(&forecasts).map_err(|e| CliError::from_config("solver", e))?;

        Ok(Scenario {
            forecasts,
            utility,
            truth,
            truth_consistent,
            oracle: cfg.oracle,
            exchange,
            improvement_tolerance,
            grid,
            warnings,
        })
    }
}

fn build_utility(cfg: &UtilityConfig, decision: Bounds) -> Result<Utility, CliError> {
    let u = match cfg {
        UtilityConfig::MarketBidding { p, q } => Utility::market_bidding(*p, *q, decision.lower, decision.upper),
        UtilityConfig::PiecewiseAffineMin { pieces } => Utility::new(
            pieces.iter().map(|r| AffinePiece::new(r[0], r[1], r[2])).collect(),
            decision.lower,
            decision.upper,
        ),
    };
    u.map_err(|e| match e {
        planwise::Error::Validation { field, reason } if field == "decision" => CliError::config("decision", reason),
        other => CliError::from_config("utility", other),
    })
}

fn build_forecasts(cfg: ForecastConfig, domain: Domain) -> Result<ForecastSet, CliError> {
    match cfg {
        ForecastConfig::PredictionIntervals { breakpoints, lower_probs, upper_probs } => {
            let pi = match breakpoints {
                Some(bp) => {
                    let ends = (bp.first().copied(), bp.last().copied());
                    if ends != (Some(domain.lower()), Some(domain.upper())) {
                        return Err(CliError::config(
                            "forecasts.breakpoints",
                            format!("must start at {} and end at {}", domain.lower(), domain.upper()),
                        ));
                    }
                    PredictionIntervals::new(bp, lower_probs, upper_probs)
                }
                None => PredictionIntervals::equal_width(domain, lower_probs, upper_probs),
            }
            .map_err(|e| CliError::from_config("forecasts", e))?;
            Ok(pi.to_generic())
        }
        ForecastConfig::Generic { constraints } => {
            let cs = constraints.into_iter().map(|c| Forecast { g: c.g.into(), epsilon: c.epsilon }).collect();
            ForecastSet::new(domain, cs).map_err(|e| CliError::from_config("forecasts", e))
        }
    }
}
