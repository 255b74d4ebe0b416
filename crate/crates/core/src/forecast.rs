//! Forecasts as constraints `E[g_i(x)] ≤ ε_i` on the distribution of a scalar
//! random quantity, plus the prediction-interval special case and the
//! strict-feasibility checks.

use crate::error::{Error, Result};
use crate::lp::{solve_lp, ConstraintSense, LinearProgram, LpResult, ObjectiveSense};

/// Offset used for atoms placed just left (and right) of indicator endpoints,
/// where half-open indicators change value.
pub const ENDPOINT_SHIFT: f64 = 1e-9;

/// Tolerance on the total mass of a [`DiscreteDistribution`].
pub const MASS_TOL: f64 = 1e-12;

/// The support `[lower, upper]` of the uncertain quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    lower: f64,
    upper: f64,
}

impl Domain {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !lower.is_finite() || !upper.is_finite() {
            return Err(Error::validation("domain", "bounds must be finite"));
        }
        if lower >= upper {
            return Err(Error::validation("domain", format!("lower {lower} must be below upper {upper}")));
        }
        Ok(Self { lower, upper })
    }

    pub fn unit() -> Self {
        Self { lower: 0.0, upper: 1.0 }
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lower && x <= self.upper
    }

    pub(crate) fn check(&self, what: &'static str, x: f64) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::OutOfDomain { what, value: x, lower: self.lower, upper: self.upper })
        }
    }

    /// `n ≥ 2` evenly spaced points including both ends.
    pub fn uniform_grid(&self, n: usize) -> Vec<f64> {
        uniform_points(self.lower, self.upper, n)
    }
}

pub(crate) fn uniform_points(lower: f64, upper: f64, n: usize) -> Vec<f64> {
    debug_assert!(n >= 2);
    let step = (upper - lower) / (n - 1) as f64;
    let mut pts: Vec<f64> = (0..n).map(|i| lower + step * i as f64).collect();
    pts[n - 1] = upper;
    pts
}

/// The function `g` in a forecast `E[g(x)] ≤ ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConstraintFunction {
    /// `1{lo ≤ x < hi}`, or `1{lo ≤ x ≤ hi}` when `closed_right`.
    Indicator { lo: f64, hi: f64, closed_right: bool },
    /// Negated indicator, used for lower bounds on interval probabilities.
    NegIndicator { lo: f64, hi: f64, closed_right: bool },
    /// `c0 + c1·x`
    Affine { c0: f64, c1: f64 },
    /// `x^k`
    Power { k: u32 },
    /// `-x^k`
    NegPower { k: u32 },
}

impl ConstraintFunction {
    /// Value at `x` without a domain check.
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            ConstraintFunction::Indicator { lo, hi, closed_right } => indicator(lo, hi, closed_right, x),
            ConstraintFunction::NegIndicator { lo, hi, closed_right } => -indicator(lo, hi, closed_right, x),
            ConstraintFunction::Affine { c0, c1 } => c0 + c1 * x,
            ConstraintFunction::Power { k } => x.powi(k as i32),
            ConstraintFunction::NegPower { k } => -x.powi(k as i32),
        }
    }

    pub fn evaluate(&self, domain: &Domain, x: f64) -> Result<f64> {
        domain.check("x", x)?;
        Ok(self.value(x))
    }

    /// Endpoints of the indicator interval, if any.
    pub fn interval(&self) -> Option<(f64, f64, bool)> {
        match *self {
            ConstraintFunction::Indicator { lo, hi, closed_right }
            | ConstraintFunction::NegIndicator { lo, hi, closed_right } => Some((lo, hi, closed_right)),
            _ => None,
        }
    }

    pub fn is_indicator(&self) -> bool {
        self.interval().is_some()
    }

    fn validate(&self, domain: &Domain, field: &str) -> Result<()> {
        match *self {
            ConstraintFunction::Indicator { lo, hi, .. } | ConstraintFunction::NegIndicator { lo, hi, .. } => {
                if !(lo.is_finite() && hi.is_finite()) || lo < domain.lower || hi > domain.upper || lo >= hi {
                    return Err(Error::validation(
                        field,
                        format!("indicator [{lo}, {hi}] must satisfy {} ≤ lo < hi ≤ {}", domain.lower, domain.upper),
                    ));
                }
            }
            ConstraintFunction::Affine { c0, c1 } => {
                if !(c0.is_finite() && c1.is_finite()) {
                    return Err(Error::validation(field, "affine coefficients must be finite"));
                }
            }
            ConstraintFunction::Power { k } | ConstraintFunction::NegPower { k } => {
                if k == 0 {
                    return Err(Error::validation(field, "power exponent must be at least 1"));
                }
            }
        }
        Ok(())
    }
}

fn indicator(lo: f64, hi: f64, closed_right: bool, x: f64) -> f64 {
    let inside = x >= lo && (x < hi || (closed_right && x == hi));
    if inside {
        1.0
    } else {
        0.0
    }
}

/// One forecast `E[g(x)] ≤ epsilon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Forecast {
    pub g: ConstraintFunction,
    pub epsilon: f64,
}

/// The ambiguity set: every distribution on `domain` satisfying all forecasts.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastSet {
    domain: Domain,
    constraints: Vec<Forecast>,
}

impl ForecastSet {
    pub fn new(domain: Domain, constraints: Vec<Forecast>) -> Result<Self> {
        for (i, f) in constraints.iter().enumerate() {
            f.g.validate(&domain, &format!("constraints[{i}].g"))?;
            if !f.epsilon.is_finite() {
                return Err(Error::validation(format!("constraints[{i}].epsilon"), "must be finite"));
            }
        }
        Ok(Self { domain, constraints })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn constraints(&self) -> &[Forecast] {
        &self.constraints
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn epsilons(&self) -> Vec<f64> {
        self.constraints.iter().map(|f| f.epsilon).collect()
    }

    /// Same constraint functions with new bounds.
    pub fn with_epsilons(&self, epsilons: &[f64]) -> Result<Self> {
        if epsilons.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), found: epsilons.len() });
        }
        let constraints = self
            .constraints
            .iter()
            .zip(epsilons)
            .map(|(f, &epsilon)| Forecast { g: f.g, epsilon })
            .collect();
        ForecastSet::new(self.domain, constraints)
    }

    /// `[g_1(x), …, g_n(x)]` without a domain check.
    pub fn g_values(&self, x: f64) -> Vec<f64> {
        self.constraints.iter().map(|f| f.g.value(x)).collect()
    }

    pub fn all_indicators(&self) -> bool {
        self.constraints.iter().all(|f| f.g.is_indicator())
    }

    /// `E[g_i]` under `dist`, for every forecast.
    pub fn expectations(&self, dist: &DiscreteDistribution) -> Vec<f64> {
        self.constraints.iter().map(|f| dist.expectation(|x| f.g.value(x))).collect()
    }

    /// Smallest slack `ε_i - E[g_i]` under `dist` (`+∞` with no constraints).
    pub fn min_slack(&self, dist: &DiscreteDistribution) -> f64 {
        self.expectations(dist)
            .iter()
            .zip(&self.constraints)
            .map(|(e, f)| f.epsilon - e)
            .fold(f64::INFINITY, f64::min)
    }

    /// Indicator endpoints plus their `±shift` neighbours and the domain ends,
    /// sorted and deduplicated, all inside the domain.
    pub fn critical_points(&self, shift: f64) -> Vec<f64> {
        let mut pts = vec![self.domain.lower, self.domain.upper];
        for f in &self.constraints {
            if let Some((lo, hi, _)) = f.g.interval() {
                for e in [lo, hi] {
                    pts.extend([e, e - shift, e + shift]);
                }
            }
        }
        pts.retain(|x| self.domain.contains(*x));
        sort_dedup(&mut pts);
        pts
    }

    /// If this set has exactly the shape produced by
    /// [`PredictionIntervals::to_generic`], the partition breakpoints.
    pub fn interval_layout(&self) -> Option<Vec<f64>> {
        let n = self.len();
        if n == 0 || n % 2 != 0 {
            return None;
        }
        let m = n / 2;
        let mut breakpoints = vec![self.domain.lower];
        for i in 0..m {
            let closed = i + 1 == m;
            let ConstraintFunction::Indicator { lo, hi, closed_right } = self.constraints[i].g else {
                return None;
            };
            let ConstraintFunction::NegIndicator { lo: nlo, hi: nhi, closed_right: ncr } = self.constraints[m + i].g
            else {
                return None;
            };
            if lo != breakpoints[i] || closed_right != closed || nlo != lo || nhi != hi || ncr != closed {
                return None;
            }
            breakpoints.push(hi);
        }
        (breakpoints[m] == self.domain.upper).then_some(breakpoints)
    }
}

pub(crate) fn sort_dedup(pts: &mut Vec<f64>) {
    pts.sort_by(|a, b| a.total_cmp(b));
    pts.dedup();
}

/// Interval-probability forecasts `δ̲_i ≤ P(x_{i-1} ≤ x < x_i) ≤ δ̄_i`.
///
/// The last interval is closed on the right so the partition covers the domain.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionIntervals {
    breakpoints: Vec<f64>,
    lower_probs: Vec<f64>,
    upper_probs: Vec<f64>,
}

impl PredictionIntervals {
    pub fn new(breakpoints: Vec<f64>, lower_probs: Vec<f64>, upper_probs: Vec<f64>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::validation("breakpoints", "need at least two breakpoints"));
        }
        let m = breakpoints.len() - 1;
        if lower_probs.len() != m {
            return Err(Error::validation("lower_probs", format!("expected {m} entries, got {}", lower_probs.len())));
        }
        if upper_probs.len() != m {
            return Err(Error::validation("upper_probs", format!("expected {m} entries, got {}", upper_probs.len())));
        }
        for (i, &x) in breakpoints.iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::validation(format!("breakpoints[{i}]"), "must be finite"));
            }
            if i > 0 && x <= breakpoints[i - 1] {
                return Err(Error::validation(format!("breakpoints[{i}]"), "breakpoints must be strictly increasing"));
            }
        }
        for i in 0..m {
            let (lo, hi) = (lower_probs[i], upper_probs[i]);
            if !(0.0..=1.0).contains(&lo) {
                return Err(Error::validation(format!("lower_probs[{i}]"), format!("{lo} is not in [0, 1]")));
            }
            if !(0.0..=1.0).contains(&hi) {
                return Err(Error::validation(format!("upper_probs[{i}]"), format!("{hi} is not in [0, 1]")));
            }
            if hi < lo {
                return Err(Error::validation(
                    format!("upper_probs[{i}]"),
                    format!("upper bound {hi} is below lower bound {lo}"),
                ));
            }
        }
        let sum_lo: f64 = lower_probs.iter().sum();
        let sum_hi: f64 = upper_probs.iter().sum();
        if sum_lo > 1.0 + MASS_TOL {
            return Err(Error::validation("lower_probs", format!("lower bounds sum to {sum_lo} > 1")));
        }
        if sum_hi < 1.0 - MASS_TOL {
            return Err(Error::validation("upper_probs", format!("upper bounds sum to {sum_hi} < 1")));
        }
        Ok(Self { breakpoints, lower_probs, upper_probs })
    }

    /// `m` equal-width intervals on `domain`.
    pub fn equal_width(domain: Domain, lower_probs: Vec<f64>, upper_probs: Vec<f64>) -> Result<Self> {
        let m = lower_probs.len().max(1);
        Self::new(domain.uniform_grid(m + 1), lower_probs, upper_probs)
    }

    pub fn domain(&self) -> Domain {
        Domain { lower: self.breakpoints[0], upper: self.breakpoints[self.breakpoints.len() - 1] }
    }

    pub fn num_intervals(&self) -> usize {
        self.lower_probs.len()
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn lower_probs(&self) -> &[f64] {
        &self.lower_probs
    }

    pub fn upper_probs(&self) -> &[f64] {
        &self.upper_probs
    }

    fn interval_fn(&self, i: usize) -> (f64, f64, bool) {
        (self.breakpoints[i], self.breakpoints[i + 1], i + 1 == self.num_intervals())
    }

    /// Generic form: upper bounds `(1_i, δ̄_i)` for every interval, then lower
    /// bounds `(-1_i, -δ̲_i)`.
    pub fn to_generic(&self) -> ForecastSet {
        let m = self.num_intervals();
        let mut constraints = Vec::with_capacity(2 * m);
        for i in 0..m {
            let (lo, hi, closed_right) = self.interval_fn(i);
            constraints.push(Forecast { g: ConstraintFunction::Indicator { lo, hi, closed_right }, epsilon: self.upper_probs[i] });
        }
        for i in 0..m {
            let (lo, hi, closed_right) = self.interval_fn(i);
            constraints.push(Forecast {
                g: ConstraintFunction::NegIndicator { lo, hi, closed_right },
                epsilon: -self.lower_probs[i],
            });
        }
        ForecastSet { domain: self.domain(), constraints }
    }

    /// Probability of each interval under `dist`.
    pub fn interval_probabilities(&self, dist: &DiscreteDistribution) -> Vec<f64> {
        (0..self.num_intervals())
            .map(|i| {
                let (lo, hi, cr) = self.interval_fn(i);
                dist.expectation(|x| indicator(lo, hi, cr, x))
            })
            .collect()
    }
}

/// A finitely supported probability distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    atoms: Vec<(f64, f64)>,
}

impl DiscreteDistribution {
    /// Atoms are `(location, probability)` pairs.
    pub fn new(domain: &Domain, atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::validation("atoms", "distribution needs at least one atom"));
        }
        let mut total = 0.0;
        for (i, &(x, p)) in atoms.iter().enumerate() {
            if !domain.contains(x) {
                return Err(Error::validation(format!("atoms[{i}]"), format!("location {x} outside the domain")));
            }
            if !(p >= 0.0) || !p.is_finite() {
                return Err(Error::validation(format!("atoms[{i}]"), format!("probability {p} must be nonnegative")));
            }
            total += p;
        }
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::validation("atoms", format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self { atoms })
    }

    pub fn dirac(domain: &Domain, x: f64) -> Result<Self> {
        Self::new(domain, vec![(x, 1.0)])
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn expectation(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.atoms.iter().map(|&(x, p)| p * f(x)).sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }
}

/// Outcome of [`strict_feasibility_slack`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FeasibilitySlack {
    /// The best achievable minimum slack `ζ*`; positive values certify strict feasibility.
    Slack(f64),
    /// No constraints, so the slack is unbounded.
    Unbounded,
    /// The slack LP itself was infeasible.
    Infeasible,
}

impl FeasibilitySlack {
    pub fn is_strictly_feasible(&self) -> bool {
        match *self {
            FeasibilitySlack::Slack(z) => z > 0.0,
            FeasibilitySlack::Unbounded => true,
            FeasibilitySlack::Infeasible => false,
        }
    }
}

/// Maximum over distributions supported on a grid of `min_i (ε_i - E[g_i])`.
///
/// The grid is `grid_size` uniform points augmented with every indicator
/// endpoint and its `±1e-9` neighbours.
pub fn strict_feasibility_slack(fs: &ForecastSet, grid_size: usize) -> Result<FeasibilitySlack> {
    if grid_size < 2 {
        return Err(Error::Precondition(format!("grid_size must be at least 2, got {grid_size}")));
    }
    if fs.is_empty() {
        return Ok(FeasibilitySlack::Unbounded);
    }
    let mut atoms = fs.domain.uniform_grid(grid_size);
    atoms.extend(fs.critical_points(ENDPOINT_SHIFT));
    sort_dedup(&mut atoms);

    // Variables: atom probabilities, then ζ (free).
    let k = atoms.len();
    let mut objective = vec![0.0; k + 1];
    objective[k] = 1.0;
    let mut lp = LinearProgram::new(ObjectiveSense::Maximize, objective);
    lp.set_bounds(k, f64::NEG_INFINITY, f64::INFINITY);
    let mut mass = vec![1.0; k + 1];
    mass[k] = 0.0;
    lp.add_constraint(mass, ConstraintSense::Eq, 1.0);
    for f in &fs.constraints {
        let mut row: Vec<f64> = atoms.iter().map(|&x| f.g.value(x)).collect();
        row.push(1.0);
        lp.add_constraint(row, ConstraintSense::Le, f.epsilon);
    }
    Ok(match solve_lp(&lp)? {
        LpResult::Optimal(s) => FeasibilitySlack::Slack(s.x[k]),
        LpResult::Infeasible => FeasibilitySlack::Infeasible,
        LpResult::Unbounded => FeasibilitySlack::Unbounded,
    })
}

/// Radius `min(ζ / (1 + |ε_i - ζ|), 1)` of a ball of bound vectors that all
/// keep the ambiguity set nonempty, given a strictly feasible distribution
/// with slack `zeta`.
pub fn feasibility_ball_radius(zeta: f64, epsilons: &[f64]) -> Result<f64> {
    if !(zeta > 0.0) {
        return Err(Error::Precondition(format!("slack must be positive, got {zeta}")));
    }
    Ok(epsilons.iter().map(|e| zeta / (1.0 + (e - zeta).abs())).fold(1.0, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn two_intervals() -> PredictionIntervals {
        PredictionIntervals::new(vec![0.0, 0.5, 1.0], vec![0.2, 0.3], vec![0.7, 0.8]).unwrap()
    }

    #[test]
    fn whole_domain_interval() {
        let pi = PredictionIntervals::new(vec![0.0, 1.0], vec![1.0], vec![1.0]).unwrap();
        let fs = pi.to_generic();
        assert_eq!(fs.len(), 2);
        assert_eq!(
            fs.constraints()[0],
            Forecast { g: ConstraintFunction::Indicator { lo: 0.0, hi: 1.0, closed_right: true }, epsilon: 1.0 }
        );
        assert_eq!(
            fs.constraints()[1],
            Forecast { g: ConstraintFunction::NegIndicator { lo: 0.0, hi: 1.0, closed_right: true }, epsilon: -1.0 }
        );
    }

    #[test]
    fn generic_ordering_and_half_open_boundary() {
        let fs = two_intervals().to_generic();
        assert_eq!(fs.epsilons(), vec![0.7, 0.8, -0.2, -0.3]);
        let d = fs.domain();
        assert_eq!(fs.constraints()[0].g.evaluate(d, 0.5).unwrap(), 0.0);
        assert_eq!(fs.constraints()[1].g.evaluate(d, 0.5).unwrap(), 1.0);
        // last interval includes the right end of the domain
        assert_eq!(fs.constraints()[1].g.evaluate(d, 1.0).unwrap(), 1.0);
        assert_eq!(fs.interval_layout(), Some(vec![0.0, 0.5, 1.0]));
    }

    #[test]
    fn evaluate_examples() {
        let d = Domain::unit();
        assert_eq!(ConstraintFunction::Affine { c0: 0.0, c1: 1.0 }.evaluate(&d, 0.5).unwrap(), 0.5);
        assert_eq!(ConstraintFunction::Power { k: 2 }.evaluate(&d, 0.5).unwrap(), 0.25);
        assert_eq!(ConstraintFunction::NegPower { k: 3 }.evaluate(&d, 0.5).unwrap(), -0.125);
        let neg = ConstraintFunction::NegIndicator { lo: 0.0, hi: 0.5, closed_right: false };
        assert_eq!(neg.evaluate(&d, 0.25).unwrap(), -1.0);
        assert!(matches!(neg.evaluate(&d, 1.5), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn validation_names_the_offending_index() {
        let err = PredictionIntervals::new(vec![0.0, 0.5, 1.0], vec![0.6, 0.3], vec![0.5, 0.8]).unwrap_err();
        assert!(err.to_string().contains("upper_probs[0]"), "{err}");
        let err = PredictionIntervals::new(vec![0.0, 0.5, 1.0], vec![0.6, 0.6], vec![0.9, 0.9]).unwrap_err();
        assert!(err.to_string().contains("lower_probs"), "{err}");
        let err = PredictionIntervals::new(vec![0.0, 0.5, 0.5], vec![0.0, 0.0], vec![1.0, 1.0]).unwrap_err();
        assert!(err.to_string().contains("breakpoints[2]"), "{err}");
        let err = PredictionIntervals::new(vec![0.0, 0.5, 1.0], vec![0.0, -0.1], vec![1.0, 1.0]).unwrap_err();
        assert!(err.to_string().contains("lower_probs[1]"), "{err}");
    }

    #[test]
    fn indicator_must_respect_domain() {
        let bad = Forecast { g: ConstraintFunction::Indicator { lo: -0.5, hi: 0.5, closed_right: false }, epsilon: 1.0 };
        assert!(ForecastSet::new(Domain::unit(), vec![bad]).is_err());
        let bad = Forecast { g: ConstraintFunction::Power { k: 0 }, epsilon: 1.0 };
        assert!(ForecastSet::new(Domain::unit(), vec![bad]).is_err());
    }

    #[test]
    fn slack_of_tight_single_interval_is_zero() {
        let pi = PredictionIntervals::new(vec![0.0, 1.0], vec![0.0], vec![1.0]).unwrap();
        let slack = strict_feasibility_slack(&pi.to_generic(), 16).unwrap();
        let FeasibilitySlack::Slack(z) = slack else { panic!("{slack:?}") };
        assert_abs_diff_eq!(z, 0.0, epsilon = 1e-12);
        assert!(!slack.is_strictly_feasible());
    }

    #[test]
    fn slack_of_two_intervals() {
        // P1 ∈ [0.2 + ζ, 0.7 - ζ] ∩ [0.2 + ζ, 0.7 - ζ] is nonempty iff ζ ≤ 0.25.
        let slack = strict_feasibility_slack(&two_intervals().to_generic(), 16).unwrap();
        let FeasibilitySlack::Slack(z) = slack else { panic!("{slack:?}") };
        assert_abs_diff_eq!(z, 0.25, epsilon = 1e-12);
    }

    #[test]
    fn slack_without_constraints_is_unbounded() {
        let fs = ForecastSet::new(Domain::unit(), vec![]).unwrap();
        assert_eq!(strict_feasibility_slack(&fs, 4).unwrap(), FeasibilitySlack::Unbounded);
        assert!(strict_feasibility_slack(&fs, 1).is_err());
    }

    #[test]
    fn ball_radius_examples() {
        assert_eq!(feasibility_ball_radius(1.0, &[1.0]).unwrap(), 1.0);
        let r = feasibility_ball_radius(0.25, &[0.7, 0.8, -0.2, -0.3]).unwrap();
        assert_abs_diff_eq!(r, 0.25 / 1.55, epsilon = 1e-12);
        assert_abs_diff_eq!(feasibility_ball_radius(10.0, &[0.0]).unwrap(), 10.0 / 11.0, epsilon = 1e-15);
        assert_eq!(feasibility_ball_radius(10.0, &[5.0]).unwrap(), 1.0);
        assert!(feasibility_ball_radius(0.0, &[0.0]).is_err());
    }

    #[test]
    fn distribution_validation() {
        let d = Domain::unit();
        assert!(DiscreteDistribution::new(&d, vec![(0.5, 0.5)]).is_err());
        assert!(DiscreteDistribution::new(&d, vec![(1.5, 1.0)]).is_err());
        assert!(DiscreteDistribution::new(&d, vec![(0.5, 1.5), (0.2, -0.5)]).is_err());
        assert!(DiscreteDistribution::new(&d, vec![(0.25, 0.3), (0.75, 0.7)]).is_ok());
    }

    fn arb_distribution() -> impl Strategy<Value = DiscreteDistribution> {
        prop::collection::vec((0.0..=1.0f64, 0.01..1.0f64), 1..12).prop_map(|atoms| {
            let total: f64 = atoms.iter().map(|a| a.1).sum();
            let mut atoms: Vec<(f64, f64)> = atoms.into_iter().map(|(x, p)| (x, p / total)).collect();
            // put the rounding residue on the first atom
            let residue = 1.0 - atoms.iter().map(|a| a.1).sum::<f64>();
            atoms[0].1 += residue;
            DiscreteDistribution::new(&Domain::unit(), atoms).unwrap()
        })
    }

    proptest! {
        #[test]
        fn indicator_masses_partition_unity(dist in arb_distribution(), m in 1usize..8) {
            let pi = PredictionIntervals::equal_width(Domain::unit(), vec![0.0; m], vec![1.0; m]).unwrap();
            let fs = pi.to_generic();
            let e = fs.expectations(&dist);
            for i in 0..m {
                let others: f64 = (0..m).filter(|&j| j != i).map(|j| e[j]).sum();
                prop_assert!((e[i] + others - 1.0).abs() <= 1e-12);
                prop_assert_eq!(e[m + i], -e[i]);
            }
        }

        #[test]
        fn slack_dominates_any_grid_distribution(weights in prop::collection::vec(0.01..1.0f64, 9)) {
            // atoms on the uniform 9-point grid, which the checker also uses
            let total: f64 = weights.iter().sum();
            let atoms: Vec<(f64, f64)> = Domain::unit().uniform_grid(9).into_iter()
                .zip(&weights).map(|(x, w)| (x, w / total)).collect();
            let dist = DiscreteDistribution::new(&Domain::unit(), atoms).unwrap();
            let fs = two_intervals().to_generic();
            let s = fs.min_slack(&dist);
            let FeasibilitySlack::Slack(z) = strict_feasibility_slack(&fs, 9).unwrap() else { unreachable!() };
            prop_assert!(z >= s - 1e-9);
        }

        #[test]
        fn ball_radius_is_monotone_in_slack(
            z1 in 1e-3..5.0f64,
            dz in 0.0..5.0f64,
            eps in prop::collection::vec(-2.0..2.0f64, 1..6),
        ) {
            let r1 = feasibility_ball_radius(z1, &eps).unwrap();
            let r2 = feasibility_ball_radius(z1 + dz, &eps).unwrap();
            prop_assert!(r2 >= r1 - 1e-15);
        }
    }
}
