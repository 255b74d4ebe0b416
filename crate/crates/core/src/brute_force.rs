//! Discretized primal: the worst-case distribution as an LP over atom
//! probabilities on a fixed grid.
//!
//! This is an independent route to the worst-case value. It never looks at
//! dual variables, so comparing it with [`crate::solver::worst_case_value`]
//! checks strong duality numerically.

use crate::error::{Error, Result};
use crate::forecast::{sort_dedup, DiscreteDistribution, ForecastSet};
use crate::lp::{solve_lp, ConstraintSense, LinearProgram, LpResult, ObjectiveSense};
use crate::solver::worst_case_value_with;
use crate::solver::ExchangeConfig;
use crate::utility::Utility;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub base_points: usize,
    /// Offset of the atoms placed beside every indicator endpoint.
    pub epsilon_shift: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { base_points: 512, epsilon_shift: 1e-9 }
    }
}

impl GridSpec {
    pub fn validate(&self, fs: &ForecastSet) -> Result<()> {
        if self.base_points < 2 {
            return Err(Error::validation("base_points", "must be at least 2"));
        }
        if !(self.epsilon_shift > 0.0) {
            return Err(Error::validation("epsilon_shift", "must be positive"));
        }
        let narrowest = fs
            .constraints()
            .iter()
            .filter_map(|f| f.g.interval())
            .map(|(lo, hi, _)| hi - lo)
            .fold(f64::INFINITY, f64::min);
        if self.epsilon_shift >= narrowest {
            return Err(Error::validation(
                "epsilon_shift",
                format!("{} is not below the narrowest interval width {narrowest}", self.epsilon_shift),
            ));
        }
        Ok(())
    }

    /// Atom locations: uniform grid, indicator endpoints with their shifted
    /// neighbours, and the kinks of `J(·, b)`.
    pub fn atoms(&self, fs: &ForecastSet, u: &Utility, b: f64) -> Vec<f64> {
        let domain = fs.domain();
        let mut pts = domain.uniform_grid(self.base_points);
        pts.extend(fs.critical_points(self.epsilon_shift));
        pts.extend(u.kinks_in_x(domain, b));
        sort_dedup(&mut pts);
        pts
    }
}

/// Minimum expected utility at decision `b` over distributions supported on
/// the grid, and a minimizing distribution.
pub fn brute_force_worst_case(
    fs: &ForecastSet,
    u: &Utility,
    b: f64,
    grid: &GridSpec,
) -> Result<(f64, DiscreteDistribution)> {
    grid.validate(fs)?;
    u.check_decision(b)?;
    let atoms = grid.atoms(fs, u, b);
    let k = atoms.len();

    let cost: Vec<f64> = atoms.iter().map(|&x| u.value(x, b)).collect();
    let mut lp = LinearProgram::new(ObjectiveSense::Minimize, cost);
    lp.add_constraint(vec![1.0; k], ConstraintSense::Eq, 1.0);
    for f in fs.constraints() {
        lp.add_constraint(atoms.iter().map(|&x| f.g.value(x)).collect(), ConstraintSense::Le, f.epsilon);
    }
    let sol = match solve_lp(&lp)? {
        LpResult::Optimal(s) => s,
        LpResult::Infeasible => return Err(Error::AmbiguitySetEmpty),
        LpResult::Unbounded => return Err(Error::Internal("expected utility over a simplex is bounded".into())),
    };
    let support: Vec<(f64, f64)> = atoms.iter().zip(&sol.x).filter(|(_, &p)| p > 0.0).map(|(&x, &p)| (x, p)).collect();
    let worst = DiscreteDistribution::new(fs.domain(), support)
        .map_err(|e| Error::Internal(format!("worst-case distribution is not a probability distribution: {e}")))?;
    Ok((sol.objective, worst))
}

/// Exhaustive outer maximization over `b_grid` evenly spaced decisions.
/// Ties resolve to the lowest decision.
pub fn brute_force_plan(fs: &ForecastSet, u: &Utility, b_grid: usize, grid: &GridSpec) -> Result<(f64, f64)> {
    if b_grid < 2 {
        return Err(Error::Precondition(format!("b_grid must be at least 2, got {b_grid}")));
    }
    let (lo, hi) = u.decision_bounds();
    let mut best = (lo, f64::NEG_INFINITY);
    for b in crate::forecast::uniform_points(lo, hi, b_grid) {
        let (value, _) = brute_force_worst_case(fs, u, b, grid)?;
        if value > best.1 + 1e-12 {
            best = (b, value);
        }
    }
    Ok(best)
}

/// `|primal - dual|` worst-case value at decision `b`.
pub fn duality_gap(fs: &ForecastSet, u: &Utility, b: f64, grid: &GridSpec) -> Result<f64> {
    duality_gap_with(fs, u, b, grid, &ExchangeConfig::default())
}

pub fn duality_gap_with(fs: &ForecastSet, u: &Utility, b: f64, grid: &GridSpec, cfg: &ExchangeConfig) -> Result<f64> {
    let (primal, _) = brute_force_worst_case(fs, u, b, grid)?;
    let dual = worst_case_value_with(fs, u, b, cfg)?;
    Ok((primal - dual.value).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forecast::{ConstraintFunction, Domain, Forecast, PredictionIntervals};
    use crate::utility::AffinePiece;
    use approx::assert_abs_diff_eq;

    fn market() -> Utility {
        Utility::market_bidding(1.0, 1.6, 0.0, 1.0).unwrap()
    }

    fn two(lo: [f64; 2], hi: [f64; 2]) -> ForecastSet {
        PredictionIntervals::new(vec![0.0, 0.5, 1.0], lo.to_vec(), hi.to_vec()).unwrap().to_generic()
    }

    fn mean_pinned() -> ForecastSet {
        ForecastSet::new(
            Domain::unit(),
            vec![
                Forecast { g: ConstraintFunction::Affine { c0: 0.0, c1: 1.0 }, epsilon: 0.5 },
                Forecast { g: ConstraintFunction::Affine { c0: 0.0, c1: -1.0 }, epsilon: -0.5 },
            ],
        )
        .unwrap()
    }

    fn assert_feasible(fs: &ForecastSet, dist: &DiscreteDistribution) {
        assert!((dist.total_mass() - 1.0).abs() <= 1e-12);
        for (e, f) in fs.expectations(dist).iter().zip(fs.constraints()) {
            assert!(*e <= f.epsilon + 1e-9, "{e} > {}", f.epsilon);
        }
    }

    #[test]
    fn worst_case_distribution_of_tight_instance() {
        let fs = two([0.2, 0.3], [0.7, 0.8]);
        let (value, worst) = brute_force_worst_case(&fs, &market(), 0.5, &GridSpec::default()).unwrap();
        assert_abs_diff_eq!(value, -0.06, epsilon = 1e-9);
        assert_feasible(&fs, &worst);
        // 0.7 sits at x = 0, the remaining 0.3 anywhere in [0.5, 1] where J = 0.5
        let at_zero: f64 = worst.atoms().iter().filter(|a| a.0 == 0.0).map(|a| a.1).sum();
        assert_abs_diff_eq!(at_zero, 0.7, epsilon = 1e-9);
        assert!(worst.atoms().iter().all(|a| a.0 == 0.0 || a.0 >= 0.5));
    }

    #[test]
    fn vacuous_worst_case_is_dirac_at_zero() {
        let fs = two([0.0, 0.0], [1.0, 1.0]);
        let (value, worst) = brute_force_worst_case(&fs, &market(), 0.5, &GridSpec::default()).unwrap();
        assert_abs_diff_eq!(value, -0.3, epsilon = 1e-12);
        assert_eq!(worst.atoms(), &[(0.0, 1.0)]);
    }

    #[test]
    fn forced_distribution() {
        // all mass pinned to [0.5, 1]; J(·, 0.8) is smallest at the left end 0.5
        let fs = two([0.0, 1.0], [0.0, 1.0]);
        let u = market();
        let (value, _) = brute_force_worst_case(&fs, &u, 0.8, &GridSpec::default()).unwrap();
        assert_abs_diff_eq!(value, u.value(0.5, 0.8), epsilon = 1e-12);
    }

    #[test]
    fn plans_by_exhaustion() {
        let g = GridSpec::default();
        let (b, v) = brute_force_plan(&mean_pinned(), &market(), 101, &g).unwrap();
        assert_abs_diff_eq!(b, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v, 0.2, epsilon = 1e-9);

        let (b, v) = brute_force_plan(&two([0.0, 0.6], [0.4, 1.0]), &market(), 101, &g).unwrap();
        assert_abs_diff_eq!(b, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(v, 0.18, epsilon = 1e-8);

        let (b, v) = brute_force_plan(&two([0.0, 0.0], [1.0, 1.0]), &market(), 101, &g).unwrap();
        assert_eq!(b, 0.0);
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn duality_gaps_on_desk_instances() {
        let g = GridSpec::default();
        let u = market();
        for fs in [two([0.2, 0.3], [0.7, 0.8]), two([0.0, 0.6], [0.4, 1.0]), two([0.0, 0.0], [1.0, 1.0])] {
            for b in [0.0, 0.5, 1.0] {
                assert!(duality_gap(&fs, &u, b, &g).unwrap() <= 1e-6);
            }
        }
        assert!(duality_gap(&mean_pinned(), &u, 1.0, &g).unwrap() <= 1e-3);
    }

    #[test]
    fn constant_utility_has_no_gap() {
        let u = Utility::new(vec![AffinePiece::new(2.5, 0.0, 0.0)], 0.0, 1.0).unwrap();
        let fs = two([0.2, 0.3], [0.7, 0.8]);
        let g = GridSpec::default();
        let (primal, _) = brute_force_worst_case(&fs, &u, 0.3, &g).unwrap();
        assert_eq!(primal, 2.5);
        assert_eq!(duality_gap(&fs, &u, 0.3, &g).unwrap(), 0.0);
    }

    #[test]
    fn grid_validation() {
        let fs = two([0.2, 0.3], [0.7, 0.8]);
        assert!(GridSpec { base_points: 1, epsilon_shift: 1e-9 }.validate(&fs).is_err());
        assert!(GridSpec { base_points: 8, epsilon_shift: 0.0 }.validate(&fs).is_err());
        assert!(GridSpec { base_points: 8, epsilon_shift: 0.6 }.validate(&fs).is_err());
    }

    #[test]
    fn empty_set_is_reported() {
        let fs = ForecastSet::new(
            Domain::unit(),
            vec![Forecast { g: ConstraintFunction::Affine { c0: 2.0, c1: 0.0 }, epsilon: 1.0 }],
        )
        .unwrap();
        assert!(matches!(
            brute_force_worst_case(&fs, &market(), 0.5, &GridSpec::default()),
            Err(Error::AmbiguitySetEmpty)
        ));
    }
}
