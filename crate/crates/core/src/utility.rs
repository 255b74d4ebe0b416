//! Planner utilities `J(x, b) = min_k (a_k + c_k·x + d_k·b)`.
//!
//! A minimum of affine functions is jointly concave, so every utility built
//! here is concave in the outcome `x` for fixed `b` and in the decision `b`
//! for fixed `x`.

use crate::error::{Error, Result};
use crate::forecast::{sort_dedup, Domain};

/// One affine piece `a + c·x + d·b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffinePiece {
    pub a: f64,
    pub c: f64,
    pub d: f64,
}

impl AffinePiece {
    pub fn new(a: f64, c: f64, d: f64) -> Self {
        Self { a, c, d }
    }

    #[inline]
    pub fn value(&self, x: f64, b: f64) -> f64 {
        self.a + self.c * x + self.d * b
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Utility {
    pieces: Vec<AffinePiece>,
    b_lo: f64,
    b_hi: f64,
}

impl Utility {
    pub fn new(pieces: Vec<AffinePiece>, b_lo: f64, b_hi: f64) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::validation("pieces", "utility needs at least one affine piece"));
        }
        for (k, p) in pieces.iter().enumerate() {
            if !(p.a.is_finite() && p.c.is_finite() && p.d.is_finite()) {
                return Err(Error::validation(format!("pieces[{k}]"), "coefficients must be finite"));
            }
        }
        if !(b_lo.is_finite() && b_hi.is_finite()) || b_lo >= b_hi {
            return Err(Error::validation("decision", format!("bounds [{b_lo}, {b_hi}] must be finite with lower < upper")));
        }
        Ok(Self { pieces, b_lo, b_hi })
    }

    /// Market bidding profit `p·b - q·[b - x]_+`, written as
    /// `min(p·b, q·x + (p - q)·b)`.
    pub fn market_bidding(p: f64, q: f64, b_lo: f64, b_hi: f64) -> Result<Self> {
        if !(p > 0.0) {
            return Err(Error::Precondition(format!("reward rate p must be positive, got {p}")));
        }
        if !(q > p) {
            return Err(Error::Precondition(format!("penalty rate q = {q} must exceed p = {p}")));
        }
        Self::new(vec![AffinePiece::new(0.0, 0.0, p), AffinePiece::new(0.0, q, p - q)], b_lo, b_hi)
    }

    pub fn pieces(&self) -> &[AffinePiece] {
        &self.pieces
    }

    pub fn decision_bounds(&self) -> (f64, f64) {
        (self.b_lo, self.b_hi)
    }

    /// `J(x, b)` without range checks.
    #[inline]
    pub fn value(&self, x: f64, b: f64) -> f64 {
        self.pieces.iter().map(|p| p.value(x, b)).fold(f64::INFINITY, f64::min)
    }

    /// `J(x, b)` with `x` checked against `domain` and `b` against the decision bounds.
    pub fn eval(&self, domain: &Domain, x: f64, b: f64) -> Result<f64> {
        domain.check("x", x)?;
        self.check_decision(b)?;
        Ok(self.value(x, b))
    }

    pub(crate) fn check_decision(&self, b: f64) -> Result<()> {
        if b >= self.b_lo && b <= self.b_hi {
            Ok(())
        } else {
            Err(Error::OutOfDomain { what: "b", value: b, lower: self.b_lo, upper: self.b_hi })
        }
    }

    /// Every piece multiplied by `alpha`.
    pub fn scaled(&self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::Precondition(format!("scale must be positive, got {alpha}")));
        }
        let pieces = self.pieces.iter().map(|p| AffinePiece::new(alpha * p.a, alpha * p.c, alpha * p.d)).collect();
        Self::new(pieces, self.b_lo, self.b_hi)
    }

    /// Locations in `domain` where two pieces cross for the given `b`.
    pub fn kinks_in_x(&self, domain: &Domain, b: f64) -> Vec<f64> {
        let mut out = Vec::new();
        for (i, p) in self.pieces.iter().enumerate() {
            for r in &self.pieces[i + 1..] {
                let dc = p.c - r.c;
                if dc != 0.0 {
                    let x = ((r.a - p.a) + (r.d - p.d) * b) / dc;
                    if domain.contains(x) {
                        out.push(x);
                    }
                }
            }
        }
        sort_dedup(&mut out);
        out
    }
}
