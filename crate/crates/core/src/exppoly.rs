//! Exact functions of time of the form `f(t) = Σ a·tⁿ·e^{−iΔt}`.
//!
//! Every perturbative coefficient is such a sum: the recurrence only ever
//! multiplies by a phase `e^{−iδt}`, scales, adds and integrates from zero,
//! and the class is closed under all four.
//!
//! Frequencies closer than a caller-supplied tolerance `tol` are merged into
//! one bucket, and a bucket within `tol` of zero is snapped to exactly zero so
//! that integration takes the secular (polynomial) branch instead of dividing
//! by a vanishing frequency.

use crate::error::{Error, Result};
use crate::linalg::{C64, I};

/// Hard cap on the number of terms in one canonical polynomial.
pub const MAX_TERMS: usize = 1_000_000;

/// Relative magnitude below which coefficients are dropped.
const PRUNE_REL: f64 = 1e-15;

/// One term `coeff · t^power · e^{−i·freq·t}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub coeff: C64,
    pub power: u32,
    pub freq: f64,
}

impl Term {
    pub fn new(coeff: C64, power: u32, freq: f64) -> Self {
        Self { coeff, power, freq }
    }

    pub fn eval(&self, t: f64) -> C64 {
        self.coeff * t.powi(self.power as i32) * (-I * self.freq * t).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExpPoly {
    terms: Vec<Term>,
}

impl ExpPoly {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn constant(c: C64) -> Self {
        Self::single(c, 0, 0.0)
    }

    pub fn single(coeff: C64, power: u32, freq: f64) -> Self {
        if coeff == C64::new(0.0, 0.0) {
            return Self::zero();
        }
        Self { terms: vec![Term::new(coeff, power, freq)] }
    }

    /// Build from raw terms and bring to canonical form.
    pub fn from_terms(terms: Vec<Term>, tol: f64) -> Result<Self> {
        let mut p = Self { terms };
        p.canonicalize(tol)?;
        Ok(p)
    }

    /// Raw terms, no canonicalization. Used by transcribed closed forms.
    pub fn from_raw(terms: Vec<Term>) -> Self {
        Self { terms }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_power(&self) -> Option<u32> {
        self.terms.iter().map(|t| t.power).max()
    }

    pub fn max_coeff(&self) -> f64 {
        self.terms.iter().fold(0.0, |a, t| a.max(t.coeff.norm()))
    }

    pub fn eval(&self, t: f64) -> C64 {
        self.terms.iter().map(|term| term.eval(t)).sum()
    }

    /// Exact derivative.
    pub fn derivative(&self) -> ExpPoly {
        let mut out = Vec::with_capacity(2 * self.terms.len());
        for term in &self.terms {
            if term.power > 0 {
                out.push(Term::new(term.coeff * term.power as f64, term.power - 1, term.freq));
            }
            if term.freq != 0.0 {
                out.push(Term::new(-I * term.freq * term.coeff, term.power, term.freq));
            }
        }
        Self { terms: out }
    }

    pub fn scaled(&self, c: C64) -> ExpPoly {
        Self { terms: self.terms.iter().map(|t| Term::new(t.coeff * c, t.power, t.freq)).collect() }
    }

    /// Append the terms of `other` (not canonicalized).
    pub fn extend(&mut self, other: &ExpPoly) {
        self.terms.extend_from_slice(&other.terms);
    }

    pub fn sum(&self, other: &ExpPoly, tol: f64) -> Result<ExpPoly> {
        let mut out = self.clone();
        out.extend(other);
        out.canonicalize(tol)?;
        Ok(out)
    }

    pub fn difference(&self, other: &ExpPoly, tol: f64) -> Result<ExpPoly> {
        self.sum(&other.scaled(C64::new(-1.0, 0.0)), tol)
    }

    /// `e^{−iδt}·f(t)`
    pub fn phase_shift(&self, delta: f64, tol: f64) -> Result<ExpPoly> {
        let terms = self.terms.iter().map(|t| Term::new(t.coeff, t.power, t.freq + delta)).collect();
        Self::from_terms(terms, tol)
    }

    /// `F(t) = ∫₀ᵗ f(s) ds`
    pub fn integrate_from_zero(&self, tol: f64) -> Result<ExpPoly> {
        let mut canon = self.clone();
        canon.canonicalize(tol)?;
        let mut out = Vec::with_capacity(canon.terms.len() * 2);
        for term in &canon.terms {
            integrate_term(term, &mut out);
        }
        Self::from_terms(out, tol)
    }

    /// Merge frequency buckets, snap near-zero frequencies, drop negligible
    /// coefficients and sort by (power, frequency).
    pub fn canonicalize(&mut self, tol: f64) -> Result<()> {
        for term in &mut self.terms {
            if term.freq.abs() <= tol {
                term.freq = 0.0;
            }
        }
        self.terms.sort_by(|a, b| a.power.cmp(&b.power).then(a.freq.total_cmp(&b.freq)));

        let mut merged: Vec<Term> = Vec::with_capacity(self.terms.len());
        let mut bucket_start = f64::NAN;
        for term in self.terms.drain(..) {
            match merged.last_mut() {
                Some(last) if last.power == term.power && term.freq - bucket_start <= tol => {
                    last.coeff += term.coeff;
                }
                _ => {
                    bucket_start = term.freq;
                    merged.push(term);
                }
            }
        }

        let scale = merged.iter().fold(0.0, |a: f64, t| a.max(t.coeff.norm()));
        merged.retain(|t| t.coeff.norm() > PRUNE_REL * scale && t.coeff.norm() > 0.0);
        if merged.len() > MAX_TERMS {
            return Err(Error::TermLimit { terms: merged.len(), cap: MAX_TERMS });
        }
        self.terms = merged;
        Ok(())
    }

    /// Symbolic comparison: the canonical difference has no coefficient above
    /// `rel · max(scale of either side)`.
    pub fn approx_eq(&self, other: &ExpPoly, rel: f64, tol: f64) -> bool {
        let scale = self.max_coeff().max(other.max_coeff());
        match self.difference(other, tol) {
            Ok(d) => d.max_coeff() <= rel * scale,
            Err(_) => false,
        }
    }
}

/// Antiderivative of `a·tⁿ·e^{st}` vanishing at zero, `s = −iΔ`.
///
/// For `s ≠ 0`:
/// `e^{st} Σ_{k=0}^{n} (−1)^k n!/(n−k)! t^{n−k}/s^{k+1} − (−1)^n n!/s^{n+1}`.
fn integrate_term(term: &Term, out: &mut Vec<Term>) {
    let n = term.power;
    if term.freq == 0.0 {
        out.push(Term::new(term.coeff / (n as f64 + 1.0), n + 1, 0.0));
        return;
    }
    let s = -I * term.freq;
    let inv_s = s.inv();
    // falling = n!/(n−k)!, sign = (−1)^k, inv_pow = 1/s^{k+1}
    let mut falling = 1.0;
    let mut inv_pow = inv_s;
    for k in 0..=n {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        out.push(Term::new(term.coeff * sign * falling * inv_pow, n - k, term.freq));
        if k < n {
            falling *= (n - k) as f64;
            inv_pow *= inv_s;
        }
    }
    // after the loop: falling = n!, inv_pow = 1/s^{n+1}
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    out.push(Term::new(-term.coeff * sign * falling * inv_pow, 0, 0.0));
}
