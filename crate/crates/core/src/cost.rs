//! Toffoli-count model for the excitation route and for direct preparation.
//!
//! All costs are `f64` Toffoli counts. `log` in the Sum-of-Slaters cost is
//! `⌈log₂ D⌉`, and the polynomial-order factor of the evolution cost is the
//! smallest `q` meeting `4tᵠ/(2ᵠ q!) ≤ ε`.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::block_encoding::one_norm_total;
use crate::error::{domain, Error, Result};

/// Cost of `2·Prep + Sel` for the electronic Hamiltonian: either a number,
/// or `c·N·√Ξ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PrepSel {
    Value(f64),
    Model { c: f64, n: f64, xi: f64 },
}

impl PrepSel {
    pub fn value(self) -> f64 {
        match self {
            PrepSel::Value(v) => v,
            PrepSel::Model { c, n, xi } => c * n * xi.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostModel {
    pub d0: u64,
    pub dj: u64,
    pub prep_sel: PrepSel,
    pub lambda_df_he: f64,
    pub delta0: f64,
    pub deltaj: f64,
    pub a: f64,
    pub b: f64,
    pub mu_j0: f64,
    pub w: f64,
    pub lambda: f64,
    pub w_j0: f64,
    pub epsilon: f64,
    pub m_denominator: f64,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("{name} must be positive and finite, got {v}")))
    }
}

impl CostModel {
    pub fn validate(&self) -> Result<()> {
        if self.d0 == 0 || self.dj == 0 {
            return Err(domain("determinant counts must be at least 1"));
        }
        positive("prep_sel", self.prep_sel.value())?;
        positive("lambda_df_he", self.lambda_df_he)?;
        positive("delta0", self.delta0)?;
        positive("deltaj", self.deltaj)?;
        for (name, v) in [("a", self.a), ("b", self.b)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(domain(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        if !(self.mu_j0 >= 0.0 && self.mu_j0.is_finite()) {
            return Err(domain("mu_j0 must be non-negative"));
        }
        if !(self.w >= 0.0 && self.w.is_finite()) || !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(domain("w and lambda must be non-negative"));
        }
        if !self.w_j0.is_finite() {
            return Err(domain("w_j0 must be finite"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(domain("epsilon must lie in (0, 1)"));
        }
        if !(self.m_denominator >= 1.0 && self.m_denominator.is_finite()) {
            return Err(domain("m_denominator must be >= 1"));
        }
        Ok(())
    }

    /// `λ > w_{j,0} − w`: outside the range where the expansion is trusted.
    pub fn lambda_exceeds_detuning(&self) -> bool {
        self.lambda > (self.w_j0 - self.w).abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostReport {
    pub route: String,
    pub repetitions: f64,
    pub ground_prep: f64,
    pub evolution: f64,
    pub projection: f64,
    pub total: f64,
    /// Set when some factor is infinite; numbers are then not meaningful.
    pub unbounded: Option<String>,
    pub breakdown: BTreeMap<String, f64>,
}

impl CostReport {
    fn assemble(route: &str, repetitions: f64, ground_prep: f64, evolution: f64, projection: f64, breakdown: BTreeMap<String, f64>) -> Self {
        Self {
            route: route.into(),
            repetitions,
            ground_prep,
            evolution,
            projection,
            total: repetitions * (ground_prep + evolution + projection),
            unbounded: None,
            breakdown,
        }
    }

    fn unbounded(route: &str, reason: impl Into<String>) -> Self {
        Self {
            route: route.into(),
            repetitions: f64::INFINITY,
            ground_prep: f64::NAN,
            evolution: f64::NAN,
            projection: f64::NAN,
            total: f64::INFINITY,
            unbounded: Some(reason.into()),
            breakdown: BTreeMap::new(),
        }
    }
}

/// `D(2⌈log₂D⌉ + 3)`
pub fn sos_cost(d: u64) -> Result<f64> {
    if d == 0 {
        return Err(domain("SOS cost needs D >= 1"));
    }
    let log = if d == 1 { 0 } else { 64 - (d - 1).leading_zeros() };
    Ok(d as f64 * (2.0 * log as f64 + 3.0))
}

/// `(λ_DF/Δ)·prep_sel`
pub fn qpe_cost(lambda_df: f64, delta: f64, prep_sel: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(domain(format!("QPE precision must be positive, got {delta}")));
    }
    if !(lambda_df >= 0.0) || !(prep_sel >= 0.0) {
        return Err(domain("QPE inputs must be non-negative"));
    }
    Ok(lambda_df / delta * prep_sel)
}

/// `ln(4tᵠ/(2ᵠ q!))`
pub fn ln_poly_bound(t: f64, q: u32) -> f64 {
    let ln_fact: f64 = (2..=q).map(|k| (k as f64).ln()).sum();
    4f64.ln() + q as f64 * (0.5 * t).ln() - ln_fact
}

pub fn poly_bound(t: f64, q: u32) -> f64 {
    ln_poly_bound(t, q).exp()
}

/// Smallest `q ≥ 1` with `4tᵠ/(2ᵠ q!) ≤ ε`.
pub fn poly_order(t: f64, epsilon: f64) -> Result<u32> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(domain(format!("evolution time must be positive, got {t}")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(domain(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let target = epsilon.ln();
    let half = (0.5 * t).ln();
    let mut ln_bound = 4f64.ln();
    let mut q = 0u32;
    loop {
        q += 1;
        ln_bound += half - (q as f64).ln();
        if ln_bound <= target {
            return Ok(q);
        }
        if q == u32::MAX {
            return Err(domain("polynomial order overflow"));
        }
    }
}

/// `q(t, ε)·λ_DF,Ĥ·(prep_sel + 2C_SOS,0 + 2C_SOS,j)`
pub fn evolution_cost(t: f64, epsilon: f64, lambda_df_total: f64, prep_sel: f64, c_sos_0: f64, c_sos_j: f64) -> Result<f64> {
    let q = poly_order(t, epsilon)?;
    if !(lambda_df_total >= 0.0) || !(prep_sel >= 0.0) || !(c_sos_0 >= 0.0) || !(c_sos_j >= 0.0) {
        return Err(domain("evolution cost inputs must be non-negative"));
    }
    Ok(q as f64 * lambda_df_total * (prep_sel + 2.0 * c_sos_0 + 2.0 * c_sos_j))
}

/// `M(w − w_{j,0})²/(4μ²λ²)`
pub fn repetitions(m: f64, detuning: f64, mu: f64, lambda: f64) -> f64 {
    m * detuning * detuning / (4.0 * mu * mu * lambda * lambda)
}

pub fn excitation_route_cost(model: &CostModel) -> Result<CostReport> {
    model.validate()?;
    const ROUTE: &str = "excitation";
    let detuning = model.w_j0 - model.w;
    if detuning == 0.0 {
        return Err(Error::Resonance("w equals w_j0; evolution time is undefined".into()));
    }
    if model.mu_j0 == 0.0 {
        return Ok(CostReport::unbounded(ROUTE, "mu_j0 = 0: success probability vanishes"));
    }
    if model.lambda == 0.0 {
        return Ok(CostReport::unbounded(ROUTE, "lambda = 0: success probability vanishes"));
    }
    if model.a == 0.0 {
        return Ok(CostReport::unbounded(ROUTE, "a = 0: ground-state preparation never succeeds"));
    }
    let prep_sel = model.prep_sel.value();
    let sos0 = sos_cost(model.d0)?;
    let sosj = sos_cost(model.dj)?;
    let qpe0 = qpe_cost(model.lambda_df_he, model.delta0, prep_sel)?;
    let qpej = qpe_cost(model.lambda_df_he, model.deltaj, prep_sel)?;
    let t = std::f64::consts::PI / detuning.abs();
    let q = poly_order(t, model.epsilon)?;
    let norm = one_norm_total(model.lambda_df_he, model.lambda, model.w)?;
    let reps = repetitions(model.m_denominator, detuning, model.mu_j0, model.lambda);
    let ground = (sos0 + qpe0) / (model.a * model.a);
    let evolution = evolution_cost(t, model.epsilon, norm, prep_sel, sos0, sosj)?;

    let breakdown = BTreeMap::from([
        ("c_sos_0".to_string(), sos0),
        ("c_sos_j".to_string(), sosj),
        ("c_qpe_0".to_string(), qpe0),
        ("c_qpe_j".to_string(), qpej),
        ("prep_sel".to_string(), prep_sel),
        ("evolution_time".to_string(), t),
        ("poly_order".to_string(), q as f64),
        ("one_norm_total".to_string(), norm),
        ("success_probability".to_string(), 1.0 / reps),
    ]);
    Ok(CostReport::assemble(ROUTE, reps, ground, evolution, qpej, breakdown))
}

pub fn direct_route_cost(model: &CostModel) -> Result<CostReport> {
    model.validate()?;
    const ROUTE: &str = "direct";
    if model.b == 0.0 {
        return Ok(CostReport::unbounded(ROUTE, "b = 0: projection never succeeds"));
    }
    let prep_sel = model.prep_sel.value();
    let sosj = sos_cost(model.dj)?;
    let qpej = qpe_cost(model.lambda_df_he, model.deltaj, prep_sel)?;
    let breakdown = BTreeMap::from([
        ("c_sos_j".to_string(), sosj),
        ("c_qpe_j".to_string(), qpej),
        ("prep_sel".to_string(), prep_sel),
    ]);
    Ok(CostReport::assemble(ROUTE, 1.0 / (model.b * model.b), sosj, 0.0, qpej, breakdown))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RouteComparison {
    pub excitation: CostReport,
    pub direct: CostReport,
    /// excitation / direct
    pub ratio: f64,
    pub excitation_cheaper: bool,
    /// `μ_{j,0}` at which both totals agree, if one exists in the bracket.
    pub breakeven_mu_j0: Option<f64>,
    /// Whether the breakeven is at most 1 (the largest reflection element).
    pub breakeven_physical: Option<bool>,
    /// `a·b`, the reflection value of `μ_{j,0}`.
    pub reflection_mu_j0: f64,
    /// Excitation total ≥ direct total with `μ_{j,0} = a·b`, `λ = |w_{j,0} − w|`.
    pub no_advantage_at_reflection: bool,
    pub lambda_exceeds_detuning: bool,
}

const BRACKET: (f64, f64) = (1e-12, 1e12);

fn excitation_total_at(model: &CostModel, mu: f64) -> Result<f64> {
    Ok(excitation_route_cost(&CostModel { mu_j0: mu, ..model.clone() })?.total)
}

/// Bisection on `ln μ_{j,0}`; the excitation total decreases in `μ_{j,0}`.
pub fn breakeven_mu_j0(model: &CostModel) -> Result<Option<f64>> {
    let direct = direct_route_cost(model)?.total;
    if !direct.is_finite() {
        return Ok(None);
    }
    let gap = |mu: f64| -> Result<f64> { Ok(excitation_total_at(model, mu)? - direct) };
    let (mut lo, mut hi) = (BRACKET.0.ln(), BRACKET.1.ln());
    if gap(lo.exp())? < 0.0 || gap(hi.exp())? > 0.0 {
        return Ok(None);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gap(mid.exp())? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    Ok(Some((0.5 * (lo + hi)).exp()))
}

pub fn compare_routes(model: &CostModel) -> Result<RouteComparison> {
    let excitation = excitation_route_cost(model)?;
    let direct = direct_route_cost(model)?;
    let breakeven = breakeven_mu_j0(model)?;
    let reflection_mu = model.a * model.b;
    let at_reflection = CostModel { mu_j0: reflection_mu, lambda: (model.w_j0 - model.w).abs(), ..model.clone() };
    let no_advantage = excitation_route_cost(&at_reflection)?.total >= direct_route_cost(&at_reflection)?.total;
    Ok(RouteComparison {
        ratio: excitation.total / direct.total,
        excitation_cheaper: excitation.total < direct.total,
        breakeven_mu_j0: breakeven,
        breakeven_physical: breakeven.map(|mu| mu <= 1.0),
        reflection_mu_j0: reflection_mu,
        no_advantage_at_reflection: no_advantage,
        lambda_exceeds_detuning: model.lambda_exceeds_detuning(),
        excitation,
        direct,
    })
}

/// Random valid model. `lambda_df_he ≥ 1` keeps the evolution term at least
/// `2C_SOS,j`, which the no-advantage argument relies on.
pub fn random_model<R: Rng>(rng: &mut R) -> CostModel {
    let log_uniform = |rng: &mut R, lo: f64, hi: f64| (rng.random_range(lo.ln()..hi.ln())).exp();
    let w_j0 = log_uniform(rng, 0.05, 2.0);
    let w = w_j0 * rng.random_range(0.5..0.99);
    let a = rng.random_range(0.05..=1.0);
    let b = rng.random_range(0.05..=1.0);
    CostModel {
        d0: rng.random_range(1..=10_000),
        dj: rng.random_range(1..=10_000),
        prep_sel: PrepSel::Value(log_uniform(rng, 1e2, 1e7)),
        lambda_df_he: log_uniform(rng, 1.0, 1e3),
        delta0: log_uniform(rng, 1e-4, 1e-1),
        deltaj: log_uniform(rng, 1e-4, 1e-1),
        a,
        b,
        mu_j0: rng.random_range(0.01..=1.0),
        w,
        lambda: (w_j0 - w) * rng.random_range(0.01..=1.0),
        w_j0,
        epsilon: log_uniform(rng, 1e-10, 1e-1),
        m_denominator: rng.random_range(1.0..20.0),
    }
}
