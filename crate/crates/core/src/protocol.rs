//! Protocol parameters for exciting a chosen level `k`.
//!
//! Evolution time `t* = π/(w_{k,0} − w)` puts the target's `sin²` factor at
//! its maximum; the success probability is the first-order expression
//!
//! ```text
//! p = 4λ²|μ_{k,0}|²/(w_{k,0} − w)² / √Z,   Z = 1 + 4λ² Σ_j |μ_{0,j}|² sin²((w_{j,0}−w)t/2)/(w_{j,0}−w)²
//! ```
//!
//! evaluated as written, with the `1/Z` variant (the squared normalized
//! amplitude) reported next to it.

use serde::Serialize;

use crate::error::{domain, Result};
use crate::perturbation::first_order_normalization;
use crate::spectral::ElectronicSystem;

/// Default factor for turning "A ≫ B" into `A ≥ κ·B`.
pub const DEFAULT_DOMINANCE: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectatorReason {
    /// `4λ²|μ_{k,0}|² ≤ (w_{k,0} − w)²`: the target does not dominate.
    DenominatorNonPositive,
    /// The threshold is finite but `w̄ < κ·threshold`.
    DetuningTooSmall,
    /// No `p_success`, no `t*`.
    Resonant,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolPlan {
    pub target: usize,
    pub w: f64,
    pub lambda: f64,
    /// `w_{k,0} − w`
    pub detuning: f64,
    pub detuning_sign: i8,
    pub resonant: bool,
    /// `π/|w_{k,0} − w|`; unset at resonance.
    pub t_star: Option<f64>,
    pub lambda_max: f64,
    /// `λ / lambda_max`; above 1 the expansion is not expected to converge.
    pub convergence_ratio: f64,
    /// `min_{l≠k} |w_{l,0} − w|`
    pub w_bar: f64,
    pub dominance: f64,
    pub spectator_threshold: Option<f64>,
    pub spectator_ok: bool,
    pub spectator_reason: Option<SpectatorReason>,
    /// `Z(t*)`
    pub z: Option<f64>,
    /// `√Z(t*)`, the denominator of the success probability.
    pub m_denominator: Option<f64>,
    /// Formula value clipped to `[0, 1]`.
    pub p_success: Option<f64>,
    /// Formula value before clipping.
    pub p_success_formula: Option<f64>,
    /// Same numerator over `Z` instead of `√Z`.
    pub p_success_inverse_z: Option<f64>,
}

fn check_inputs(sys: &ElectronicSystem, w: f64, lambda: f64, k: usize) -> Result<()> {
    if k >= sys.n() {
        return Err(domain(format!("target {k} out of range 0..{}", sys.n())));
    }
    if !w.is_finite() || !lambda.is_finite() || lambda < 0.0 {
        return Err(domain("w must be finite and lambda non-negative"));
    }
    Ok(())
}

fn detuning(sys: &ElectronicSystem, w: f64, j: usize) -> f64 {
    sys.energies()[j] - sys.energies()[0] - w
}

/// First-order success probability for level `j` at time `t`, as displayed:
/// `4λ²|μ_{j,0}|²/(w_{j,0}−w)² / √Z(t)`. At resonance the prefactor is
/// replaced by its `sin²` limit `λ²|μ_{j,0}|²t²`.
pub fn success_probability(sys: &ElectronicSystem, w: f64, lambda: f64, t: f64, j: usize) -> Result<f64> {
    check_inputs(sys, w, lambda, j)?;
    let mu2 = sys.coupling()[(j, 0)].norm_sqr();
    let d = detuning(sys, w, j);
    let numerator = if d.abs() <= sys.degeneracy_tol(w) {
        lambda * lambda * mu2 * t * t
    } else {
        4.0 * lambda * lambda * mu2 / (d * d)
    };
    Ok(numerator / first_order_normalization(sys, w, lambda, t).sqrt())
}

/// `|first-order amplitude of |1⟩|φ_j⟩|²`:
/// `4λ²|μ_{j,0}|² sin²((w_{j,0}−w)t/2)/(w_{j,0}−w)² / Z(t)`.
pub fn squared_amplitude_probability(sys: &ElectronicSystem, w: f64, lambda: f64, t: f64, j: usize) -> Result<f64> {
    check_inputs(sys, w, lambda, j)?;
    let mu2 = sys.coupling()[(j, 0)].norm_sqr();
    let d = detuning(sys, w, j);
    let s = if d.abs() <= sys.degeneracy_tol(w) { 0.5 * t } else { (0.5 * d * t).sin() / d };
    Ok(4.0 * lambda * lambda * mu2 * s * s / first_order_normalization(sys, w, lambda, t))
}

pub fn plan_protocol(sys: &ElectronicSystem, w: f64, lambda: f64, k: usize) -> Result<ProtocolPlan> {
    plan_protocol_with(sys, w, lambda, k, DEFAULT_DOMINANCE)
}

pub fn plan_protocol_with(sys: &ElectronicSystem, w: f64, lambda: f64, k: usize, dominance: f64) -> Result<ProtocolPlan> {
    check_inputs(sys, w, lambda, k)?;
    if !(lambda > 0.0) {
        return Err(domain("lambda must be positive"));
    }
    if !(dominance > 0.0 && dominance.is_finite()) {
        return Err(domain("dominance factor must be positive"));
    }
    let d = detuning(sys, w, k);
    let resonant = d.abs() <= sys.degeneracy_tol(w);
    let w_bar = (0..sys.n())
        .filter(|&l| l != k)
        .map(|l| detuning(sys, w, l).abs())
        .fold(f64::INFINITY, f64::min);
    let lambda_max = d.abs();
    let mu2 = sys.coupling()[(k, 0)].norm_sqr();

    let mut plan = ProtocolPlan {
        target: k,
        w,
        lambda,
        detuning: d,
        detuning_sign: if d < 0.0 { -1 } else { 1 },
        resonant,
        t_star: None,
        lambda_max,
        convergence_ratio: if lambda_max > 0.0 { lambda / lambda_max } else { f64::INFINITY },
        w_bar,
        dominance,
        spectator_threshold: None,
        spectator_ok: false,
        spectator_reason: Some(SpectatorReason::Resonant),
        z: None,
        m_denominator: None,
        p_success: None,
        p_success_formula: None,
        p_success_inverse_z: None,
    };
    if resonant {
        return Ok(plan);
    }

    let four_l2 = 4.0 * lambda * lambda;
    let den = four_l2 * mu2 - d * d;
    if den <= 0.0 {
        plan.spectator_reason = Some(SpectatorReason::DenominatorNonPositive);
    } else {
        let threshold = (four_l2 - four_l2 * mu2) / den * d * d;
        plan.spectator_threshold = Some(threshold);
        plan.spectator_ok = w_bar >= dominance * threshold;
        plan.spectator_reason = (!plan.spectator_ok).then_some(SpectatorReason::DetuningTooSmall);
    }

    let t_star = std::f64::consts::PI / d.abs();
    let z = first_order_normalization(sys, w, lambda, t_star);
    let p = success_probability(sys, w, lambda, t_star, k)?;
    plan.t_star = Some(t_star);
    plan.z = Some(z);
    plan.m_denominator = Some(z.sqrt());
    plan.p_success_formula = Some(p);
    plan.p_success = Some(p.clamp(0.0, 1.0));
    plan.p_success_inverse_z = Some(squared_amplitude_probability(sys, w, lambda, t_star, k)?);
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, CMatrix};
    use crate::random::generate_system;
    use std::f64::consts::PI;

    fn two_level(mu: f64) -> ElectronicSystem {
        let m = CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(mu, 0.), c(mu, 0.), c(0., 0.)]);
        ElectronicSystem::new(vec![0.0, 1.0], m).unwrap()
    }

    #[test]
    fn two_level_t_star() {
        let plan = plan_protocol(&two_level(1.0), 0.9, 0.05, 1).unwrap();
        let t = plan.t_star.unwrap();
        assert!((t - PI / 0.1).abs() < 1e-12);
        assert!((t * plan.detuning - PI).abs() <= 4.0 * f64::EPSILON * PI);
        assert!(plan.m_denominator.unwrap() >= 1.0);
        // l = 0 is the only spectator: |w_{0,0} − w| = 0.9
        assert!((plan.w_bar - 0.9).abs() < 1e-15);
    }

    #[test]
    fn weak_coupling_limit() {
        let sys = two_level(0.7);
        let limit = 4.0 * 0.49 / 0.01;
        for lambda in [1e-3, 1e-4, 1e-5] {
            let plan = plan_protocol(&sys, 0.9, lambda, 1).unwrap();
            let p = plan.p_success.unwrap();
            assert!((p / (lambda * lambda) - limit).abs() / limit < 1e3 * lambda * lambda + 1e-12);
            assert!(plan.z.unwrap() - 1.0 < 1e4 * lambda * lambda);
        }
    }

    #[test]
    fn trivial_zeros() {
        let sys = two_level(0.7);
        assert_eq!(success_probability(&sys, 0.9, 0.0, 3.0, 1).unwrap(), 0.0);
        assert_eq!(success_probability(&two_level(0.0), 0.9, 0.1, 3.0, 1).unwrap(), 0.0);
    }

    #[test]
    fn conventions_differ_by_root_z_at_t_star() {
        let sys = two_level(1.0);
        let plan = plan_protocol(&sys, 0.9, 0.01, 1).unwrap();
        let ratio = plan.p_success_formula.unwrap() / plan.p_success_inverse_z.unwrap();
        assert!((ratio - plan.m_denominator.unwrap()).abs() < 1e-12);
        assert!(ratio > 1.0);
    }

    #[test]
    fn negative_detuning_uses_magnitude() {
        let plan = plan_protocol(&two_level(1.0), 1.1, 0.01, 1).unwrap();
        assert_eq!(plan.detuning_sign, -1);
        assert!((plan.t_star.unwrap() - PI / 0.1).abs() < 1e-10);
    }

    #[test]
    fn resonance_is_flagged() {
        let plan = plan_protocol(&two_level(1.0), 1.0, 0.01, 1).unwrap();
        assert!(plan.resonant && plan.t_star.is_none() && plan.p_success.is_none());
        assert_eq!(plan.spectator_reason, Some(SpectatorReason::Resonant));
    }

    #[test]
    fn spectator_denominator_sign() {
        // 2λμ < detuning: target does not dominate
        let plan = plan_protocol(&two_level(1.0), 0.9, 0.01, 1).unwrap();
        assert!(!plan.spectator_ok);
        assert_eq!(plan.spectator_reason, Some(SpectatorReason::DenominatorNonPositive));
        // 2λμ = 0.2 > 0.02 and μ = 1 makes the threshold vanish
        let plan = plan_protocol(&two_level(1.0), 0.98, 0.1, 1).unwrap();
        assert!(plan.spectator_ok, "{plan:?}");
        assert_eq!(plan.spectator_threshold, Some(0.0));
    }

    #[test]
    fn monotone_in_lambda() {
        for seed in 0..10 {
            let sys = generate_system(5, seed, 1.0, 1.0).unwrap();
            let w = 0.9 * sys.gap(2, 0).unwrap();
            let cap = plan_protocol(&sys, w, 1e-3, 2).unwrap().lambda_max / 4.0;
            let mut last = 0.0;
            for i in 0..=40 {
                let lambda = cap * i as f64 / 40.0;
                let t = PI / (sys.gap(2, 0).unwrap() - w);
                let p = success_probability(&sys, w, lambda, t, 2).unwrap();
                assert!(p >= last, "seed {seed}");
                last = p;
            }
        }
    }

    #[test]
    fn resonant_two_level_small_time() {
        let sys = two_level(0.8);
        let lambda = 1e-2;
        for t in [0.1, 0.5, 1.0, 2.0] {
            let z = first_order_normalization(&sys, 1.0, lambda, t);
            let p = squared_amplitude_probability(&sys, 1.0, lambda, t, 1).unwrap();
            let expected = (lambda * 0.8 * t).powi(2) / z;
            assert!((p - expected).abs() <= (lambda * t).powi(4), "t={t}");
        }
    }
}
