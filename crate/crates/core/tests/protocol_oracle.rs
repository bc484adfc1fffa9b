use excite_core::evolution::ExactDynamics;
use excite_core::linalg::{c, CMatrix};
use excite_core::perturbation::first_order_normalization;
use excite_core::protocol::plan_protocol;
use excite_core::random::generate_system;
use excite_core::{CoupledIndex, ElectronicSystem};

#[test]
fn five_level_success_probability_tracks_exact_dynamics() {
    let sys = generate_system(5, 5, 1.0, 1.0).unwrap();
    let k = 2;
    let w = 0.95 * sys.gap(k, 0).unwrap();
    let lambda = 1e-2 * (sys.gap(k, 0).unwrap() - w);
    let plan = plan_protocol(&sys, w, lambda, k).unwrap();
    let t = plan.t_star.unwrap();
    let exact = ExactDynamics::new(&sys, w, lambda, CoupledIndex::GROUND).unwrap().amplitudes(t).unwrap();
    let p_exact = exact.probability(CoupledIndex::new(1, k));
    let formula = plan.p_success.unwrap();
    let inverse_z = plan.p_success_inverse_z.unwrap();
    assert!((formula - p_exact).abs() < 10.0 * lambda * lambda, "{formula} vs {p_exact}");
    assert!((inverse_z - p_exact).abs() < 10.0 * lambda * lambda, "{inverse_z} vs {p_exact}");
}

#[test]
fn resonant_two_level_matches_exact_at_small_times() {
    let mu = 0.8;
    let m = CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(mu, 0.), c(mu, 0.), c(0., 0.)]);
    let sys = ElectronicSystem::new(vec![0.0, 1.0], m).unwrap();
    let lambda = 1e-2;
    let dyn_ = ExactDynamics::new(&sys, 1.0, lambda, CoupledIndex::GROUND).unwrap();
    for t in [0.5, 1.0, 2.0, 5.0] {
        let z = first_order_normalization(&sys, 1.0, lambda, t);
        let approx = (lambda * mu * t).powi(2) / z;
        let exact = dyn_.amplitudes(t).unwrap().probability(CoupledIndex::new(1, 1));
        assert!((approx - exact).abs() <= 2.0 * (lambda * t).powi(4), "t={t}: {approx} vs {exact}");
    }
}
