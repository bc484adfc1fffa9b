use excite_core::cost::{direct_route_cost, excitation_route_cost, ln_poly_bound, poly_order, random_model, CostModel};
use excite_core::random::seeded_rng;
use excite_core::Exec;
use rand::Rng;

fn no_advantage_sample(seed: u64) -> CostModel {
    let mut rng = seeded_rng(seed);
    let mut m = random_model(&mut rng);
    m.mu_j0 = m.a * m.b;
    m.lambda = m.w_j0 - m.w;
    m.m_denominator = rng.random_range(4.0..40.0);
    m
}

fn excess(exec: Exec) -> Vec<f64> {
    exec.map_range(1000, |i| {
        let m = no_advantage_sample(i as u64);
        excitation_route_cost(&m).unwrap().total - direct_route_cost(&m).unwrap().total
    })
}

#[test]
fn excitation_never_beats_direct_at_reflection_value() {
    let seq = excess(Exec::Sequential);
    assert!(seq.iter().all(|d| *d >= 0.0));
    assert_eq!(seq, excess(Exec::Parallel));
}

#[test]
fn poly_order_is_minimal() {
    let mut rng = seeded_rng(7);
    for _ in 0..1000 {
        let t = (rng.random_range(-3.0f64..4.0)).exp();
        let eps = (rng.random_range(-30.0f64..-0.01)).exp();
        let q = poly_order(t, eps).unwrap();
        assert!(ln_poly_bound(t, q) <= eps.ln());
        if q > 1 {
            assert!(ln_poly_bound(t, q - 1) > eps.ln(), "t={t} eps={eps} q={q}");
        }
        assert!(poly_order(t, 0.5 * eps).unwrap() >= q);
    }
}

#[test]
fn costs_are_positive_and_finite() {
    let mut rng = seeded_rng(8);
    for _ in 0..1000 {
        let m = random_model(&mut rng);
        for r in [excitation_route_cost(&m).unwrap(), direct_route_cost(&m).unwrap()] {
            assert!(r.total.is_finite() && r.total > 0.0, "{r:?}");
        }
    }
}
