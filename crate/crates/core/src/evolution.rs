//! Exact dynamics under the coupled Hamiltonian
//! `Ĥ = 1⊗H_e + (w/2) ẑ⊗1 + λ x̂⊗μ̂`, by full Hermitian eigendecomposition.
//!
//! This is the reference the perturbative series is measured against.

use nalgebra::SymmetricEigen;

use crate::error::{domain, Error, Result};
use crate::exec::Exec;
use crate::linalg::{hermiticity_residual, max_abs, CMatrix, CVector, C64, I};
use crate::spectral::{CoupledIndex, ElectronicSystem};

/// Amplitudes over the flattened product basis.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledState {
    pub amplitudes: CVector,
}

impl CoupledState {
    pub fn new(amplitudes: CVector) -> Self {
        Self { amplitudes }
    }

    /// |α⟩|φ_k⟩ for an `n`-level system.
    pub fn basis(n: usize, idx: CoupledIndex) -> Self {
        let mut v = CVector::zeros(2 * n);
        v[idx.flat(n)] = C64::new(1.0, 0.0);
        Self { amplitudes: v }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }
}

/// Interaction-picture coefficients `c_{α,k}(t)` in flattened order.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeRecord {
    n: usize,
    coeffs: Vec<C64>,
}

impl AmplitudeRecord {
    pub fn new(n: usize, coeffs: Vec<C64>) -> Self {
        assert_eq!(coeffs.len(), 2 * n, "record needs 2N coefficients");
        Self { n, coeffs }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn c(&self, idx: CoupledIndex) -> C64 {
        self.coeffs[idx.flat(self.n)]
    }

    pub fn probability(&self, idx: CoupledIndex) -> f64 {
        self.c(idx).norm_sqr()
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.coeffs.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn total_probability(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Probability of `idx` given the ancilla was measured in `idx.alpha`.
    pub fn conditional_probability(&self, idx: CoupledIndex) -> f64 {
        let branch: f64 = (0..self.n)
            .map(|k| self.probability(CoupledIndex::new(idx.alpha, k)))
            .sum();
        if branch == 0.0 {
            0.0
        } else {
            self.probability(idx) / branch
        }
    }

    /// max_{α,k} |c − c'|
    pub fn max_abs_diff(&self, other: &AmplitudeRecord) -> f64 {
        assert_eq!(self.n, other.n);
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(0.0, |acc, (a, b)| acc.max((a - b).norm()))
    }
}

/// Block form `[[diag(E) + w/2, λμ], [λμ†, diag(E) − w/2]]` from raw parts.
/// Accepts any size, including the single-level case.
pub fn assemble_hamiltonian_raw(energies: &[f64], coupling: &CMatrix, w: f64, lambda: f64) -> Result<CMatrix> {
    let n = energies.len();
    if coupling.shape() != (n, n) {
        return Err(domain("coupling dimension does not match the energies"));
    }
    let res = hermiticity_residual(coupling);
    if res > 1e-12 * max_abs(coupling) {
        return Err(Error::Domain(format!("coupling is not Hermitian (residual {res:.3e})")));
    }
    let mut h = CMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        h[(k, k)] = C64::new(energies[k] + 0.5 * w, 0.0);
        h[(n + k, n + k)] = C64::new(energies[k] - 0.5 * w, 0.0);
    }
    let adj = coupling.adjoint();
    for j in 0..n {
        for k in 0..n {
            h[(j, n + k)] = coupling[(j, k)] * lambda;
            h[(n + j, k)] = adj[(j, k)] * lambda;
        }
    }
    Ok(h)
}

pub fn assemble_hamiltonian(sys: &ElectronicSystem, w: f64, lambda: f64) -> Result<CMatrix> {
    assemble_hamiltonian_raw(sys.energies(), sys.coupling(), w, lambda)
}

/// Cached eigendecomposition `H = V diag(ε) V†` for repeated evolution.
#[derive(Debug, Clone)]
pub struct Propagator {
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
}

impl Propagator {
    pub fn new(h: &CMatrix) -> Result<Self> {
        if !h.is_square() {
            return Err(domain("Hamiltonian must be square"));
        }
        let scale = max_abs(h).max(1.0);
        if hermiticity_residual(h) > 1e-12 * scale {
            return Err(domain("Hamiltonian is not Hermitian"));
        }
        let eig = SymmetricEigen::new(h.clone());
        Ok(Self { eigenvalues: eig.eigenvalues.iter().copied().collect(), eigenvectors: eig.eigenvectors })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `e^{−iHt} ψ₀`
    pub fn evolve(&self, psi0: &CoupledState, t: f64) -> Result<CoupledState> {
        if psi0.dim() != self.dim() {
            return Err(domain(format!("state has dimension {}, Hamiltonian {}", psi0.dim(), self.dim())));
        }
        if !t.is_finite() {
            return Err(domain("evolution time must be finite"));
        }
        if t == 0.0 {
            return Ok(psi0.clone());
        }
        let mut coeffs = self.eigenvectors.ad_mul(&psi0.amplitudes);
        for (z, &e) in coeffs.iter_mut().zip(&self.eigenvalues) {
            *z *= (-I * e * t).exp();
        }
        Ok(CoupledState::new(&self.eigenvectors * coeffs))
    }

    /// Evolve the same initial state to every time in `ts`.
    pub fn evolve_grid(&self, psi0: &CoupledState, ts: &[f64], exec: Exec) -> Result<Vec<CoupledState>> {
        exec.map(ts, |&t| self.evolve(psi0, t)).into_iter().collect()
    }
}

/// `e^{−iHt} ψ₀` with a one-off eigendecomposition.
pub fn evolve(h: &CMatrix, psi0: &CoupledState, t: f64) -> Result<CoupledState> {
    Propagator::new(h)?.evolve(psi0, t)
}

/// `c_{α,k}(t) = e^{+iE_{α,k} t} ⟨α,φ_k|ψ(t)⟩`
pub fn interaction_amplitudes(sys: &ElectronicSystem, w: f64, state: &CoupledState, t: f64) -> Result<AmplitudeRecord> {
    let n = sys.n();
    if state.dim() != 2 * n {
        return Err(domain(format!("state has dimension {}, expected {}", state.dim(), 2 * n)));
    }
    let coeffs = CoupledIndex::all(n)
        .map(|idx| {
            let e = sys.coupled_energy(w, idx).expect("index in range");
            (I * e * t).exp() * state.amplitudes[idx.flat(n)]
        })
        .collect();
    Ok(AmplitudeRecord::new(n, coeffs))
}

/// Exact interaction-picture coefficients for one system on a time grid.
#[derive(Debug, Clone)]
pub struct ExactDynamics {
    sys: ElectronicSystem,
    w: f64,
    propagator: Propagator,
    initial: CoupledState,
}

impl ExactDynamics {
    pub fn new(sys: &ElectronicSystem, w: f64, lambda: f64, init: CoupledIndex) -> Result<Self> {
        if init.k >= sys.n() {
            return Err(domain("initial level out of range"));
        }
        let h = assemble_hamiltonian(sys, w, lambda)?;
        Ok(Self {
            sys: sys.clone(),
            w,
            propagator: Propagator::new(&h)?,
            initial: CoupledState::basis(sys.n(), init),
        })
    }

    pub fn state(&self, t: f64) -> Result<CoupledState> {
        self.propagator.evolve(&self.initial, t)
    }

    pub fn amplitudes(&self, t: f64) -> Result<AmplitudeRecord> {
        interaction_amplitudes(&self.sys, self.w, &self.state(t)?, t)
    }

    pub fn amplitudes_grid(&self, ts: &[f64], exec: Exec) -> Result<Vec<AmplitudeRecord>> {
        exec.map(ts, |&t| self.amplitudes(t)).into_iter().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, unitarity_residual, vec_max_abs_diff};
    use crate::random::generate_system;

    fn n1_example() -> CMatrix {
        assemble_hamiltonian_raw(&[0.0], &CMatrix::from_element(1, 1, c(1., 0.)), 2.0, 0.5).unwrap()
    }

    #[test]
    fn single_level_block_form() {
        let h = n1_example();
        let expect = CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0.5, 0.), c(0.5, 0.), c(-1., 0.)]);
        assert_eq!(h, expect);
        let p = Propagator::new(&h).unwrap();
        let mut ev = p.eigenvalues().to_vec();
        ev.sort_by(f64::total_cmp);
        assert!((ev[0] + 1.118_033_988_749_895).abs() < 1e-14);
        assert!((ev[1] - 1.118_033_988_749_895).abs() < 1e-14);
    }

    #[test]
    fn decoupled_limit_is_block_diagonal() {
        let sys = generate_system(4, 3, 1.0, 1.0).unwrap();
        let h = assemble_hamiltonian(&sys, 0.7, 0.0).unwrap();
        for j in 0..4 {
            for k in 0..4 {
                assert_eq!(h[(j, 4 + k)], c(0., 0.));
                assert_eq!(h[(4 + j, k)], c(0., 0.));
            }
        }
    }

    #[test]
    fn rejects_non_hermitian_coupling() {
        let bad = CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)]);
        assert!(assemble_hamiltonian_raw(&[0., 1.], &bad, 0.1, 0.2).is_err());
    }

    #[test]
    fn evolve_at_zero_is_identity() {
        let sys = generate_system(3, 1, 1.0, 1.0).unwrap();
        let h = assemble_hamiltonian(&sys, 0.5, 0.3).unwrap();
        let psi = CoupledState::basis(3, CoupledIndex::new(1, 2));
        assert_eq!(evolve(&h, &psi, 0.0).unwrap(), psi);
    }

    #[test]
    fn stationary_when_decoupled() {
        let sys = generate_system(3, 2, 1.0, 1.0).unwrap();
        let w = 0.4;
        let h = assemble_hamiltonian(&sys, w, 0.0).unwrap();
        let psi = CoupledState::basis(3, CoupledIndex::GROUND);
        let t = 3.7;
        let out = evolve(&h, &psi, t).unwrap();
        let e00 = sys.coupled_energy(w, CoupledIndex::GROUND).unwrap();
        let mut expect = CVector::zeros(6);
        expect[0] = (-I * e00 * t).exp();
        assert!(vec_max_abs_diff(&out.amplitudes, &expect) < 1e-13);
    }

    #[test]
    fn two_level_rabi_closed_form() {
        // H = [[1, 0.5], [0.5, -1]]: detuning δ = 2, coupling g = 0.5,
        // Ω = sqrt(δ² + 4g²)/2 = sqrt(1.25); P₁(t) = (g²/Ω²) sin²(Ωt).
        let h = n1_example();
        let omega = 1.25f64.sqrt();
        let psi = CoupledState::basis(1, CoupledIndex::new(0, 0));
        for &t in &[std::f64::consts::PI / omega, 0.3, 1.0, 7.5] {
            let out = evolve(&h, &psi, t).unwrap();
            let p1 = out.amplitudes[1].norm_sqr();
            let expect = 0.25 / 1.25 * (omega * t).sin().powi(2);
            assert!((p1 - expect).abs() < 1e-10, "t={t}: {p1} vs {expect}");
        }
    }

    #[test]
    fn evolution_operator_is_unitary() {
        let sys = generate_system(5, 11, 1.0, 1.0).unwrap();
        let h = assemble_hamiltonian(&sys, 0.9, 0.2).unwrap();
        let p = Propagator::new(&h).unwrap();
        let cols: Vec<CVector> = (0..10)
            .map(|i| p.evolve(&CoupledState::basis(5, CoupledIndex::from_flat(i, 5)), 2.3).unwrap().amplitudes)
            .collect();
        let u = CMatrix::from_columns(&cols);
        assert!(unitarity_residual(&u) < 1e-12);
    }

    #[test]
    fn interaction_amplitudes_at_zero() {
        let sys = generate_system(3, 5, 1.0, 1.0).unwrap();
        let dyn_ = ExactDynamics::new(&sys, 0.8, 0.1, CoupledIndex::GROUND).unwrap();
        let rec = dyn_.amplitudes(0.0).unwrap();
        assert_eq!(rec.c(CoupledIndex::GROUND), c(1., 0.));
        assert_eq!(rec.total_probability(), 1.0);
    }

    #[test]
    fn interaction_amplitudes_constant_when_decoupled() {
        let sys = generate_system(4, 8, 1.0, 1.0).unwrap();
        let dyn_ = ExactDynamics::new(&sys, 0.8, 0.0, CoupledIndex::new(1, 2)).unwrap();
        let r0 = dyn_.amplitudes(0.0).unwrap();
        for &t in &[0.5, 3.0, 40.0] {
            assert!(dyn_.amplitudes(t).unwrap().max_abs_diff(&r0) < 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let h = n1_example();
        assert!(evolve(&h, &CoupledState::basis(2, CoupledIndex::GROUND), 1.0).is_err());
    }
}
