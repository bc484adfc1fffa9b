//! The electronic system and coupled-basis energy bookkeeping.
//!
//! The product basis |α⟩|φ_k⟩ is flattened qubit-major: position `α·N + k`.
//! Uncoupled energies are `E_{α,k} = E_k + (−1)^α w/2`, so the ancilla
//! operator ẑ has eigenvalue +1 on α = 0.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::linalg::{hermiticity_residual, is_finite, max_abs, CMatrix};

/// Relative tolerance for accepting a coupling matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Eigenvalues of the electronic Hamiltonian and the coupling operator
/// expressed in its eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct ElectronicSystem {
    energies: Vec<f64>,
    coupling: CMatrix,
}

impl ElectronicSystem {
    /// Validates and sorts. Energies may arrive in any order; the coupling
    /// matrix is permuted along with them.
    pub fn new(energies: Vec<f64>, coupling: CMatrix) -> Result<Self> {
        let n = energies.len();
        if n < 2 {
            return Err(domain(format!("need at least 2 levels, got {n}")));
        }
        if coupling.shape() != (n, n) {
            return Err(domain(format!(
                "coupling is {}x{}, expected {n}x{n}",
                coupling.nrows(),
                coupling.ncols()
            )));
        }
        if energies.iter().any(|e| !e.is_finite()) || coupling.iter().any(|&z| !is_finite(z)) {
            return Err(domain("non-finite energy or coupling entry"));
        }
        check_hermitian(&coupling)?;

        let mut perm: Vec<usize> = (0..n).collect();
        perm.sort_by(|&a, &b| energies[a].total_cmp(&energies[b]));
        let sorted = perm.iter().map(|&p| energies[p]).collect();
        let permuted = CMatrix::from_fn(n, n, |i, j| coupling[(perm[i], perm[j])]);
        Ok(Self { energies: sorted, coupling: permuted })
    }

    pub fn n(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn coupling(&self) -> &CMatrix {
        &self.coupling
    }

    /// Same energies, different coupling operator.
    pub fn with_coupling(&self, coupling: CMatrix) -> Result<Self> {
        if coupling.shape() != (self.n(), self.n()) {
            return Err(domain("coupling dimension does not match the system"));
        }
        check_hermitian(&coupling)?;
        Ok(Self { energies: self.energies.clone(), coupling })
    }

    fn check_index(&self, k: usize) -> Result<()> {
        if k >= self.n() {
            return Err(domain(format!("level index {k} out of range 0..{}", self.n())));
        }
        Ok(())
    }

    /// `E_j − E_k`
    pub fn gap(&self, j: usize, k: usize) -> Result<f64> {
        self.check_index(j)?;
        self.check_index(k)?;
        Ok(self.energies[j] - self.energies[k])
    }

    /// `E_k + (−1)^α w/2`
    pub fn coupled_energy(&self, w: f64, idx: CoupledIndex) -> Result<f64> {
        self.check_index(idx.k)?;
        Ok(self.energies[idx.k] + idx.sign() * 0.5 * w)
    }

    /// `E_{to} − E_{from}` in the uncoupled product basis.
    pub fn transition_frequency(&self, w: f64, from: CoupledIndex, to: CoupledIndex) -> Result<f64> {
        Ok(self.coupled_energy(w, to)? - self.coupled_energy(w, from)?)
    }

    /// Merge threshold for nearly equal frequencies: `1e−9·(max|E| + |w| + 1)`.
    pub fn degeneracy_tol(&self, w: f64) -> f64 {
        let emax = self.energies.iter().fold(0.0f64, |a, e| a.max(e.abs()));
        1e-9 * (emax + w.abs() + 1.0)
    }

    /// Smallest nonzero `|w_{j,0} − w|` over all levels `j`, if any.
    pub fn min_nonzero_detuning(&self, w: f64) -> Option<f64> {
        let tol = self.degeneracy_tol(w);
        self.energies
            .iter()
            .map(|e| (e - self.energies[0] - w).abs())
            .filter(|d| *d > tol)
            .min_by(f64::total_cmp)
    }

    /// Smallest nonzero |transition frequency| between any two product
    /// states connected by the coupling (α flips, μ_{jk} ≠ 0).
    pub fn min_nonzero_coupled_frequency(&self, w: f64) -> Option<f64> {
        let tol = self.degeneracy_tol(w);
        let n = self.n();
        let mut best: Option<f64> = None;
        for j in 0..n {
            for k in 0..n {
                if self.coupling[(j, k)].norm() == 0.0 {
                    continue;
                }
                for alpha in 0..2u8 {
                    let d = (self.energies[k] - self.energies[j]
                        + (CoupledIndex::new(1 - alpha, k).sign() - CoupledIndex::new(alpha, j).sign()) * 0.5 * w)
                        .abs();
                    if d > tol {
                        best = Some(best.map_or(d, |b: f64| b.min(d)));
                    }
                }
            }
        }
        best
    }
}

fn check_hermitian(m: &CMatrix) -> Result<()> {
    let scale = max_abs(m);
    let res = hermiticity_residual(m);
    if res > HERMITIAN_TOL * scale {
        return Err(Error::Domain(format!("coupling is not Hermitian (residual {res:.3e})")));
    }
    Ok(())
}

/// Label (α, k) of the product state |α⟩|φ_k⟩.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CoupledIndex {
    pub alpha: u8,
    pub k: usize,
}

impl CoupledIndex {
    pub const GROUND: CoupledIndex = CoupledIndex { alpha: 0, k: 0 };

    pub fn new(alpha: u8, k: usize) -> Self {
        assert!(alpha < 2, "qubit label must be 0 or 1");
        Self { alpha, k }
    }

    /// `(−1)^α`
    pub fn sign(self) -> f64 {
        if self.alpha == 0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn flat(self, n: usize) -> usize {
        self.alpha as usize * n + self.k
    }

    pub fn from_flat(pos: usize, n: usize) -> Self {
        Self::new((pos / n) as u8, pos % n)
    }

    /// Same level, ancilla flipped.
    pub fn flipped(self) -> Self {
        Self { alpha: 1 - self.alpha, k: self.k }
    }

    /// All 2N labels in flattened order.
    pub fn all(n: usize) -> impl Iterator<Item = CoupledIndex> {
        (0..2 * n).map(move |p| CoupledIndex::from_flat(p, n))
    }
}

/// Ancilla splitting `w`, coupling strength `λ` and evolution time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    pub w: f64,
    pub lambda: f64,
    pub t: f64,
}

impl ProtocolParams {
    pub fn new(w: f64, lambda: f64, t: f64) -> Result<Self> {
        if !w.is_finite() {
            return Err(domain("w must be finite"));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(domain("lambda must be finite and non-negative"));
        }
        if !(t >= 0.0 && t.is_finite()) {
            return Err(domain("t must be finite and non-negative"));
        }
        Ok(Self { w, lambda, t })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use proptest::prelude::*;

    fn two_level() -> ElectronicSystem {
        let mu = CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]);
        ElectronicSystem::new(vec![0.0, 1.0], mu).unwrap()
    }

    #[test]
    fn coupled_energy_examples() {
        let s = two_level();
        assert_eq!(s.coupled_energy(0.0, CoupledIndex::new(1, 1)).unwrap(), 1.0);
        assert!((s.coupled_energy(0.4, CoupledIndex::new(0, 0)).unwrap() - 0.2).abs() < 1e-15);
        assert!((s.coupled_energy(0.4, CoupledIndex::new(1, 1)).unwrap() - 0.8).abs() < 1e-15);
        assert!(s.coupled_energy(0.4, CoupledIndex::new(0, 2)).is_err());
    }

    #[test]
    fn gap_examples() {
        let s = two_level();
        assert_eq!(s.gap(1, 1).unwrap(), 0.0);
        assert_eq!(s.gap(1, 0).unwrap(), 1.0);
        let s3 = ElectronicSystem::new(vec![0.1, 0.9, 2.0], CMatrix::zeros(3, 3)).unwrap();
        assert!((s3.gap(2, 1).unwrap() - 1.1).abs() < 1e-15);
        assert!(s3.gap(3, 0).is_err());
    }

    #[test]
    fn transition_frequency_examples() {
        let s = two_level();
        let f = |a, b| s.transition_frequency(0.4, a, b).unwrap();
        assert!((f(CoupledIndex::new(0, 0), CoupledIndex::new(1, 1)) - 0.6).abs() < 1e-15);
        assert!((f(CoupledIndex::new(1, 0), CoupledIndex::new(0, 1)) - 1.4).abs() < 1e-15);
        assert_eq!(f(CoupledIndex::new(1, 1), CoupledIndex::new(1, 1)), 0.0);
    }

    #[test]
    fn construction_sorts_and_permutes() {
        let mu = CMatrix::from_row_slice(
            3,
            3,
            &[c(0., 0.), c(1., 0.), c(2., 1.), c(1., 0.), c(5., 0.), c(3., 0.), c(2., -1.), c(3., 0.), c(7., 0.)],
        );
        let s = ElectronicSystem::new(vec![2.0, 0.5, 1.0], mu).unwrap();
        assert_eq!(s.energies(), &[0.5, 1.0, 2.0]);
        // old index 1 (E=0.5) is now 0, old 2 (E=1.0) is now 1
        assert_eq!(s.coupling()[(0, 0)], c(5., 0.));
        assert_eq!(s.coupling()[(0, 1)], c(3., 0.));
        assert_eq!(s.coupling()[(2, 1)], c(2., 1.));
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(ElectronicSystem::new(vec![0.0], CMatrix::zeros(1, 1)).is_err());
        assert!(ElectronicSystem::new(vec![0.0, f64::NAN], CMatrix::zeros(2, 2)).is_err());
        let nh = CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(2., 0.), c(0., 0.)]);
        assert!(ElectronicSystem::new(vec![0.0, 1.0], nh).is_err());
        assert!(ElectronicSystem::new(vec![0.0, 1.0], CMatrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn flat_index_is_a_bijection() {
        let n = 5;
        let all: Vec<_> = CoupledIndex::all(n).collect();
        assert_eq!(all.len(), 2 * n);
        for (p, idx) in all.iter().enumerate() {
            assert_eq!(idx.flat(n), p);
        }
    }

    proptest! {
        #[test]
        fn ancilla_up_transition_is_gap_minus_w(
            es in prop::collection::vec(-5.0f64..5.0, 2..6),
            w in -3.0f64..3.0,
            a in 0usize..6, b in 0usize..6,
        ) {
            let n = es.len();
            let s = ElectronicSystem::new(es, CMatrix::zeros(n, n)).unwrap();
            let (k_from, k_to) = (a % n, b % n);
            let tf = s.transition_frequency(w, CoupledIndex::new(0, k_from), CoupledIndex::new(1, k_to)).unwrap();
            let expect = s.gap(k_to, k_from).unwrap() - w;
            prop_assert!((tf - expect).abs() <= 1e-14 * (1.0 + expect.abs() + w.abs()));
        }

        #[test]
        fn coupled_energy_slope_is_half(es in prop::collection::vec(-5.0f64..5.0, 2..5), w in -3.0f64..3.0) {
            let n = es.len();
            let s = ElectronicSystem::new(es, CMatrix::zeros(n, n)).unwrap();
            for idx in CoupledIndex::all(n) {
                let e1 = s.coupled_energy(w, idx).unwrap();
                let e2 = s.coupled_energy(w + 1.0, idx).unwrap();
                prop_assert!((e2 - e1 - 0.5 * idx.sign()).abs() < 1e-12);
            }
        }
    }
}
