//! Coupling operators built from approximate eigenstates.
//!
//! Besides a user-supplied Hermitian `μ`, the coupling can be the rank-2
//! reflection `|ψ₀⟩⟨ψ_k| + |ψ_k⟩⟨ψ₀|` between two approximate eigenstates.
//! Vectors are expressed in the eigenbasis `{|φ_l⟩}` of the electronic
//! Hamiltonian, so `⟨φ_l|ψ⟩` is simply component `l`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::linalg::{inner, outer, CMatrix, CVector, C64};
use crate::random::{complex_gaussian, seeded_rng};

/// Tolerance for the orthogonality precondition of [`reflection_coupling`].
pub const ORTHOGONALITY_TOL: f64 = 1e-10;

/// Slack allowed when comparing a matrix element with its bound.
pub const BOUND_SLACK: f64 = 1e-12;

const NORM_TOL: f64 = 1e-12;

/// A normalized state and its split against one eigenvector `|φ_m⟩`:
/// `a = ⟨φ_m|ψ⟩` and `a_perp_norm = ‖(1 − |φ_m⟩⟨φ_m|)ψ‖`.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproxEigenstate {
    vector: CVector,
    target: usize,
    a: C64,
    a_perp_norm: f64,
}

impl ApproxEigenstate {
    pub fn new(vector: CVector, target: usize) -> Result<Self> {
        let n = vector.len();
        if target >= n {
            return Err(domain(format!("target index {target} out of range 0..{n}")));
        }
        if vector.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(domain("non-finite state component"));
        }
        let norm = vector.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(domain(format!("state norm {norm} is not 1")));
        }
        let a = vector[target];
        let a_perp_norm = vector
            .iter()
            .enumerate()
            .filter(|&(l, _)| l != target)
            .map(|(_, z)| z.norm_sqr())
            .sum::<f64>()
            .sqrt();
        Ok(Self { vector, target, a, a_perp_norm })
    }

    /// Normalizes first.
    pub fn normalized(vector: CVector, target: usize) -> Result<Self> {
        let norm = vector.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(domain("cannot normalize a zero or non-finite vector"));
        }
        Self::new(vector / C64::new(norm, 0.0), target)
    }

    /// The eigenvector `|φ_target⟩` itself.
    pub fn exact(n: usize, target: usize) -> Result<Self> {
        if target >= n {
            return Err(domain(format!("target index {target} out of range 0..{n}")));
        }
        let mut v = CVector::zeros(n);
        v[target] = C64::new(1.0, 0.0);
        Self::new(v, target)
    }

    pub fn vector(&self) -> &CVector {
        &self.vector
    }

    pub fn n(&self) -> usize {
        self.vector.len()
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn a(&self) -> C64 {
        self.a
    }

    pub fn a_perp_norm(&self) -> f64 {
        self.a_perp_norm
    }

    /// Largest `|⟨φ_l|ψ⟩|` any component may have: `|a|` on the target,
    /// `a⊥` elsewhere.
    fn component_bound(&self, l: usize) -> f64 {
        if l == self.target {
            self.a.norm()
        } else {
            self.a_perp_norm
        }
    }
}

fn check_pair(psi0: &ApproxEigenstate, psik: &ApproxEigenstate) -> Result<()> {
    if psi0.n() != psik.n() {
        return Err(domain(format!("state dimensions differ: {} vs {}", psi0.n(), psik.n())));
    }
    Ok(())
}

/// `μ = |ψ₀⟩⟨ψ_k| + |ψ_k⟩⟨ψ₀|`. The inputs must already be orthogonal;
/// use [`orthonormalize`] to enforce that explicitly.
pub fn reflection_coupling(psi0: &ApproxEigenstate, psik: &ApproxEigenstate) -> Result<CMatrix> {
    check_pair(psi0, psik)?;
    let overlap = inner(psik.vector(), psi0.vector()).norm();
    if overlap > ORTHOGONALITY_TOL {
        return Err(Error::Precondition(format!(
            "|<psi_k|psi_0>| = {overlap:e} exceeds {ORTHOGONALITY_TOL:e}"
        )));
    }
    Ok(outer(psi0.vector(), psik.vector()) + outer(psik.vector(), psi0.vector()))
}

/// Gram–Schmidt step: removes the `ψ₀` component from `ψ_k` and renormalizes.
pub fn orthonormalize(psi0: &ApproxEigenstate, psik: &ApproxEigenstate) -> Result<ApproxEigenstate> {
    check_pair(psi0, psik)?;
    let proj = inner(psi0.vector(), psik.vector());
    let v = psik.vector() - psi0.vector() * proj;
    if v.norm() < 1e-8 {
        return Err(domain("psi_k is (numerically) parallel to psi_0"));
    }
    ApproxEigenstate::normalized(v, psik.target())
}

/// How synthetic approximate eigenstates are perturbed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModel {
    /// Noise vectors live in the span of the spectator eigenvectors
    /// (`l ∉ {0, k}`) and are mutually orthogonal. Needs `N ≥ 4` for both
    /// states to be noisy; with `N = 3` only `ψ₀` is, with `N = 2` neither.
    Complement,
    /// `φ + ε·g` for Gaussian `g` on all components, then Gram–Schmidt.
    Generic,
}

/// Seeded pair `(ψ₀, ψ_k)` around `(φ₀, φ_k)` with perpendicular weights
/// `eps0`, `epsk` (exact for `Complement`, approximate for `Generic`).
pub fn synthetic_pair(
    n: usize,
    k: usize,
    eps0: f64,
    epsk: f64,
    seed: u64,
    model: NoiseModel,
) -> Result<(ApproxEigenstate, ApproxEigenstate)> {
    if n < 2 || k == 0 || k >= n {
        return Err(domain(format!("need N >= 2 and 0 < k < N, got N={n}, k={k}")));
    }
    if !(0.0..1.0).contains(&eps0) || !(0.0..1.0).contains(&epsk) {
        return Err(domain("noise weights must lie in [0, 1)"));
    }
    let mut rng = seeded_rng(seed);
    let phase = |rng: &mut _| {
        let z = complex_gaussian(rng);
        z / C64::new(z.norm().max(1e-300), 0.0)
    };
    match model {
        NoiseModel::Complement => {
            let spectators: Vec<usize> = (1..n).filter(|&l| l != k).collect();
            let draw = |rng: &mut _| {
                let mut v = CVector::zeros(n);
                for &l in &spectators {
                    v[l] = complex_gaussian(rng);
                }
                v
            };
            let mut n0 = CVector::zeros(n);
            let mut nk = CVector::zeros(n);
            if !spectators.is_empty() {
                n0 = draw(&mut rng);
                n0 /= C64::new(n0.norm(), 0.0);
            }
            if spectators.len() >= 2 {
                let g = draw(&mut rng);
                let v = &g - &n0 * inner(&n0, &g);
                nk = &v / C64::new(v.norm(), 0.0);
            }
            let e0 = if n0.norm() > 0.0 { eps0 } else { 0.0 };
            let ek = if nk.norm() > 0.0 { epsk } else { 0.0 };
            let mut v0 = n0 * C64::new(e0, 0.0);
            v0[0] = phase(&mut rng) * (1.0 - e0 * e0).sqrt();
            let mut vk = nk * C64::new(ek, 0.0);
            vk[k] = phase(&mut rng) * (1.0 - ek * ek).sqrt();
            Ok((ApproxEigenstate::normalized(v0, 0)?, ApproxEigenstate::normalized(vk, k)?))
        }
        NoiseModel::Generic => {
            let mut v0 = CVector::from_fn(n, |_, _| complex_gaussian(&mut rng) * eps0);
            v0[0] += C64::new(1.0, 0.0);
            let mut vk = CVector::from_fn(n, |_, _| complex_gaussian(&mut rng) * epsk);
            vk[k] += C64::new(1.0, 0.0);
            let psi0 = ApproxEigenstate::normalized(v0, 0)?;
            let psik = ApproxEigenstate::normalized(vk, k)?;
            let psik = orthonormalize(&psi0, &psik)?;
            Ok((psi0, psik))
        }
    }
}

/// Which bound an entry falls under. Entries in row or column 0 (other
/// than `(k,0)`, `(0,k)`) are the ground column, entries in row or column
/// `k` the target row, everything else the spectator block. Mirrored
/// entries share a class since `μ` is Hermitian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundClass {
    /// `|μ_{l,0}| ≤ b⊥|a|`, `l ≠ k`
    GroundColumn,
    /// `|μ_{k,l'}| ≤ |b|a⊥`, `l' ≠ 0`
    TargetRow,
    /// `|μ_{l,l'}| ≤ b⊥a⊥`
    Spectator,
}

impl BoundClass {
    pub const ALL: [BoundClass; 3] = [BoundClass::GroundColumn, BoundClass::TargetRow, BoundClass::Spectator];
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundEntry {
    pub row: usize,
    pub col: usize,
    pub class: BoundClass,
    pub value: f64,
    /// The single-product bound of the class.
    pub literal_bound: f64,
    /// `A(l)B(l') + B(l)A(l')` with `A`, `B` the componentwise limits from
    /// the two decompositions; holds for any orthonormal pair.
    pub rigorous_bound: f64,
    pub literal_holds: bool,
    pub rigorous_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassSummary {
    pub class: BoundClass,
    pub entries: usize,
    /// max `value / literal_bound`; 0/0 counts as 0, x/0 as infinity.
    pub max_ratio: f64,
    pub max_rigorous_ratio: f64,
    pub literal_violations: usize,
    pub rigorous_violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub target: usize,
    pub a: f64,
    pub a_perp: f64,
    pub b: f64,
    pub b_perp: f64,
    pub entries: Vec<BoundEntry>,
    pub classes: Vec<ClassSummary>,
}

impl BoundReport {
    pub fn literal_holds(&self) -> bool {
        self.entries.iter().all(|e| e.literal_holds)
    }

    pub fn rigorous_holds(&self) -> bool {
        self.entries.iter().all(|e| e.rigorous_holds)
    }

    pub fn class(&self, class: BoundClass) -> &ClassSummary {
        self.classes.iter().find(|s| s.class == class).expect("every class is summarized")
    }
}

fn ratio(value: f64, bound: f64) -> f64 {
    if bound > 0.0 {
        value / bound
    } else if value <= BOUND_SLACK {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Enumerates every entry of `mu` except `(k,0)`/`(0,k)` and compares it
/// with the matrix-element bounds implied by the decompositions of `psi0`
/// (against `φ₀`) and `psik` (against `φ_k`).
pub fn check_matrix_element_bounds(mu: &CMatrix, psi0: &ApproxEigenstate, psik: &ApproxEigenstate) -> Result<BoundReport> {
    check_pair(psi0, psik)?;
    let n = psi0.n();
    let k = psik.target();
    if psi0.target() != 0 || k == 0 {
        return Err(domain("psi0 must target level 0 and psik a level k > 0"));
    }
    if mu.shape() != (n, n) {
        return Err(domain("coupling dimension does not match the states"));
    }
    let (a, a_perp) = (psi0.a().norm(), psi0.a_perp_norm());
    let (b, b_perp) = (psik.a().norm(), psik.a_perp_norm());

    let mut entries = Vec::with_capacity(n * n);
    for row in 0..n {
        for col in 0..n {
            if (row, col) == (k, 0) || (row, col) == (0, k) {
                continue;
            }
            let (class, literal_bound) = if row == 0 || col == 0 {
                (BoundClass::GroundColumn, b_perp * a)
            } else if row == k || col == k {
                (BoundClass::TargetRow, b * a_perp)
            } else {
                (BoundClass::Spectator, b_perp * a_perp)
            };
            let rigorous_bound = psi0.component_bound(row) * psik.component_bound(col)
                + psik.component_bound(row) * psi0.component_bound(col);
            let value = mu[(row, col)].norm();
            entries.push(BoundEntry {
                row,
                col,
                class,
                value,
                literal_bound,
                rigorous_bound,
                literal_holds: value <= literal_bound + BOUND_SLACK,
                rigorous_holds: value <= rigorous_bound + BOUND_SLACK,
            });
        }
    }
    let classes = BoundClass::ALL
        .iter()
        .map(|&class| {
            let members: Vec<&BoundEntry> = entries.iter().filter(|e| e.class == class).collect();
            ClassSummary {
                class,
                entries: members.len(),
                max_ratio: members.iter().map(|e| ratio(e.value, e.literal_bound)).fold(0.0, f64::max),
                max_rigorous_ratio: members.iter().map(|e| ratio(e.value, e.rigorous_bound)).fold(0.0, f64::max),
                literal_violations: members.iter().filter(|e| !e.literal_holds).count(),
                rigorous_violations: members.iter().filter(|e| !e.rigorous_holds).count(),
            }
        })
        .collect();
    Ok(BoundReport { target: k, a, a_perp, b, b_perp, entries, classes })
}
