//! Perturbative coefficients `c^{(m)}_{α,j}(t)` of the coupled evolution.
//!
//! Order `m` follows from order `m − 1` through
//!
//! ```text
//! ∂ₜ c^{(m)}_{α,j} = −i Σ_k e^{−i(E_{1−α,k} − E_{α,j})t} c^{(m−1)}_{1−α,k} μ_{j,k},   c^{(m)}(0) = 0,
//! ```
//!
//! which the table evaluates symbolically on [`ExpPoly`] values. The m = 1
//! and m = 2 closed forms are kept as independent transcriptions for
//! cross-checking.

use crate::error::{domain, Error, Result};
use crate::evolution::AmplitudeRecord;
use crate::exppoly::{ExpPoly, Term};
use crate::linalg::{CMatrix, C64, I};
use crate::spectral::{CoupledIndex, ElectronicSystem};

/// Highest order the table will build.
pub const MAX_ORDER: usize = 6;

#[derive(Debug, Clone)]
pub struct PerturbationTable {
    n: usize,
    w: f64,
    tol: f64,
    init: CoupledIndex,
    energies: Vec<f64>,
    coupling: CMatrix,
    // coeffs[m][flat index]
    coeffs: Vec<Vec<ExpPoly>>,
}

impl PerturbationTable {
    /// Build orders `0..=order` for the initial product state `init`.
    pub fn build(sys: &ElectronicSystem, w: f64, order: usize, init: CoupledIndex) -> Result<Self> {
        if order > MAX_ORDER {
            return Err(Error::Config(format!("perturbation order {order} exceeds cap {MAX_ORDER}")));
        }
        if init.k >= sys.n() {
            return Err(domain("initial level out of range"));
        }
        if !w.is_finite() {
            return Err(domain("w must be finite"));
        }
        let n = sys.n();
        let tol = sys.degeneracy_tol(w);
        let energy = |idx: CoupledIndex| sys.energies()[idx.k] + idx.sign() * 0.5 * w;
        let mu = sys.coupling();

        let mut zeroth = vec![ExpPoly::zero(); 2 * n];
        zeroth[init.flat(n)] = ExpPoly::constant(C64::new(1.0, 0.0));
        let mut coeffs = vec![zeroth];

        for m in 1..=order {
            let prev = &coeffs[m - 1];
            let mut next = Vec::with_capacity(2 * n);
            for target in CoupledIndex::all(n) {
                let mut integrand = ExpPoly::zero();
                for k in 0..n {
                    let source = CoupledIndex::new(1 - target.alpha, k);
                    let c_prev = &prev[source.flat(n)];
                    let mu_jk = mu[(target.k, k)];
                    if c_prev.is_empty() || mu_jk.norm() == 0.0 {
                        continue;
                    }
                    let delta = energy(source) - energy(target);
                    integrand.extend(&c_prev.phase_shift(delta, tol)?.scaled(-I * mu_jk));
                }
                next.push(integrand.integrate_from_zero(tol)?);
            }
            coeffs.push(next);
        }

        Ok(Self { n, w, tol, init, energies: sys.energies().to_vec(), coupling: mu.clone(), coeffs })
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn init(&self) -> CoupledIndex {
        self.init
    }

    /// Frequency merge tolerance used during construction.
    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn coeff(&self, m: usize, idx: CoupledIndex) -> &ExpPoly {
        &self.coeffs[m][idx.flat(self.n)]
    }

    fn energy(&self, idx: CoupledIndex) -> f64 {
        self.energies[idx.k] + idx.sign() * 0.5 * self.w
    }

    /// Right-hand side of the order-`m` equation evaluated at `t`.
    pub fn rhs(&self, m: usize, idx: CoupledIndex, t: f64) -> C64 {
        assert!(m >= 1 && m <= self.order());
        (0..self.n)
            .map(|k| {
                let source = CoupledIndex::new(1 - idx.alpha, k);
                let delta = self.energy(source) - self.energy(idx);
                -I * (-I * delta * t).exp() * self.coeff(m - 1, source).eval(t) * self.coupling[(idx.k, k)]
            })
            .sum()
    }

    /// `Σ_{m ≤ order} λ^m c^{(m)}(t)`, not renormalized.
    pub fn truncated_to(&self, order: usize, lambda: f64, t: f64) -> AmplitudeRecord {
        assert!(order <= self.order(), "requested order {order} above table order {}", self.order());
        let coeffs = (0..2 * self.n)
            .map(|p| {
                let mut acc = C64::new(0.0, 0.0);
                let mut lam_m = 1.0;
                for m in 0..=order {
                    acc += self.coeffs[m][p].eval(t) * lam_m;
                    lam_m *= lambda;
                }
                acc
            })
            .collect();
        AmplitudeRecord::new(self.n, coeffs)
    }

    /// Total number of stored terms across all orders.
    pub fn term_count(&self) -> usize {
        self.coeffs.iter().flatten().map(ExpPoly::len).sum()
    }
}

/// Raw truncated series using every order in the table.
pub fn truncated_amplitudes(table: &PerturbationTable, lambda: f64, t: f64) -> Result<AmplitudeRecord> {
    if !(lambda >= 0.0) {
        return Err(domain("lambda must be non-negative"));
    }
    Ok(table.truncated_to(table.order(), lambda, t))
}

/// `(e^{−iΔt} − 1)/Δ`, or its limit `−it` when `|Δ| ≤ tol`.
fn phase_fraction(delta: f64, tol: f64) -> Vec<Term> {
    if delta.abs() <= tol {
        vec![Term::new(-I, 1, 0.0)]
    } else {
        let inv = C64::new(1.0 / delta, 0.0);
        vec![Term::new(inv, 0, delta), Term::new(-inv, 0, 0.0)]
    }
}

/// First-order coefficient for the initial state |0⟩|φ_0⟩:
/// `c^{(1)}_{1,j} = μ_{j,0}(e^{−i(E_{0,0}−E_{1,j})t} − 1)/(E_{0,0} − E_{1,j})`, zero for α = 0.
pub fn closed_form_c1(sys: &ElectronicSystem, w: f64, alpha: u8, j: usize) -> Result<ExpPoly> {
    if j >= sys.n() {
        return Err(domain("level index out of range"));
    }
    let tol = sys.degeneracy_tol(w);
    if alpha == 0 {
        return Ok(ExpPoly::zero());
    }
    let delta = sys.coupled_energy(w, CoupledIndex::GROUND)? - sys.coupled_energy(w, CoupledIndex::new(1, j))?;
    let mu = sys.coupling()[(j, 0)];
    let terms = phase_fraction(delta, tol).into_iter().map(|t| Term::new(t.coeff * mu, t.power, t.freq)).collect();
    ExpPoly::from_terms(terms, tol)
}

/// Second-order coefficient for the initial state |0⟩|φ_0⟩, transcribed
/// term by term:
///
/// ```text
/// c^{(2)}_{0,j} = Σ_k μ_{j,k}μ_{k,0}/(E_{0,0} − E_{1,k}) · [ F(E_{0,0} − E_{0,j}) − F(E_{1,k} − E_{0,j}) ]
/// ```
///
/// with `F(Δ) = (e^{−iΔt} − 1)/Δ`. For `j = 0` (and any level degenerate
/// with it) the first bracket is its `Δ → 0` limit `−it`. Fails when a
/// first-order denominator `E_{0,0} − E_{1,k}` vanishes, where the formula
/// does not apply.
pub fn closed_form_c2(sys: &ElectronicSystem, w: f64, alpha: u8, j: usize) -> Result<ExpPoly> {
    if j >= sys.n() {
        return Err(domain("level index out of range"));
    }
    let tol = sys.degeneracy_tol(w);
    if alpha == 1 {
        return Ok(ExpPoly::zero());
    }
    let e = |a: u8, k: usize| sys.energies()[k] + CoupledIndex::new(a, k).sign() * 0.5 * w;
    let mu = sys.coupling();
    let mut terms = Vec::new();
    for k in 0..sys.n() {
        let weight = mu[(j, k)] * mu[(k, 0)];
        if weight.norm() == 0.0 {
            continue;
        }
        let denom = e(0, 0) - e(1, k);
        if denom.abs() <= tol {
            return Err(Error::Resonance(format!("E_(0,0) − E_(1,{k}) vanishes; closed form undefined")));
        }
        let pref = weight / denom;
        for t in phase_fraction(e(0, 0) - e(0, j), tol) {
            terms.push(Term::new(t.coeff * pref, t.power, t.freq));
        }
        for t in phase_fraction(e(1, k) - e(0, j), tol) {
            terms.push(Term::new(-t.coeff * pref, t.power, t.freq));
        }
    }
    ExpPoly::from_terms(terms, tol)
}

/// `sin(Dt/2)/D`, with the resonant limit `t/2` for `|D| ≤ tol`.
fn half_sinc(d: f64, t: f64, tol: f64) -> f64 {
    if d.abs() <= tol {
        0.5 * t
    } else {
        (0.5 * d * t).sin() / d
    }
}

/// Normalization `Z = 1 + 4λ² Σ_j |μ_{0,j}|² sin²((w_{j,0} − w)t/2)/(w_{j,0} − w)²`.
///
/// The sum runs over every level, `j = 0` included.
pub fn first_order_normalization(sys: &ElectronicSystem, w: f64, lambda: f64, t: f64) -> f64 {
    let tol = sys.degeneracy_tol(w);
    let e0 = sys.energies()[0];
    let sum: f64 = (0..sys.n())
        .map(|j| {
            let d = sys.energies()[j] - e0 - w;
            sys.coupling()[(0, j)].norm_sqr() * half_sinc(d, t, tol).powi(2)
        })
        .sum();
    1.0 + 4.0 * lambda * lambda * sum
}

/// Normalized first-order state, conditional-free:
///
/// ```text
/// ( |0⟩|φ_0⟩ − 2iλ Σ_j μ_{0,j} e^{i(E_j+E_0)t/2} sin((w_{j,0}−w)t/2)/(w_{j,0}−w) |1⟩|φ_j⟩ ) / √Z
/// ```
///
/// Phases follow that expression; only the moduli are compared against the
/// exact dynamics.
pub fn first_order_state(sys: &ElectronicSystem, w: f64, lambda: f64, t: f64) -> Result<AmplitudeRecord> {
    if !(lambda >= 0.0) {
        return Err(domain("lambda must be non-negative"));
    }
    let n = sys.n();
    let tol = sys.degeneracy_tol(w);
    let e = sys.energies();
    let norm = first_order_normalization(sys, w, lambda, t).sqrt();
    let mut coeffs = vec![C64::new(0.0, 0.0); 2 * n];
    coeffs[0] = C64::new(1.0 / norm, 0.0);
    for j in 0..n {
        let d = e[j] - e[0] - w;
        let phase = (I * (e[j] + e[0]) * t * 0.5).exp();
        coeffs[n + j] = -2.0 * I * lambda * sys.coupling()[(0, j)] * phase * half_sinc(d, t, tol) / norm;
    }
    Ok(AmplitudeRecord::new(n, coeffs))
}
