//! Matrix-level check of the LCU block-encoding of the reflection coupling.
//!
//! Registers are ordered `j`-ancilla, `R₀`-ancilla, system, with `j` the
//! slowest index, so the full space has dimension `4N`. With
//! `C[U] = |0⟩⟨0|_j⊗1⊗U₀ + |1⟩⟨1|_j⊗1⊗U₁` and
//! `R = X_j ⊗ (|0⟩⟨0|_{R₀}⊗1 + |1⟩⟨1|_{R₀}⊗Z₀)`, where `Z₀ = 2|0⟩⟨0| − 1`,
//! the select operator is `C[U]·R·C[U]†`: inverse-prepare under the old
//! `j` label, reflect and flip `j`, re-prepare under the new label.

use serde::Serialize;

use crate::error::{domain, Result};
use crate::linalg::{hermiticity_residual, kron, max_abs_diff, unitarity_residual, CMatrix, CVector, C64};

const UNITARY_TOL: f64 = 1e-10;

/// `U` with `U|0⟩ = |ψ⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparationUnitary {
    matrix: CMatrix,
}

impl PreparationUnitary {
    /// Phase-adjusted Householder reflection taking `|0⟩` to `psi`.
    pub fn from_state(psi: &CVector) -> Result<Self> {
        let n = psi.len();
        if n == 0 {
            return Err(domain("empty state"));
        }
        let norm = psi.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(domain(format!("state norm {norm} is not 1")));
        }
        let theta = psi[0].arg();
        let phase = C64::from_polar(1.0, theta);
        let mut v = -psi.clone();
        v[0] += phase;
        let vv = v.norm_squared();
        let mut h = CMatrix::identity(n, n);
        if vv > 1e-28 {
            h -= (&v * v.adjoint()) * C64::new(2.0 / vv, 0.0);
        }
        Self::from_matrix(h * phase)
    }

    pub fn from_matrix(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(domain("preparation unitary must be a non-empty square matrix"));
        }
        let r = unitarity_residual(&matrix);
        if r > UNITARY_TOL {
            return Err(domain(format!("matrix is not unitary (residual {r:e})")));
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    /// The prepared state, column 0.
    pub fn state(&self) -> CVector {
        self.matrix.column(0).into_owned()
    }
}

fn projector(n: usize, i: usize) -> CMatrix {
    let mut p = CMatrix::zeros(n, n);
    p[(i, i)] = C64::new(1.0, 0.0);
    p
}

/// The `(4N)×(4N)` select operator.
pub fn build_select(u0: &PreparationUnitary, u1: &PreparationUnitary) -> Result<CMatrix> {
    let n = u0.n();
    if u1.n() != n {
        return Err(domain(format!("preparation unitaries differ in size: {n} vs {}", u1.n())));
    }
    let id_s = CMatrix::identity(n, n);
    let id2 = CMatrix::identity(2, 2);
    let (p0, p1) = (projector(2, 0), projector(2, 1));
    let x = CMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);

    let control = kron(&p0, &kron(&id2, u0.matrix())) + kron(&p1, &kron(&id2, u1.matrix()));
    let z0 = projector(n, 0) * C64::new(2.0, 0.0) - &id_s;
    let reflect = kron(&x, &(kron(&p0, &id_s) + kron(&p1, &z0)));
    Ok(&control * reflect * control.adjoint())
}

/// `⟨G|S|G⟩` with `|G⟩ = |+⟩_j|+⟩_{R₀}`.
pub fn encoded_block(select: &CMatrix) -> Result<CMatrix> {
    let dim = select.nrows();
    if !select.is_square() || dim % 4 != 0 || dim == 0 {
        return Err(domain("select must be square with dimension 4N"));
    }
    let n = dim / 4;
    let mut block = CMatrix::zeros(n, n);
    for a in 0..4 {
        for b in 0..4 {
            block += select.view((a * n, b * n), (n, n));
        }
    }
    Ok(block * C64::new(0.25, 0.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockEncodingCheck {
    pub select: CMatrix,
    pub encoded_block: CMatrix,
}

impl BlockEncodingCheck {
    pub fn build(u0: &PreparationUnitary, u1: &PreparationUnitary) -> Result<Self> {
        let select = build_select(u0, u1)?;
        let encoded_block = encoded_block(&select)?;
        Ok(Self { select, encoded_block })
    }

    /// From the two states directly.
    pub fn from_states(psi0: &CVector, psi1: &CVector) -> Result<Self> {
        Self::build(&PreparationUnitary::from_state(psi0)?, &PreparationUnitary::from_state(psi1)?)
    }

    pub fn unitarity_residual(&self) -> f64 {
        unitarity_residual(&self.select)
    }

    pub fn hermiticity_residual(&self) -> f64 {
        hermiticity_residual(&self.encoded_block)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockEncodingVerdict {
    /// `μ ≈ c_norm · block`, fitted.
    pub c_norm: f64,
    pub max_residual: f64,
    pub unitarity_residual: f64,
    pub hermiticity_residual: f64,
}

/// Fits the real scalar `s` minimizing `‖block − s·μ‖_F`, reports
/// `c_norm = 1/s` and the max entrywise residual of `block − μ/c_norm`.
pub fn verify_block_encoding(check: &BlockEncodingCheck, mu_target: &CMatrix) -> Result<BlockEncodingVerdict> {
    let block = &check.encoded_block;
    if mu_target.shape() != block.shape() {
        return Err(domain("target coupling does not match the encoded block"));
    }
    let mm = mu_target.norm_squared();
    if mm == 0.0 {
        return Err(domain("target coupling is zero"));
    }
    let overlap: f64 = mu_target.iter().zip(block.iter()).map(|(m, b)| (m.conj() * b).re).sum();
    let s = overlap / mm;
    let c_norm = if s == 0.0 { f64::INFINITY } else { 1.0 / s };
    let max_residual = max_abs_diff(block, &(mu_target * C64::new(s, 0.0)));
    Ok(BlockEncodingVerdict {
        c_norm,
        max_residual,
        unitarity_residual: check.unitarity_residual(),
        hermiticity_residual: check.hermiticity_residual(),
    })
}

/// `λ_DF,Ĥ = λ_DF,H_e + 4λ + w/2`.
pub fn one_norm_total(lambda_df_he: f64, lambda: f64, w: f64) -> Result<f64> {
    if !(lambda_df_he >= 0.0) || !(lambda >= 0.0) || !(w >= 0.0) {
        return Err(domain(format!("one-norm inputs must be non-negative: ({lambda_df_he}, {lambda}, {w})")));
    }
    let total = lambda_df_he + 4.0 * lambda + 0.5 * w;
    if !total.is_finite() {
        return Err(domain("one-norm is not finite"));
    }
    Ok(total)
}
