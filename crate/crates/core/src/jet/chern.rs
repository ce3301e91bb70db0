//! Chern connection of a metric field in a holomorphic frame, the covariant
//! derivative on endomorphisms, and the harmonicity curvature defect.
//!
//! With `h(u, v) = v* H u` and a holomorphic frame, metric compatibility
//! for constant-coefficient sections reads `∂ᵢH = H Aᵢ`, so
//! `Aᵢ = H⁻¹ ∂ᵢH` and `D′ᵢ s = ∂ᵢ s + Aᵢ s`. The (1,1) curvature is
//! `[D′ᵢ, ∂̄ⱼ] = −∂̄ⱼAᵢ`, and with `Φᵢ = −Cᵢ` the third harmonic relation
//! becomes `∂̄ⱼAᵢ = [Cᵢ, Cⱼ†]`.

use super::field::MatrixField;
use super::FieldResidual;
use crate::error::{Error, Result};
use crate::linalg::cholesky;

/// Matrices of `D′` in a frame, one per coordinate direction.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectionData {
    pub matrices: Vec<MatrixField>,
    pub frame_is_holomorphic: bool,
}

impl ConnectionData {
    pub fn flat(rank: usize, dim: usize, degree: usize) -> Self {
        Self { matrices: vec![MatrixField::zeros(rank, rank, dim, degree); dim], frame_is_holomorphic: true }
    }

    pub fn dim(&self) -> usize {
        self.matrices.len()
    }
}

pub fn chern_connection(h: &MatrixField, tol: f64) -> Result<ConnectionData> {
    if !h.is_square() {
        return Err(Error::dims("metric field must be square"));
    }
    let h0 = h.at_origin();
    if !h0.is_hermitian(tol) {
        return Err(Error::NotPositiveDefinite("metric is not Hermitian at the origin".into()));
    }
    cholesky(&h0, tol)?;
    let h_inv = h.inverse()?;
    let matrices = (0..h.dim())
        .map(|i| h_inv.try_mul(&h.d_holo(i)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConnectionData { matrices, frame_is_holomorphic: true })
}

/// `∂ᵢH − H Aᵢ`, certified through degree `d − 1`.
pub fn compatibility_residual(h: &MatrixField, conn: &ConnectionData) -> Result<FieldResidual> {
    let mut acc = FieldResidual::zero(h.degree(), h.degree().saturating_sub(1));
    for (i, a) in conn.matrices.iter().enumerate() {
        acc.absorb(&h.d_holo(i)?.try_sub(&h.try_mul(a)?)?);
    }
    Ok(acc)
}

/// Components `∂ᵢP + [Aᵢ, P]` of `D′P` for an endomorphism field `P`.
pub fn covariant_d(conn: &ConnectionData, p: &MatrixField) -> Result<Vec<MatrixField>> {
    conn.matrices
        .iter()
        .enumerate()
        .map(|(i, a)| {
            if a.rows() != p.rows() || !p.is_square() {
                return Err(Error::dims("connection and endomorphism ranks differ"));
            }
            p.d_holo(i)?.try_add(&a.commutator(p)?)
        })
        .collect()
}

/// Field h-adjoint `P† = H⁻¹ P* H`.
pub fn h_adjoint_field(p: &MatrixField, h: &MatrixField) -> Result<MatrixField> {
    h.inverse()?.try_mul(&p.adjoint())?.try_mul(h)
}

/// Defect of `D′∂̄ + ∂̄D′ = −(ΦΦ† + Φ†Φ)`, i.e. `∂̄ⱼAᵢ − [Cᵢ, Cⱼ†]` over all
/// `(i, j)`, certified through degree `d − 2`.
pub fn curvature_residual(conn: &ConnectionData, higgs: &[MatrixField], h: &MatrixField) -> Result<FieldResidual> {
    let m = conn.dim();
    if higgs.len() != m || h.dim() != m {
        return Err(Error::dims(format!("{} Higgs components for base dimension {m}", higgs.len())));
    }
    let daggers = higgs.iter().map(|c| h_adjoint_field(c, h)).collect::<Result<Vec<_>>>()?;
    let mut acc = FieldResidual::zero(h.degree(), h.degree().saturating_sub(2));
    for i in 0..m {
        for j in 0..m {
            let lhs = conn.matrices[i].d_anti(j)?;
            let rhs = higgs[i].commutator(&daggers[j])?;
            acc.absorb(&lhs.try_sub(&rhs)?);
        }
    }
    Ok(acc)
}
