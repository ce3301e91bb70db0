//! Adjoints with respect to the Hermitian form `h` and the bilinear form
//! `g(u, v) = h(u, κ v)`.
//!
//! Conventions: `h(u, v) = v* H u` (linear in the first slot) and the real
//! structure acts as `κ v = K conj(v)`. Then `g(u, v) = vᵀ (K* H) u` is
//! complex bilinear.

use super::lu::inverse;
use super::matrix::CMatrix;
use crate::error::{Error, Result};

/// Gram matrix of a positive-definite Hermitian form.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix(CMatrix);

impl GramMatrix {
    pub fn new(h: CMatrix, tol: f64) -> Result<Self> {
        if !h.is_square() {
            return Err(Error::dims("Gram matrix must be square"));
        }
        let norm = h.norm_fro().max(f64::MIN_POSITIVE);
        let defect = h.hermitian_defect();
        if defect > tol * norm {
            return Err(Error::NotHermitian { defect: defect / norm });
        }
        super::cholesky(&h, tol)?;
        Ok(Self(h))
    }

    pub fn identity(n: usize) -> Self {
        Self(CMatrix::identity(n))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    /// `h(u, v) = v* H u`.
    pub fn form(&self, u: &[super::C64], v: &[super::C64]) -> super::C64 {
        let hu = self.0.mul_vec(u);
        v.iter().zip(&hu).map(|(a, b)| a.conj() * b).sum()
    }
}

/// `‖K conj(K) − I‖_F`.
pub fn real_structure_defect(k: &CMatrix) -> f64 {
    if !k.is_square() {
        return f64::INFINITY;
    }
    (&(k * &k.conj()) - &CMatrix::identity(k.rows())).norm_fro()
}

/// The h-adjoint `P† = H⁻¹ P* H`, characterized by `h(Pu, v) = h(u, P†v)`.
pub fn h_adjoint(p: &CMatrix, h: &GramMatrix) -> Result<CMatrix> {
    if !p.is_square() || p.rows() != h.dim() {
        return Err(Error::dims(format!("operator {}x{} vs metric of rank {}", p.rows(), p.cols(), h.dim())));
    }
    let hinv = inverse(h.matrix())?;
    Ok(&(&hinv * &p.adjoint()) * h.matrix())
}

/// The g-adjoint `P* = G⁻ᵀ Pᵀ Gᵀ` with `G = K* H`, characterized by
/// `g(Pu, v) = g(u, P*v)`.
pub fn g_adjoint(p: &CMatrix, h: &GramMatrix, k: &CMatrix, tol: f64) -> Result<CMatrix> {
    if !p.is_square() || p.rows() != h.dim() || k.rows() != h.dim() || !k.is_square() {
        return Err(Error::dims("g_adjoint operand sizes"));
    }
    let defect = real_structure_defect(k);
    if defect > tol * (k.rows() as f64).sqrt().max(1.0) {
        return Err(Error::InvalidRealStructure { defect });
    }
    let g = &k.adjoint() * h.matrix();
    let gt = g.transpose();
    let gt_inv = inverse(&gt)?;
    Ok(&(&gt_inv * &p.transpose()) * &gt)
}
