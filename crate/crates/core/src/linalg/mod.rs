//! Dense complex linear algebra kernels.

mod adjoint;
mod eigen;
mod expm;
mod lu;
mod matrix;

pub use adjoint::{g_adjoint, h_adjoint, real_structure_defect, GramMatrix};
pub use eigen::{eigenvalues, hermitian_eigen, HermitianEigen};
pub use expm::matrix_exp;
pub use lu::{cholesky, inverse, solve_dense, DenseSolution, Lu};
pub use matrix::{CMatrix, C64};
pub(crate) use matrix::ZERO;

/// Default relative tolerance used across the crate.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Eigenvalues of `Q` when `Q` is self-adjoint for the positive form `H`:
/// `R Q R⁻¹` is Hermitian for the Cholesky factor `H = R* R`.
///
/// Returns the Hermitian eigen-decomposition in the orthonormal frame and
/// the matrix whose columns express that eigenframe in the original one.
pub fn self_adjoint_eigen(q: &CMatrix, h: &GramMatrix, tol: f64) -> crate::Result<(HermitianEigen, CMatrix)> {
    let l = cholesky(h.matrix(), tol)?;
    let r = l.adjoint();
    let r_inv = inverse(&r)?;
    let qo = &(&r * q) * &r_inv;
    // Q† = Q makes qo Hermitian up to roundoff; symmetrize within tolerance
    let eig = hermitian_eigen(&qo, tol.max(1e-12))?;
    let frame = &r_inv * &eig.vectors;
    Ok((eig, frame))
}
