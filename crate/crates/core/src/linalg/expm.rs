use super::matrix::CMatrix;

/// Taylor terms used on the scaled matrix (`‖A/2^s‖₁ ≤ 1/2`); the
/// truncation error is below `2^-30 / 30!`.
const TAYLOR_TERMS: usize = 30;

/// Matrix exponential by scaling and squaring with a Taylor kernel.
///
/// Total on square matrices; panics on a non-square input.
pub fn matrix_exp(a: &CMatrix) -> CMatrix {
    assert!(a.is_square(), "matrix_exp needs a square matrix");
    let n = a.rows();
    let norm = a.norm_one();
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scaled = a.scale_real(0.5f64.powi(squarings as i32));

    let mut sum = CMatrix::identity(n);
    let mut term = CMatrix::identity(n);
    for k in 1..=TAYLOR_TERMS {
        term = (&term * &scaled).scale_real(1.0 / k as f64);
        sum = &sum + &term;
        if term.max_abs() <= f64::EPSILON * 1e-3 * sum.max_abs() {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}
