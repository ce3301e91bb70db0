use super::matrix::{CMatrix, C64, ONE, ZERO};
use crate::error::{Error, Result};

/// Pivots smaller than this times `max|A|` are treated as zero.
const PIVOT_THRESHOLD: f64 = 1e-14;

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    lu: CMatrix,
    perm: Vec<usize>,
    norm_one: f64,
}

impl Lu {
    pub fn factor(a: &CMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::dims(format!("LU of a {}x{} matrix", a.rows(), a.cols())));
        }
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.max_abs().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if pmax <= PIVOT_THRESHOLD * scale {
                return Err(Error::Singular { pivot: pmax });
            }
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f == ZERO {
                    continue;
                }
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= f * u;
                }
            }
        }
        Ok(Self { n, lu, perm, norm_one: a.norm_one() })
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        assert_eq!(b.len(), self.n, "rhs length");
        let n = self.n;
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        x
    }

    pub fn inverse(&self) -> CMatrix {
        let mut inv = CMatrix::zeros(self.n, self.n);
        let mut e = vec![ZERO; self.n];
        for j in 0..self.n {
            e.iter_mut().for_each(|x| *x = ZERO);
            e[j] = ONE;
            inv.set_column(j, &self.solve(&e));
        }
        inv
    }

    /// 1-norm condition number `‖A‖₁‖A⁻¹‖₁`, computed from the explicit inverse.
    pub fn condition(&self) -> f64 {
        self.norm_one * self.inverse().norm_one()
    }

    pub fn determinant(&self) -> C64 {
        let mut det = ONE;
        for i in 0..self.n {
            det *= self.lu[(i, i)];
        }
        // parity of the permutation
        let mut seen = vec![false; self.n];
        let mut sign = 1.0;
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                i = self.perm[i];
                len += 1;
            }
            if len % 2 == 0 {
                sign = -sign;
            }
        }
        det * sign
    }
}

/// Solution of a dense system together with its 1-norm condition number.
#[derive(Debug, Clone)]
pub struct DenseSolution {
    pub x: Vec<C64>,
    pub condition: f64,
}

pub fn solve_dense(a: &CMatrix, b: &[C64]) -> Result<DenseSolution> {
    if a.rows() != b.len() {
        return Err(Error::dims(format!("{}x{} system with rhs of length {}", a.rows(), a.cols(), b.len())));
    }
    let lu = Lu::factor(a)?;
    Ok(DenseSolution { x: lu.solve(b), condition: lu.condition() })
}

pub fn inverse(a: &CMatrix) -> Result<CMatrix> {
    Ok(Lu::factor(a)?.inverse())
}

/// Cholesky factor `L` (lower triangular) with `H = L L*`.
pub fn cholesky(h: &CMatrix, tol: f64) -> Result<CMatrix> {
    if !h.is_square() {
        return Err(Error::dims("cholesky of non-square matrix"));
    }
    let n = h.rows();
    let floor = tol * h.norm_fro().max(f64::MIN_POSITIVE);
    let mut l = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = h[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > floor) {
            return Err(Error::NotPositiveDefinite(format!("pivot {j} is {d:.3e}")));
        }
        let djj = d.sqrt();
        l[(j, j)] = C64::new(djj, 0.0);
        for i in j + 1..n {
            let mut s = h[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(l)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn identity_returns_rhs() {
        let b = vec![c(1.0), C64::new(0.5, -2.0), c(3.0)];
        let sol = solve_dense(&CMatrix::identity(3), &b).unwrap();
        assert_eq!(sol.x, b);
        assert!((sol.condition - 1.0).abs() < 1e-15);
    }

    #[test]
    fn diagonal_system() {
        let a = CMatrix::diag_real(&[2.0, 4.0]);
        let sol = solve_dense(&a, &[c(2.0), c(4.0)]).unwrap();
        assert!((sol.x[0] - c(1.0)).norm() < 1e-15);
        assert!((sol.x[1] - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn singular_is_refused() {
        let a = CMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert!(matches!(solve_dense(&a, &[c(1.0), c(1.0)]), Err(Error::Singular { .. })));
    }

    #[test]
    fn determinant_tracks_row_swaps() {
        let a = CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let det = Lu::factor(&a).unwrap().determinant();
        assert!((det - c(-1.0)).norm() < 1e-15);
    }

    #[test]
    fn cholesky_reconstructs() {
        let h = CMatrix::from_rows(&[
            vec![c(4.0), C64::new(1.0, 1.0)],
            vec![C64::new(1.0, -1.0), c(3.0)],
        ])
        .unwrap();
        let l = cholesky(&h, 1e-12).unwrap();
        assert!((&l * &l.adjoint()).approx_eq(&h, 1e-13));
        assert!(cholesky(&CMatrix::diag_real(&[1.0, -1.0]), 1e-12).is_err());
    }
}
