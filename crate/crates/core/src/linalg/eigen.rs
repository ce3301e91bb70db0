//! Eigen-solvers: cyclic Jacobi for Hermitian matrices and a shifted
//! Hessenberg QR iteration for eigenvalues of general complex matrices.

use std::cmp::Ordering;

use super::matrix::{CMatrix, C64, ONE, ZERO};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Output of [`hermitian_eigen`]: ascending real eigenvalues and a unitary
/// matrix whose columns are the matching eigenvectors.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

/// Cyclic Jacobi diagonalization of a Hermitian matrix.
///
/// Sweeps visit pivots `(p, q)` in row-major order. Eigenvectors are
/// normalized so that their first non-negligible component is real and
/// positive, and equal eigenvalues are ordered lexicographically by their
/// eigenvectors, which makes the returned frame reproducible.
pub fn hermitian_eigen(h: &CMatrix, tol: f64) -> Result<HermitianEigen> {
    if !h.is_square() {
        return Err(Error::dims("eigen-decomposition of non-square matrix"));
    }
    let norm = h.norm_fro();
    let defect = h.hermitian_defect();
    if defect > tol * norm.max(f64::MIN_POSITIVE) {
        return Err(Error::NotHermitian { defect: defect / norm.max(f64::MIN_POSITIVE) });
    }
    let n = h.rows();
    // symmetrize so roundoff-level asymmetry does not leak into the rotations
    let mut a = (h + &h.adjoint()).scale_real(0.5);
    let mut v = CMatrix::identity(n);
    let target = f64::EPSILON * norm.max(f64::MIN_POSITIVE);

    let mut converged = n <= 1;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence("Jacobi sweeps exhausted".into()));
    }

    let mut pairs: Vec<(f64, Vec<C64>)> = (0..n)
        .map(|j| {
            let mut col = v.column(j);
            normalize_phase(&mut col);
            (a[(j, j)].re, col)
        })
        .collect();
    let tie = 1e3 * f64::EPSILON * norm.max(1.0);
    pairs.sort_by(|x, y| {
        if (x.0 - y.0).abs() <= tie {
            lexicographic(&x.1, &y.1)
        } else {
            x.0.partial_cmp(&y.0).unwrap_or(Ordering::Equal)
        }
    });
    let mut vectors = CMatrix::zeros(n, n);
    for (j, (_, col)) in pairs.iter().enumerate() {
        vectors.set_column(j, col);
    }
    Ok(HermitianEigen { values: pairs.into_iter().map(|p| p.0).collect(), vectors })
}

fn rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let n = a.rows();
    let phase = apq / r;
    let zeta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * r);
    let t = if zeta >= 0.0 { 1.0 } else { -1.0 } / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    // G = diag(1, conj(phase)) * [[c, s], [-s, c]]
    let g_pp = C64::new(c, 0.0);
    let g_pq = C64::new(s, 0.0);
    let g_qp = phase.conj() * (-s);
    let g_qq = phase.conj() * c;

    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * g_pp + akq * g_qp;
        a[(k, q)] = akp * g_pq + akq * g_qq;
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * g_pp + vkq * g_qp;
        v[(k, q)] = vkp * g_pq + vkq * g_qq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
        a[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
}

fn normalize_phase(col: &mut [C64]) {
    let scale = col.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if let Some(lead) = col.iter().find(|x| x.norm() > 1e-8 * scale).copied() {
        let fix = lead.conj() / lead.norm();
        col.iter_mut().for_each(|x| *x *= fix);
    }
}

fn lexicographic(x: &[C64], y: &[C64]) -> Ordering {
    for (a, b) in x.iter().zip(y) {
        let o = b.norm().partial_cmp(&a.norm()).unwrap_or(Ordering::Equal);
        if o != Ordering::Equal && (a.norm() - b.norm()).abs() > 1e-10 {
            return o;
        }
    }
    Ordering::Equal
}

/// Eigenvalues of a general complex square matrix, sorted by real then
/// imaginary part.
pub fn eigenvalues(a: &CMatrix) -> Result<Vec<C64>> {
    if !a.is_square() {
        return Err(Error::dims("eigenvalues of non-square matrix"));
    }
    let n = a.rows();
    let mut h = hessenberg(a);
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return Ok(out);
    }
    let mut hi = n - 1;
    let mut iter = 0usize;
    let max_iter = 200 * n.max(1);
    loop {
        if hi == 0 {
            out.push(h[(0, 0)]);
            break;
        }
        // look for a negligible subdiagonal entry
        let mut l = hi;
        while l > 0 {
            let s = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            let s = if s == 0.0 { h.max_abs() } else { s };
            if h[(l, l - 1)].norm() <= f64::EPSILON * s {
                h[(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            out.push(h[(hi, hi)]);
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        if iter > max_iter {
            return Err(Error::NoConvergence("Hessenberg QR".into()));
        }
        let mu = if iter % 11 == 10 {
            // exceptional shift to break cycles
            h[(hi, hi)] + C64::new(h[(hi, hi - 1)].norm(), 0.0) * 0.75
        } else {
            wilkinson(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        qr_step(&mut h, l, hi, mu);
    }
    out.sort_by(|x, y| {
        x.re.partial_cmp(&y.re)
            .unwrap_or(Ordering::Equal)
            .then(x.im.partial_cmp(&y.im).unwrap_or(Ordering::Equal))
    });
    Ok(out)
}

fn wilkinson(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr * 0.25 - det).sqrt();
    let l1 = tr * 0.5 + disc;
    let l2 = tr * 0.5 - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

fn qr_step(h: &mut CMatrix, lo: usize, hi: usize, mu: C64) {
    for k in lo..=hi {
        h[(k, k)] -= mu;
    }
    let mut rots = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let a = h[(k, k)];
        let b = h[(k + 1, k)];
        let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
        let (ga, gb) = if r == 0.0 { (ONE, ZERO) } else { (a / r, b / r) };
        for j in k..=hi {
            let x = h[(k, j)];
            let y = h[(k + 1, j)];
            h[(k, j)] = ga.conj() * x + gb.conj() * y;
            h[(k + 1, j)] = -gb * x + ga * y;
        }
        rots.push((ga, gb));
    }
    for (idx, (ga, gb)) in rots.into_iter().enumerate() {
        let k = lo + idx;
        for i in lo..=(k + 2).min(hi) {
            let x = h[(i, k)];
            let y = h[(i, k + 1)];
            h[(i, k)] = x * ga + y * gb;
            h[(i, k + 1)] = -(x * gb.conj()) + y * ga.conj();
        }
    }
    for k in lo..=hi {
        h[(k, k)] += mu;
    }
}

fn hessenberg(a: &CMatrix) -> CMatrix {
    let n = a.rows();
    let mut h = a.clone();
    for k in 0..n.saturating_sub(2) {
        let x: Vec<C64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let phase = if x[0].norm() == 0.0 { ONE } else { x[0] / x[0].norm() };
        let mut v = x.clone();
        v[0] += phase * xnorm;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|z| *z /= vnorm);
        // H <- (I - 2 v v*) H
        for j in 0..n {
            let s: C64 = v.iter().enumerate().map(|(i, vi)| vi.conj() * h[(k + 1 + i, j)]).sum();
            for (i, vi) in v.iter().enumerate() {
                h[(k + 1 + i, j)] -= *vi * s * 2.0;
            }
        }
        // H <- H (I - 2 v v*)
        for i in 0..n {
            let s: C64 = v.iter().enumerate().map(|(j, vj)| h[(i, k + 1 + j)] * vj).sum();
            for (j, vj) in v.iter().enumerate() {
                h[(i, k + 1 + j)] -= s * vj.conj() * 2.0;
            }
        }
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank2_half_spectrum() {
        let e = hermitian_eigen(&CMatrix::diag_real(&[0.5, -0.5]), 1e-12).unwrap();
        assert_eq!(e.values, vec![-0.5, 0.5]);
        assert!(e.vectors.is_unitary(1e-14));
    }

    #[test]
    fn identity_is_fixed() {
        let e = hermitian_eigen(&CMatrix::identity(3), 1e-12).unwrap();
        assert_eq!(e.values, vec![1.0; 3]);
        assert!(e.vectors.is_unitary(1e-14));
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let a = CMatrix::from_real_rows(&[&[1.0, 2.0], &[0.0, 1.0]]);
        assert!(matches!(hermitian_eigen(&a, 1e-9), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn complex_hermitian_reconstructs() {
        let h = CMatrix::from_rows(&[
            vec![C64::new(2.0, 0.0), C64::new(1.0, -1.0), C64::new(0.0, 0.5)],
            vec![C64::new(1.0, 1.0), C64::new(-1.0, 0.0), C64::new(0.3, 0.0)],
            vec![C64::new(0.0, -0.5), C64::new(0.3, 0.0), C64::new(0.5, 0.0)],
        ])
        .unwrap();
        let e = hermitian_eigen(&h, 1e-12).unwrap();
        let d = CMatrix::diag_real(&e.values);
        let rebuilt = &(&e.vectors * &d) * &e.vectors.adjoint();
        assert!(rebuilt.approx_eq(&h, 1e-13 * h.norm_fro()));
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn general_eigenvalues_of_triangular_and_rotation() {
        let a = CMatrix::from_real_rows(&[&[2.0, 5.0, 1.0], &[0.0, -1.0, 3.0], &[0.0, 0.0, 0.5]]);
        let ev = eigenvalues(&a).unwrap();
        for (got, want) in ev.iter().zip([-1.0, 0.5, 2.0]) {
            assert!((got - C64::new(want, 0.0)).norm() < 1e-12, "{got} vs {want}");
        }
        let rot = CMatrix::from_real_rows(&[&[0.0, -1.0], &[1.0, 0.0]]);
        let ev = eigenvalues(&rot).unwrap();
        assert!((ev[0] - C64::new(0.0, -1.0)).norm() < 1e-12);
        assert!((ev[1] - C64::new(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn general_eigenvalues_of_jordan_block() {
        let a = CMatrix::from_real_rows(&[&[0.5, 1.0], &[0.0, 0.5]]);
        let ev = eigenvalues(&a).unwrap();
        assert!(ev.iter().all(|z| (z - C64::new(0.5, 0.0)).norm() < 1e-7));
    }
}
