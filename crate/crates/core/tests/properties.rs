use proptest::prelude::*;

use ttstar::jet::{chern_connection, JetPoly, MatrixField};
use ttstar::linalg::{
    g_adjoint, h_adjoint, hermitian_eigen, inverse, matrix_exp, solve_dense, CMatrix, GramMatrix, C64,
};
use ttstar::sylvester::{is_condition, solve_sylvester};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn matrix(n: usize) -> impl Strategy<Value = CMatrix> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n * n)
        .prop_map(move |v| CMatrix::from_vec(n, n, v.into_iter().map(|(a, b)| c(a, b)).collect()).unwrap())
}

fn sized_matrix() -> impl Strategy<Value = CMatrix> {
    (1usize..=5).prop_flat_map(matrix)
}

fn positive(b: &CMatrix) -> GramMatrix {
    let h = &(&b.adjoint() * b) + &CMatrix::identity(b.rows());
    GramMatrix::new((&h + &h.adjoint()).scale_real(0.5), 1e-9).unwrap()
}

fn vector(v: &CMatrix, j: usize) -> Vec<C64> {
    v.column(j)
}

/// Real structure `K = S conj(S)⁻¹`, which satisfies `K conj(K) = I`.
fn real_structure(s: &CMatrix) -> CMatrix {
    let s = &s.scale_real(0.3) + &CMatrix::identity(s.rows());
    &s * &inverse(&s.conj()).unwrap()
}

fn close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn h_adjoint_defining_identity(
        (p, b, uv) in (1usize..=5).prop_flat_map(|n| (matrix(n), matrix(n), matrix(n)))
    ) {
        let h = positive(&b);
        let pd = h_adjoint(&p, &h).unwrap();
        let n = p.rows();
        let u = vector(&uv, 0);
        let v = vector(&uv, n - 1);
        prop_assert!(close(h.form(&p.mul_vec(&u), &v), h.form(&u, &pd.mul_vec(&v)), 1e-9));
        prop_assert!(h_adjoint(&pd, &h).unwrap().approx_eq(&p, 1e-9));
    }

    #[test]
    fn g_adjoint_defining_identity_and_trace(
        (p, b, s, uv) in (1usize..=5).prop_flat_map(|n| (matrix(n), matrix(n), matrix(n), matrix(n)))
    ) {
        let h = positive(&b);
        let k = real_structure(&s);
        let ps = g_adjoint(&p, &h, &k, 1e-8).unwrap();
        let g = |x: &[C64], y: &[C64]| h.form(x, &k.mul_vec(&y.iter().map(|z| z.conj()).collect::<Vec<_>>()));
        let n = p.rows();
        let u = vector(&uv, 0);
        let v = vector(&uv, n - 1);
        prop_assert!(close(g(&p.mul_vec(&u), &v), g(&u, &ps.mul_vec(&v)), 1e-8));
        prop_assert!(close(ps.trace(), p.trace(), 1e-9));
    }

    #[test]
    fn h_adjoint_is_frame_covariant(
        (p, b, f) in (1usize..=5).prop_flat_map(|n| (matrix(n), matrix(n), matrix(n)))
    ) {
        let h = positive(&b);
        let g = matrix_exp(&f.scale_real(0.5));
        let gi = inverse(&g).unwrap();
        let h2 = GramMatrix::new(&(&g.adjoint() * h.matrix()) * &g, 1e-9).unwrap();
        let lhs = h_adjoint(&(&(&gi * &p) * &g), &h2).unwrap();
        let rhs = &(&gi * &h_adjoint(&p, &h).unwrap()) * &g;
        prop_assert!(lhs.approx_eq(&rhs, 1e-8));
    }

    #[test]
    fn hermitian_eigen_reconstructs(a in sized_matrix()) {
        let h = (&a + &a.adjoint()).scale_real(0.5);
        let e = hermitian_eigen(&h, 1e-12).unwrap();
        prop_assert!(e.vectors.is_unitary(1e-10));
        prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        let back = &(&e.vectors * &CMatrix::diag_real(&e.values)) * &e.vectors.adjoint();
        prop_assert!(back.approx_eq(&h, 1e-10));
    }

    #[test]
    fn exp_inverse_and_trace(a in sized_matrix(), s in 0.1..3.0f64) {
        let a = a.scale_real(s);
        let e = matrix_exp(&a);
        let prod = &e * &matrix_exp(&a.scale_real(-1.0));
        prop_assert!(prod.approx_eq(&CMatrix::identity(a.rows()), 1e-9));
        let det = ttstar::linalg::Lu::factor(&e).unwrap().determinant();
        prop_assert!(close(det, a.trace().exp(), 1e-9));
    }

    #[test]
    fn sylvester_is_linear_in_rhs(
        (a, b, y1, y2) in (1usize..=4).prop_flat_map(|n| (matrix(n), matrix(n), matrix(n), matrix(n))),
        alpha in -2.0..2.0f64,
    ) {
        // separate the spectra so the solution is unique
        let b = &b - &CMatrix::identity(b.rows()).scale_real(5.0);
        let x1 = solve_sylvester(&a, &b, &y1).unwrap().x;
        let x2 = solve_sylvester(&a, &b, &y2).unwrap().x;
        let x = solve_sylvester(&a, &b, &(&y1 + &y2.scale_real(alpha))).unwrap().x;
        prop_assert!(x.approx_eq(&(&x1 + &x2.scale_real(alpha)), 1e-9));
    }

    #[test]
    fn is_margin_is_similarity_invariant(d in prop::collection::vec(-3.0..3.0f64, 1..6), f in matrix(5)) {
        let n = d.len();
        let g = matrix_exp(&f.block(0, 0, n, n).scale_real(0.5));
        let q = &(&g * &CMatrix::diag_real(&d)) * &inverse(&g).unwrap();
        let direct = is_condition(&CMatrix::diag_real(&d), 1e-9).unwrap();
        let conj = is_condition(&q, 1e-9).unwrap();
        prop_assert!((direct.margin - conj.margin).abs() <= 1e-7);
    }

    #[test]
    fn jet_leibniz_and_commuting_derivatives(
        p in poly(2, 4),
        q in poly(2, 4),
        i in 0usize..2,
        j in 0usize..2,
    ) {
        // products are exact below the truncation degree
        let lhs = (&p * &q).d_holo(i).unwrap().truncate(3);
        let rhs = (&(&p.d_holo(i).unwrap() * &q) + &(&p * &q.d_holo(i).unwrap())).truncate(3);
        prop_assert!(jet_close(&lhs, &rhs, 1e-12));
        let a = p.d_holo(i).unwrap().d_anti(j).unwrap();
        let b = p.d_anti(j).unwrap().d_holo(i).unwrap();
        prop_assert!(jet_close(&a, &b, 0.0));
        prop_assert!(jet_close(&p.conj().d_anti(i).unwrap(), &p.d_holo(i).unwrap().conj(), 0.0));
    }
}

fn poly(dim: usize, degree: usize) -> impl Strategy<Value = JetPoly> {
    prop::collection::vec(
        (prop::collection::vec(0u8..=2, 2 * dim), -1.0..1.0f64, -1.0..1.0f64),
        0..10,
    )
    .prop_map(move |terms| {
        terms.into_iter().fold(JetPoly::zero(dim, degree), |acc, (e, re, im)| {
            let (hol, anti) = e.split_at(dim);
            match JetPoly::monomial(dim, degree, hol, anti, c(re, im)) {
                Ok(m) => &acc + &m,
                Err(_) => acc,
            }
        })
    })
}

fn jet_close(a: &JetPoly, b: &JetPoly, tol: f64) -> bool {
    (a - b).degree_norms().iter().all(|&x| x <= tol)
}

fn scalar_field(p: &JetPoly) -> MatrixField {
    MatrixField::scalar_times(p, &CMatrix::identity(1))
}

#[test]
fn chern_connection_of_fubini_study_weight() {
    // H = 1 + t t̄ gives A = ∂ log H = t̄ / (1 + t t̄) = t̄ − t t̄² + …
    let deg = 6;
    let t = JetPoly::var(1, deg, 0);
    let tb = JetPoly::var_bar(1, deg, 0);
    let h = &JetPoly::constant(1, deg, c(1.0, 0.0)) + &(&t * &tb);
    let conn = chern_connection(&scalar_field(&h), 1e-12).unwrap();
    let a = conn.matrices[0].entry(0, 0);
    for k in 0..3u8 {
        let want = if k % 2 == 0 { 1.0 } else { -1.0 };
        assert_eq!(a.coefficient(&[k, k + 1]), c(want, 0.0), "t^{k} tbar^{}", k + 1);
    }
    assert_eq!(a.coefficient(&[1, 0]), c(0.0, 0.0));

    // ∂̄A = 1/(1 + t t̄)² = Σ (−1)ᵏ (k + 1) (t t̄)ᵏ
    let curv = a.d_anti(0).unwrap();
    for k in 0..3u8 {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        assert_eq!(curv.coefficient(&[k, k]), c(sign * (k as f64 + 1.0), 0.0));
    }
}

fn det(a: &CMatrix) -> C64 {
    // Laplace expansion along the first row
    let n = a.rows();
    if n == 1 {
        return a[(0, 0)];
    }
    (0..n)
        .map(|j| {
            let minor = CMatrix::from_fn(n - 1, n - 1, |r, s| a[(r + 1, if s < j { s } else { s + 1 })]);
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            a[(0, j)] * det(&minor) * sign
        })
        .sum()
}

#[test]
fn dense_solve_matches_cramer() {
    let a = CMatrix::from_fn(6, 6, |i, j| {
        let x = (i * 7 + j * 3) as f64;
        c((x * 0.37).sin() + if i == j { 3.0 } else { 0.0 }, (x * 0.11).cos())
    });
    let b: Vec<C64> = (0..6).map(|i| c(i as f64 - 2.5, 1.0 / (i as f64 + 1.0))).collect();
    let sol = solve_dense(&a, &b).unwrap();
    let d = det(&a);
    for k in 0..6 {
        let mut ak = a.clone();
        ak.set_column(k, &b);
        let xk = det(&ak) / d;
        assert!((xk - sol.x[k]).norm() <= 1e-12, "component {k}");
    }
}

#[test]
fn h_adjoint_of_unit_matrix_by_brute_force() {
    // unknown X with h(E₁₂ eᵢ, eⱼ) = h(eᵢ, X eⱼ) for all basis pairs
    let hm = CMatrix::diag_real(&[2.0, 1.0]);
    let h = GramMatrix::new(hm.clone(), 1e-12).unwrap();
    let p = CMatrix::unit(2, 0, 1);
    let e = |i: usize| CMatrix::identity(2).column(i);
    // h(u, Xv) = (Xv)* H u is conjugate-linear in X; solve for conj(X) row by row
    let mut sys = CMatrix::zeros(4, 4);
    let mut rhs = vec![c(0.0, 0.0); 4];
    for i in 0..2 {
        for j in 0..2 {
            let row = 2 * i + j;
            rhs[row] = h.form(&p.mul_vec(&e(i)), &e(j)).conj();
            // conj(h(eᵢ, X eⱼ)) = Σₐ X[a][j] H[a][i]
            for a in 0..2 {
                sys[(row, 2 * a + j)] = hm[(a, i)];
            }
        }
    }
    let x = solve_dense(&sys, &rhs).unwrap().x;
    let brute = CMatrix::from_vec(2, 2, x).unwrap();
    let pd = h_adjoint(&p, &h).unwrap();
    assert!(pd.approx_eq(&brute, 1e-14));
    assert!(pd.approx_eq(&CMatrix::unit(2, 1, 0).scale_real(2.0), 0.0));
}
