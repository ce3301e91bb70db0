//! Hodge structures and tt* data with `U = 0`.
//!
//! A weight-0 variation with Hermitian form `k` becomes a bundle with
//! `Q = ⊕ p·Id` on `Hᵖ` and metric `⊕ (−1)ᵖ k`. Conversely the
//! eigenspaces of `Q` give `H^{p,w−p} = ⊕ ker(Q − α)` over
//! `⌊α + (w+1)/2⌋ = p`, with pairing `S(a, b) = (2πi)ʷ (−1)ᵖ h(a, κb)`
//! and automorphism `A = exp(2πi Q)`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::jet::MatrixField;
use crate::linalg::{cholesky, hermitian_eigen, inverse, matrix_exp, self_adjoint_eigen, CMatrix, GramMatrix, Lu, C64};
use crate::model::json::{from_value, matrix_from_json, parse_value, MatrixJson};
use crate::model::{CVBundleData, CheckReport};

const VHS_JET_DEGREE: usize = 3;
const MAX_RANK: usize = 64;

fn serialize_columns<S: Serializer>(m: &CMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    let cols: Vec<Vec<[f64; 2]>> = (0..m.cols()).map(|j| m.column(j).iter().map(|c| [c.re, c.im]).collect()).collect();
    cols.serialize(s)
}

/// One graded piece or filtration step with its basis in the original frame.
#[derive(Clone, Debug, Serialize)]
pub struct Subspace {
    pub p: i64,
    pub dim: usize,
    #[serde(serialize_with = "serialize_columns")]
    pub basis: CMatrix,
}

#[derive(Clone, Debug, Serialize)]
pub struct VHSData {
    pub weight: i64,
    /// `(p, dim H^{p,w−p})`, ascending in `p`.
    pub grading: Vec<(i64, usize)>,
    pub pieces: Vec<Subspace>,
    /// `Fᵖ` for `p` from one above the top piece down to the bottom piece.
    pub filtration: Vec<Subspace>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<CMatrix>,
    pub a: CMatrix,
    #[serde(skip)]
    metric: CMatrix,
    #[serde(skip)]
    kappa: Option<CMatrix>,
    #[serde(skip)]
    higgs: Vec<CMatrix>,
}

/// Result of [`vhs_to_ttstar`]; the warning is set when `⊕ (−1)ᵖ k` is
/// not positive definite.
#[derive(Clone, Debug)]
pub struct VhsBundle {
    pub bundle: CVBundleData,
    pub positivity_warning: Option<String>,
}

fn check_grading(grading: &[(i64, usize)], r: usize) -> Result<()> {
    let total: usize = grading.iter().map(|g| g.1).sum();
    if total != r {
        return Err(Error::schema("grading", format!("dimensions sum to {total}, form has rank {r}")));
    }
    if grading.iter().any(|g| g.1 == 0) {
        return Err(Error::schema("grading", "zero-dimensional piece"));
    }
    let mut ps: Vec<i64> = grading.iter().map(|g| g.0).collect();
    ps.sort_unstable();
    ps.dedup();
    if ps.len() != grading.len() {
        return Err(Error::schema("grading", "repeated p"));
    }
    Ok(())
}

fn sign(p: i64) -> f64 {
    if p.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Offsets of each block in the order the grading lists them.
fn offsets(grading: &[(i64, usize)]) -> Vec<usize> {
    grading
        .iter()
        .scan(0, |acc, g| {
            let o = *acc;
            *acc += g.1;
            Some(o)
        })
        .collect()
}

/// Exchange `Hᵖ ↔ H⁻ᵖ` when the grading is symmetric and `k₋ₚ = conj(kₚ)`.
fn exchange_kappa(grading: &[(i64, usize)], k: &CMatrix, tol: f64) -> Option<CMatrix> {
    let r = k.rows();
    let off = offsets(grading);
    let index: BTreeMap<i64, usize> = grading.iter().enumerate().map(|(i, g)| (g.0, i)).collect();
    let mut kappa = CMatrix::zeros(r, r);
    for (i, &(p, n)) in grading.iter().enumerate() {
        let &j = index.get(&-p)?;
        if grading[j].1 != n {
            return None;
        }
        let kp = k.block(off[i], off[i], n, n);
        let km = k.block(off[j], off[j], n, n);
        if !km.approx_eq(&kp.conj(), tol * kp.norm_fro().max(1.0)) {
            return None;
        }
        for a in 0..n {
            kappa[(off[j] + a, off[i] + a)] = C64::new(1.0, 0.0);
        }
    }
    Some(kappa)
}

/// Bundle with `Q = ⊕ p·Id`, `U = 0`, `Φ = 0` and metric `⊕ (−1)ᵖ kₚ`
/// on a one-dimensional base.
pub fn vhs_to_ttstar(grading: &[(i64, usize)], k: &CMatrix, weight: i64, tol: f64) -> Result<VhsBundle> {
    if !k.is_square() {
        return Err(Error::schema("k", "must be square"));
    }
    let r = k.rows();
    check_grading(grading, r)?;
    if !k.is_hermitian(tol) {
        return Err(Error::NotHermitian { defect: k.hermitian_defect() });
    }
    let off = offsets(grading);
    let mut metric = CMatrix::zeros(r, r);
    let mut q = CMatrix::zeros(r, r);
    for (i, &(p, n)) in grading.iter().enumerate() {
        for a in 0..r {
            let inside = a >= off[i] && a < off[i] + n;
            for b in off[i]..off[i] + n {
                if !inside && k[(a, b)].norm() > tol * k.norm_fro().max(1.0) {
                    return Err(Error::schema("k", "must be block diagonal along the grading"));
                }
            }
        }
        let block = k.block(off[i], off[i], n, n);
        if Lu::factor(&block).is_err() {
            return Err(Error::NondegeneracyFailure { p });
        }
        for a in 0..n {
            q[(off[i] + a, off[i] + a)] = C64::new(p as f64, 0.0);
            for b in 0..n {
                metric[(off[i] + a, off[i] + b)] = block[(a, b)] * sign(p);
            }
        }
    }
    let positivity_warning = cholesky(&metric, tol)
        .err()
        .map(|_| "metric ⊕(−1)^p k is not positive definite".to_string());
    let kappa = exchange_kappa(grading, k, tol);
    let (m, d) = (1, VHS_JET_DEGREE);
    let f = |x: &CMatrix| MatrixField::constant(x, m, d);
    let zero = CMatrix::zeros(r, r);
    let bundle = CVBundleData::new_unchecked_metric(r, m, Some(weight), d, f(&metric), vec![f(&zero)], f(&zero), f(&q), kappa)?;
    Ok(VhsBundle { bundle, positivity_warning })
}

/// Hodge data of a bundle with `U = 0`, read off the eigenspaces of `Q(0)`.
pub fn ttstar_to_vhs(b: &CVBundleData, w: i64, tol: f64) -> Result<VHSData> {
    let u0 = b.u.at_origin();
    if u0.max_abs() > tol {
        return Err(Error::PreconditionViolated(format!("U(0) is {:.3e}, expected 0", u0.max_abs())));
    }
    let h0 = b.metric.at_origin();
    let gram = GramMatrix::new(h0.clone(), tol)?;
    let q0 = b.q.at_origin();
    let (eig, frame) = self_adjoint_eigen(&q0, &gram, tol)?;
    let shift = (w as f64 + 1.0) / 2.0;
    let mut ps = Vec::with_capacity(eig.values.len());
    for &alpha in &eig.values {
        let x = alpha + shift;
        if (x - x.round()).abs() <= tol {
            return Err(Error::EigenvalueOnWall { eigenvalue: alpha, weight: w });
        }
        ps.push(x.floor() as i64);
    }

    let r = b.rank;
    let mut by_p: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (i, &p) in ps.iter().enumerate() {
        by_p.entry(p).or_default().push(i);
    }
    let columns = |idx: &[usize]| {
        let mut m = CMatrix::zeros(r, idx.len());
        for (c, &i) in idx.iter().enumerate() {
            m.set_column(c, &frame.column(i));
        }
        m
    };
    let pieces: Vec<Subspace> = by_p
        .iter()
        .map(|(&p, idx)| Subspace { p, dim: idx.len(), basis: columns(idx) })
        .collect();
    let (pmin, pmax) = (*by_p.keys().next().unwrap_or(&0), *by_p.keys().last().unwrap_or(&0));
    let filtration = (pmin..=pmax + 1)
        .rev()
        .map(|p| {
            let idx: Vec<usize> = (0..r).filter(|&i| ps[i] >= p).collect();
            Subspace { p, dim: idx.len(), basis: columns(&idx) }
        })
        .collect();

    let s = match &b.kappa {
        Some(k) => {
            // P = Σ (−1)ᵖ πₚ in the original frame, S = (2πi)ʷ Pᵀ Gᵀ
            let signs: Vec<C64> = ps.iter().map(|&p| C64::new(sign(p), 0.0)).collect();
            let proj = &(&frame * &CMatrix::diag(&signs)) * &inverse(&frame)?;
            let g = &k.adjoint() * &h0;
            let factor = C64::new(0.0, 2.0 * PI).powi(w as i32);
            Some((&proj.transpose() * &g.transpose()).scale(factor))
        }
        None => None,
    };
    let a = matrix_exp(&q0.scale(C64::new(0.0, 2.0 * PI)));
    Ok(VHSData {
        weight: w,
        grading: pieces.iter().map(|s| (s.p, s.dim)).collect(),
        pieces,
        filtration,
        s,
        a,
        metric: h0,
        kappa: b.kappa.clone(),
        higgs: b.higgs.iter().map(MatrixField::at_origin).collect(),
    })
}

/// Round trip through [`vhs_to_ttstar`] and [`ttstar_to_vhs`] at weight 0.
pub fn roundtrip_check(grading: &[(i64, usize)], k: &CMatrix, tol: f64) -> Result<CheckReport> {
    let out = vhs_to_ttstar(grading, k, 0, tol)?;
    if let Some(w) = out.positivity_warning {
        return Err(Error::PreconditionViolated(w));
    }
    let vhs = ttstar_to_vhs(&out.bundle, 0, tol)?;
    let mut want: Vec<(i64, usize)> = grading.to_vec();
    want.sort_unstable();
    let mut report = CheckReport::new(tol);
    let mismatched = want.len().abs_diff(vhs.grading.len())
        + want.iter().zip(&vhs.grading).filter(|(a, b)| a != b).count();
    report.push_verdict("grading-dims", "hodge", mismatched as f64, mismatched == 0);

    let r = out.bundle.rank;
    report.push_scalar("monodromy-identity", "hodge", (&vhs.a - &CMatrix::identity(r)).norm_fro());

    let mut q_rec = CMatrix::zeros(r, r);
    for piece in &vhs.pieces {
        let v = &piece.basis;
        // projector onto the piece: V (V* H V)⁻¹ V* H
        let vh = &v.adjoint() * &vhs.metric;
        let proj = &(v * &inverse(&(&vh * v))?) * &vh;
        q_rec = &q_rec + &proj.scale_real(piece.p as f64);
    }
    report.push_scalar("Q-preserved", "hodge", (&q_rec - &out.bundle.q.at_origin()).norm_fro());
    Ok(report)
}

/// Symmetry of `S` and the sign of `S(a, κb)/(2πi)ʷ` on each piece, which
/// must be `(−1)ᵖ`-definite, plus Griffiths transversality of `Φ(0)`.
pub fn polarization_signs(v: &VHSData, tol: f64) -> Result<CheckReport> {
    let s = v.s.as_ref().ok_or(Error::MissingRealStructure)?;
    let k = v.kappa.as_ref().ok_or(Error::MissingRealStructure)?;
    let mut report = CheckReport::new(tol);
    let scale = s.norm_fro().max(1.0);
    let sym = (&s.transpose() - &s.scale_real(sign(v.weight))).norm_fro() / scale;
    report.push_scalar("S-symmetry", "polarization", sym);

    let factor = C64::new(0.0, 2.0 * PI).powi(v.weight as i32).inv();
    let mut pattern = String::new();
    for piece in &v.pieces {
        let b = &piece.basis;
        // M_ij = S(b_i, κ b_j) / (2πi)ʷ
        let m = (&(&b.transpose() * s) * &(k * &b.conj())).scale(factor);
        let herm = (&m + &m.adjoint()).scale_real(0.5);
        let signed = herm.scale_real(sign(piece.p));
        let min = hermitian_eigen(&signed, 1e-8)?.values.first().copied().unwrap_or(0.0);
        pattern.push(if sign(piece.p) > 0.0 { '+' } else { '-' });
        report.push_verdict(&format!("polarization p={}", piece.p), "polarization", min, min > tol);
        report.push_scalar(&format!("hermitian p={}", piece.p), "polarization", m.hermitian_defect());
    }
    report.note(format!("sign pattern by ascending p: {pattern}"));

    // Φ Fᵖ ⊆ Fᵖ⁻¹; vacuous when Φ(0) = 0
    let phi = v.higgs.iter().map(CMatrix::max_abs).fold(0.0_f64, f64::max);
    if phi <= tol {
        report.push_scalar("griffiths-transversality", "polarization", 0.0);
        report.note("Griffiths transversality vacuous (Higgs field vanishes)");
    } else {
        let h = &v.metric;
        let mut worst = 0.0_f64;
        for f in &v.filtration {
            let lower: Vec<&Subspace> = v.pieces.iter().filter(|s| s.p < f.p - 1).collect();
            for piece in lower {
                let vh = &piece.basis.adjoint() * h;
                for c in &v.higgs {
                    let image = &(&vh * c) * &f.basis;
                    worst = worst.max(image.max_abs());
                }
            }
        }
        report.push_scalar("griffiths-transversality", "polarization", worst);
    }
    Ok(report)
}

/// Decoded VHS input document.
#[derive(Clone, Debug)]
pub struct VhsInput {
    pub weight: i64,
    pub grading: Vec<(i64, usize)>,
    pub k: CMatrix,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct VhsJson {
    weight: i64,
    grading: Vec<(i64, usize)>,
    k: MatrixJson,
}

/// Parses `{"weight": w, "grading": [[p, dim], ...], "k": matrix}`.
pub fn load_vhs(bytes: &[u8]) -> Result<VhsInput> {
    let doc: VhsJson = from_value(parse_value(bytes)?)?;
    let k = matrix_from_json("k", &doc.k)?;
    if !k.is_square() || k.rows() > MAX_RANK {
        return Err(Error::schema("k", "must be a square matrix"));
    }
    check_grading(&doc.grading, k.rows())?;
    Ok(VhsInput { weight: doc.weight, grading: doc.grading, k })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rank3() -> VhsBundle {
        vhs_to_ttstar(&[(1, 1), (0, 1), (-1, 1)], &CMatrix::diag_real(&[-1.0, 1.0, -1.0]), 0, 1e-9).unwrap()
    }

    #[test]
    fn sign_bookkeeping() {
        let out = rank3();
        assert!(out.positivity_warning.is_none());
        assert_eq!(out.bundle.metric.at_origin(), CMatrix::identity(3));
        assert_eq!(out.bundle.q.at_origin(), CMatrix::diag_real(&[1.0, 0.0, -1.0]));
        assert!(out.bundle.kappa.is_some());
    }

    #[test]
    fn filtration_dims() {
        let v = ttstar_to_vhs(&rank3().bundle, 0, 1e-9).unwrap();
        let dims: Vec<(i64, usize)> = v.filtration.iter().map(|f| (f.p, f.dim)).collect();
        assert_eq!(dims, vec![(2, 0), (1, 1), (0, 2), (-1, 3)]);
        assert!(v.a.approx_eq(&CMatrix::identity(3), 1e-12));
    }

    #[test]
    fn wall_rejected() {
        let b = CVBundleData::constant(
            &CMatrix::identity(2),
            &[],
            &CMatrix::zeros(2, 2),
            &CMatrix::diag_real(&[0.5, -0.5]),
            None,
            None,
            1,
            3,
        )
        .unwrap();
        assert!(matches!(ttstar_to_vhs(&b, 0, 1e-9), Err(Error::EigenvalueOnWall { .. })));
    }

    #[test]
    fn polarization_recovers_k_signs() {
        let v = ttstar_to_vhs(&rank3().bundle, 0, 1e-9).unwrap();
        let rep = polarization_signs(&v, 1e-9).unwrap();
        assert!(rep.pass, "{}", rep.to_text());
        assert!(rep.notes.iter().any(|n| n.ends_with("-+-")));
    }

    #[test]
    fn degenerate_block() {
        let k = CMatrix::diag_real(&[1.0, 0.0]);
        let r = vhs_to_ttstar(&[(0, 1), (2, 1)], &k, 0, 1e-9);
        assert!(matches!(r, Err(Error::NondegeneracyFailure { p: 2 })));
    }

    #[test]
    fn indefinite_metric_warns() {
        let out = vhs_to_ttstar(&[(1, 1), (0, 1)], &CMatrix::identity(2), 0, 1e-9).unwrap();
        assert!(out.positivity_warning.is_some());
    }

    #[test]
    fn half_integer_grading_is_schema_error() {
        let r = load_vhs(br#"{"weight":0,"grading":[[0.5,1]],"k":[[1]]}"#);
        assert!(matches!(r, Err(Error::Schema { .. })));
    }
}
