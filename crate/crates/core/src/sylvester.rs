//! Sylvester equations `XA − BX = Y`, the IS condition, and recovery of
//! the Higgs field from `D′U`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{chern_connection, covariant_d, FieldResidual};
use crate::linalg::{eigenvalues, CMatrix, Lu, C64, DEFAULT_TOL};
use crate::model::json::{from_value, matrix_from_json, parse_value, MatrixJson};
use crate::model::{check_integrable, CVBundleData, CheckReport};
use crate::spectrum::{flat_diagonalize, SpectrumReport};

/// Relative spectral gap below which `A` and `B` count as sharing an eigenvalue.
pub const DEFAULT_GAP_FACTOR: f64 = 1e-7;

#[derive(Clone, Debug)]
pub struct SylvesterSolution {
    pub x: CMatrix,
    /// 1-norm condition number of the Kronecker system.
    pub condition: f64,
    /// Smallest distance between the spectra of `A` and `B`.
    pub gap: f64,
}

/// Spectral distance `min |α − β|` over `α ∈ spec A`, `β ∈ spec B`.
pub fn spectral_gap(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    let ea = eigenvalues(a)?;
    let eb = eigenvalues(b)?;
    Ok(ea
        .iter()
        .flat_map(|x| eb.iter().map(move |y| (x - y).norm()))
        .fold(f64::INFINITY, f64::min))
}

/// Row-major Kronecker matrix of `X ↦ XA − BX` for `X` of size `l×k`.
pub fn sylvester_operator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (k, l) = (a.rows(), b.rows());
    let n = l * k;
    let mut m = CMatrix::zeros(n, n);
    for i in 0..l {
        for j in 0..k {
            let row = i * k + j;
            for p in 0..k {
                m[(row, i * k + p)] += a[(p, j)];
            }
            for p in 0..l {
                m[(row, p * k + j)] -= b[(i, p)];
            }
        }
    }
    m
}

/// Solves `XA − BX = Y` with the default gap threshold
/// `1e−7 (‖A‖ + ‖B‖)`.
pub fn solve_sylvester(a: &CMatrix, b: &CMatrix, y: &CMatrix) -> Result<SylvesterSolution> {
    let threshold = DEFAULT_GAP_FACTOR * (a.norm_fro() + b.norm_fro()).max(1.0);
    solve_sylvester_with_gap(a, b, y, threshold)
}

pub fn solve_sylvester_with_gap(a: &CMatrix, b: &CMatrix, y: &CMatrix, threshold: f64) -> Result<SylvesterSolution> {
    if !a.is_square() || !b.is_square() || y.rows() != b.rows() || y.cols() != a.rows() {
        return Err(Error::dims(format!(
            "A {}x{}, B {}x{}, Y {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols(),
            y.rows(),
            y.cols()
        )));
    }
    let gap = spectral_gap(a, b)?;
    if gap <= threshold {
        return Err(Error::CommonEigenvalue { gap, threshold });
    }
    let lu = Lu::factor(&sylvester_operator(a, b))?;
    let x = CMatrix::from_vec(y.rows(), y.cols(), lu.solve(y.as_slice()))?;
    Ok(SylvesterSolution { x, condition: lu.condition(), gap })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ISReport {
    pub eigenvalues: Vec<f64>,
    pub margin: f64,
    pub holds: bool,
}

/// IS condition: no two eigenvalues of `Q` differ by `±1`. The margin is
/// `min ||λₐ − λ_b| − 1|` over all pairs, so a single eigenvalue gives 1.
pub fn is_condition(q: &CMatrix, tol: f64) -> Result<ISReport> {
    let ev = eigenvalues(q)?;
    let max_imag = ev.iter().map(|z| z.im.abs()).fold(0.0_f64, f64::max);
    if max_imag > tol * q.norm_fro().max(1.0) {
        return Err(Error::NonRealSpectrum { max_imag });
    }
    let mut values: Vec<f64> = ev.iter().map(|z| z.re).collect();
    values.sort_by(f64::total_cmp);
    let margin = values
        .iter()
        .flat_map(|a| values.iter().map(move |b| ((a - b).abs() - 1.0).abs()))
        .fold(f64::INFINITY, f64::min);
    Ok(ISReport { eigenvalues: values, margin, holds: margin > tol })
}

/// The unique `Cᵢ` with `Cᵢ Q − (Q − I) Cᵢ = dUᵢ` for each component.
pub fn recover_higgs(q: &CMatrix, du: &[CMatrix], tol: f64) -> Result<Vec<CMatrix>> {
    let is = is_condition(q, tol)?;
    if !is.holds {
        return Err(Error::IsViolated { margin: is.margin });
    }
    let b = q - &CMatrix::identity(q.rows());
    du.iter().map(|y| solve_sylvester(q, &b, y).map(|s| s.x)).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct U0Report {
    pub report: CheckReport,
    pub is: ISReport,
    pub lambda: Option<SpectrumReport>,
}

/// Checks the conclusions of the vanishing theorem at the origin: IS
/// margin, `Φ = 0` with holomorphic `D′` when `D′U = 0` (otherwise `Φ(0)`
/// recovered from `D′U(0)`), and the flat diagonalization of `Q`.
pub fn theorem_u0_verify(b: &CVBundleData, tol: f64) -> Result<U0Report> {
    let pre = check_integrable(b, tol)?;
    if !pre.pass {
        return Err(Error::PreconditionViolated(format!("integrability fails: {}", pre.failed().join(", "))));
    }
    let mut report = CheckReport::new(tol);
    let q0 = b.q.at_origin();
    let is = is_condition(&q0, tol)?;
    report.push_verdict("IS-margin", "theorem", is.margin, is.holds);
    if !is.holds {
        report.note("IS condition fails at the origin; remaining conclusions not applicable");
        return Ok(U0Report { report, is, lambda: None });
    }

    let conn = chern_connection(&b.metric, DEFAULT_TOL)?;
    let du = covariant_d(&conn, &b.u)?;
    let mut du_res = FieldResidual::zero(b.jet_degree, b.jet_degree.saturating_sub(1));
    du.iter().for_each(|f| du_res.absorb(f));

    if du_res.max() > tol {
        let du0: Vec<CMatrix> = du.iter().map(|f| f.at_origin()).collect();
        let recovered = recover_higgs(&q0, &du0, tol)?;
        let defect = recovered
            .iter()
            .zip(&b.higgs)
            .map(|(c, stored)| (c - &stored.at_origin()).max_abs())
            .fold(0.0_f64, f64::max);
        report.push_scalar("higgs-recovery", "theorem", defect);
        report.note("D'U does not vanish; flat diagonalization not applicable");
        return Ok(U0Report { report, is, lambda: None });
    }

    let higgs_norm = b.higgs.iter().map(|c| c.max_abs()).fold(0.0_f64, f64::max);
    report.push_scalar("higgs-vanishes", "theorem", higgs_norm);
    let mut hol = FieldResidual::zero(b.jet_degree, b.jet_degree.saturating_sub(2));
    for a in &conn.matrices {
        for j in 0..b.dim {
            hol.absorb(&a.d_anti(j)?);
        }
    }
    report.push_field("dprime-holomorphic", "theorem", &hol);

    let lambda = match flat_diagonalize(&b.q, &conn, &b.metric, tol) {
        Ok(s) => {
            report.push_scalar("flat-diagonal", "theorem", 0.0);
            Some(s)
        }
        Err(e) => {
            report.push_verdict("flat-diagonal", "theorem", f64::NAN, false);
            report.note(e.to_string());
            None
        }
    };
    Ok(U0Report { report, is, lambda })
}

/// Closed form of `XQ − (Q − I)X = Y` for diagonal `Q`:
/// `X_ab = Y_ab / (q_b − q_a + 1)`.
pub fn diagonal_sylvester(q: &[f64], y: &CMatrix) -> CMatrix {
    CMatrix::from_fn(y.rows(), y.cols(), |a, b| y[(a, b)] / C64::new(q[b] - q[a] + 1.0, 0.0))
}

/// Decoded `{"Q": matrix, "dU": [matrix, ...]}` document.
#[derive(Clone, Debug)]
pub struct SolvePhiInput {
    pub q: CMatrix,
    pub du: Vec<CMatrix>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SolvePhiJson {
    #[serde(rename = "Q")]
    q: MatrixJson,
    #[serde(rename = "dU")]
    du: Vec<MatrixJson>,
}

pub fn load_solve_phi(bytes: &[u8]) -> Result<SolvePhiInput> {
    let doc: SolvePhiJson = from_value(parse_value(bytes)?)?;
    let q = matrix_from_json("Q", &doc.q)?;
    if !q.is_square() {
        return Err(Error::schema("Q", "must be square"));
    }
    if doc.du.len() > 8 {
        return Err(Error::schema("dU", "at most 8 components"));
    }
    let du = doc.du.iter().map(|m| matrix_from_json("dU", m)).collect::<Result<Vec<_>>>()?;
    if du.iter().any(|m| m.rows() != q.rows() || m.cols() != q.cols()) {
        return Err(Error::schema("dU", "components must match the shape of Q"));
    }
    Ok(SolvePhiInput { q, du })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_closed_form() {
        let a = CMatrix::diag_real(&[2.0, 0.0]);
        let b = &a - &CMatrix::identity(2);
        let y = CMatrix::from_real_rows(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let x = solve_sylvester(&a, &b, &y).unwrap().x;
        let want = CMatrix::from_real_rows(&[&[1.0, -1.0], &[1.0 / 3.0, 1.0]]);
        assert!(x.approx_eq(&want, 1e-12));
        assert!(diagonal_sylvester(&[2.0, 0.0], &y).approx_eq(&want, 1e-15));
    }

    #[test]
    fn rectangular_system() {
        let a = CMatrix::diag_real(&[1.0, 2.0, 3.0]);
        let b = CMatrix::from_real_rows(&[&[-1.0, 1.0], &[0.0, -2.0]]);
        let y = CMatrix::from_fn(2, 3, |i, j| C64::new((i + j) as f64, 1.0));
        let x = solve_sylvester(&a, &b, &y).unwrap().x;
        assert!((&(&x * &a) - &(&b * &x)).approx_eq(&y, 1e-12));
    }

    #[test]
    fn common_eigenvalue_refused() {
        let a = CMatrix::diag_real(&[0.5, -0.5]);
        let b = &a - &CMatrix::identity(2);
        let y = CMatrix::identity(2);
        assert!(matches!(solve_sylvester(&a, &b, &y), Err(Error::CommonEigenvalue { .. })));
    }

    #[test]
    fn is_margins() {
        assert_eq!(is_condition(&CMatrix::diag_real(&[2.0, 0.0, -2.0]), 1e-9).unwrap().margin, 1.0);
        let r = is_condition(&CMatrix::diag_real(&[0.5, -0.5]), 1e-9).unwrap();
        assert!(!r.holds && r.margin.abs() < 1e-15);
        assert_eq!(is_condition(&CMatrix::zeros(1, 1), 1e-9).unwrap().margin, 1.0);
    }

    #[test]
    fn complex_spectrum_rejected() {
        let q = CMatrix::diag(&[C64::new(0.0, 1.0), C64::new(0.0, -1.0)]);
        assert!(matches!(is_condition(&q, 1e-9), Err(Error::NonRealSpectrum { .. })));
    }

    #[test]
    fn recovery_needs_is() {
        let q = CMatrix::diag_real(&[0.5, -0.5]);
        assert!(matches!(recover_higgs(&q, &[CMatrix::identity(2)], 1e-9), Err(Error::IsViolated { .. })));
        let zero = recover_higgs(&CMatrix::diag_real(&[2.0, 0.0]), &[CMatrix::zeros(2, 2)], 1e-9).unwrap();
        assert!(zero[0].is_zero(0.0));
    }

    #[test]
    fn vanishing_on_vhs_bundle() {
        let k = CMatrix::identity(2);
        let b = crate::hodge::vhs_to_ttstar(&[(0, 1), (2, 1)], &k, 0, 1e-12).unwrap().bundle;
        let out = theorem_u0_verify(&b, 1e-9).unwrap();
        assert!(out.report.pass, "{}", out.report.to_text());
        assert_eq!(out.is.margin, 1.0);
        for name in ["IS-margin", "higgs-vanishes", "dprime-holomorphic", "flat-diagonal"] {
            assert!(out.report.get(name).is_some(), "{name}");
        }
        assert_eq!(out.lambda.unwrap().eigenvalues, vec![0.0, 2.0]);
    }

    #[test]
    fn verification_stops_at_is_wall() {
        let b = crate::fixtures::fixture("takahashi-rank2", None, 0).unwrap();
        let out = theorem_u0_verify(&b, 1e-9).unwrap();
        assert!(!out.report.pass);
        assert_eq!(out.report.failed(), vec!["IS-margin"]);
        assert!(out.lambda.is_none());
    }

    #[test]
    fn verification_requires_integrability() {
        let b = crate::fixtures::perturbed("QCU").unwrap();
        assert!(matches!(theorem_u0_verify(&b, 1e-9), Err(Error::PreconditionViolated(_))));
    }
}
