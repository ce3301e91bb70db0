//! Spectrum of `Q`: flat diagonalization, the `±λ` pairing under a real
//! structure, and the graded vanishing of nilpotent normal Higgs fields.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::jet::{covariant_d, ConnectionData, FieldResidual, MatrixField};
use crate::linalg::{g_adjoint, h_adjoint, self_adjoint_eigen, CMatrix, GramMatrix};
use crate::model::CheckReport;

/// Relative threshold for snapping the middle eigenvalue of odd rank to 0.
pub const ZERO_SNAP: f64 = 1e-7;

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<f64>,
    pub pairing_ok: bool,
    pub has_zero: bool,
    pub trace: f64,
    /// Columns are eigenvectors in the original frame, orthonormal for `h`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagonalizing_frame: Option<CMatrix>,
}

impl SpectrumReport {
    fn from_values(values: Vec<f64>, frame: Option<CMatrix>, tol: f64, scale: f64) -> Self {
        let r = values.len();
        let pair_tol = tol * scale.max(1.0);
        let pairing_ok = (0..r).all(|i| (values[i] + values[r - 1 - i]).abs() <= pair_tol);
        let has_zero = values.iter().any(|v| v.abs() <= pair_tol);
        let trace = values.iter().sum();
        Self { eigenvalues: values, pairing_ok, has_zero, trace, diagonalizing_frame: frame }
    }
}

/// Spectrum of `Q` in a `D′`-flat frame.
///
/// Requires `D′` holomorphic and `D′Q = 0`; constancy of the eigenvalues is
/// certified through the power traces `tr Qᵏ`, which are frame independent.
pub fn flat_diagonalize(q: &MatrixField, conn: &ConnectionData, metric: &MatrixField, tol: f64) -> Result<SpectrumReport> {
    let d = q.degree();
    let mut hol = FieldResidual::zero(d, d.saturating_sub(2));
    for a in &conn.matrices {
        for j in 0..q.dim() {
            hol.absorb(&a.d_anti(j)?);
        }
    }
    if hol.max() > tol {
        return Err(Error::NotFlat(format!("dbar of the connection is {:.3e}", hol.max())));
    }
    let mut dq = FieldResidual::zero(d, d.saturating_sub(1));
    covariant_d(conn, q)?.iter().for_each(|f| dq.absorb(f));
    if dq.max() > tol {
        return Err(Error::NotFlat(format!("D'Q is {:.3e}", dq.max())));
    }

    let mut power = q.clone();
    let mut variation = 0.0_f64;
    for k in 1..=q.rows() {
        if k > 1 {
            power = power.try_mul(q)?;
        }
        let mut tr = power.entry(0, 0).clone();
        for i in 1..q.rows() {
            tr = &tr + power.entry(i, i);
        }
        let nonconstant = tr.degree_norms().iter().take(d).skip(1).fold(0.0_f64, |a, &b| a.max(b));
        variation = variation.max(nonconstant);
    }
    if variation > tol {
        return Err(Error::NonConstant { variation });
    }

    let gram = GramMatrix::new(metric.at_origin(), tol)?;
    let q0 = q.at_origin();
    let (eig, frame) = self_adjoint_eigen(&q0, &gram, tol)?;
    Ok(SpectrumReport::from_values(eig.values, Some(frame), tol, q0.norm_fro()))
}

/// Spectrum of `Q` under the tt* conditions `Q† = Q` and `Q* + Q = 0`.
pub fn pairing_spectrum(q: &CMatrix, h: &GramMatrix, k: &CMatrix, tol: f64) -> Result<SpectrumReport> {
    let scale = q.norm_fro().max(1.0);
    let herm = (&h_adjoint(q, h)? - q).norm_fro();
    if herm > tol * scale {
        return Err(Error::PairingViolated(format!("Q is not h-self-adjoint (defect {herm:.3e})")));
    }
    let anti = (&g_adjoint(q, h, k, tol)? + q).norm_fro();
    if anti > tol * scale {
        return Err(Error::PairingViolated(format!("Q* + Q = {anti:.3e}")));
    }
    let (eig, frame) = self_adjoint_eigen(q, h, tol)?;
    let mut values = eig.values;
    let r = values.len();
    if r % 2 == 1 {
        let snap = ZERO_SNAP * q.norm_fro();
        if let Some(v) = values.iter_mut().min_by(|a, b| a.abs().total_cmp(&b.abs())) {
            if v.abs() <= snap {
                *v = 0.0;
            }
        }
    }
    Ok(SpectrumReport::from_values(values, Some(frame), tol, q.norm_fro()))
}

fn diagonal_of(q: &CMatrix, tol: f64) -> Result<Vec<f64>> {
    let r = q.rows();
    if !q.is_square() {
        return Err(Error::dims("Q must be square"));
    }
    let off = (0..r)
        .flat_map(|i| (0..r).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| q[(i, j)].norm())
        .fold(0.0_f64, f64::max);
    let imag = (0..r).map(|i| q[(i, i)].im.abs()).fold(0.0_f64, f64::max);
    if off > tol || imag > tol {
        return Err(Error::PreconditionViolated("Q must be real diagonal".into()));
    }
    Ok((0..r).map(|i| q[(i, i)].re).collect())
}

/// Checks `Cᵢ Q − (Q − I) Cᵢ = 0` and returns the components, padded with
/// zeros up to the rank.
fn graded_components(q: &CMatrix, c: &[CMatrix], tol: f64) -> Result<Vec<CMatrix>> {
    let r = q.rows();
    if c.iter().any(|m| m.rows() != r || m.cols() != r) {
        return Err(Error::dims("Higgs components must match the rank of Q"));
    }
    let shift = q - &CMatrix::identity(r);
    for (i, m) in c.iter().enumerate() {
        let defect = (&(m * q) - &(&shift * m)).norm_fro();
        if defect > tol * (1.0 + m.norm_fro() * (1.0 + q.norm_fro())) {
            return Err(Error::PreconditionViolated(format!(
                "component {i} does not shift the grading (defect {defect:.3e})"
            )));
        }
    }
    let mut out = c.to_vec();
    out.resize(r.max(c.len()), CMatrix::zeros(r, r));
    Ok(out)
}

/// Eigenvalue bookkeeping for the product `eₐ ∘ e_b = Σₓ C₍ₐ₎[b][x] eₓ`.
///
/// Verifies that products of eigenvectors with distinct eigenvalues
/// vanish, that products within one eigenspace land in the eigenspace of
/// `λ − 1`, and that `Cᵢ Cⱼ = 0` for all `i, j`.
pub fn grading_shift_check(q: &CMatrix, c: &[CMatrix], tol: f64) -> Result<CheckReport> {
    let qd = diagonal_of(q, tol)?;
    let comps = graded_components(q, c, tol)?;
    let r = qd.len();
    let mut report = CheckReport::new(tol);

    let mut distinct = 0.0_f64;
    let mut shift = 0.0_f64;
    for a in 0..r {
        for b in 0..r {
            let product = comps[a].row(b);
            if (qd[a] - qd[b]).abs() > tol {
                distinct = product.iter().map(|z| z.norm()).fold(distinct, f64::max);
            } else {
                // components outside the (λ − 1)-eigenspace
                for (x, z) in product.iter().enumerate() {
                    if (qd[x] - (qd[b] - 1.0)).abs() > tol {
                        shift = shift.max(z.norm());
                    }
                }
            }
        }
    }
    report.push_scalar("distinct-eigenvalue-products", "grading", distinct);
    report.push_scalar("eigenvalue-drop", "grading", shift);

    let mut triple = 0.0_f64;
    for ci in &comps {
        for cj in &comps {
            triple = triple.max((ci * cj).max_abs());
        }
    }
    report.push_scalar("triple-products", "grading", triple);
    Ok(report)
}

/// Vanishing of a graded Higgs field whose components are normal.
///
/// For a component shifting the grading by one, the diagonal blocks of
/// `[C, C*]` telescope, giving `‖C‖_F² ≤ s² √r ν` with `s` the number of
/// eigenvalue levels and `ν = ‖[C, C*]‖_F`. The report passes when every
/// `‖Cⱼ‖_F` sits below `max(tol, s r^¼ √ν)`.
pub fn graded_normal_vanishing(q: &CMatrix, c: &[CMatrix], tol: f64) -> Result<CheckReport> {
    let qd = diagonal_of(q, tol)?;
    let comps = graded_components(q, c, tol)?;
    let r = qd.len();
    let mut levels = qd.clone();
    levels.sort_by(f64::total_cmp);
    levels.dedup_by(|a, b| (*a - *b).abs() <= tol);
    let s = levels.len() as f64;

    let mut normality = 0.0_f64;
    let mut excess = 0.0_f64;
    let mut largest = 0.0_f64;
    for m in &comps {
        let adj = m.adjoint();
        let nu = (&(m * &adj) - &(&adj * m)).norm_fro();
        normality = normality.max(nu);
        let bound = tol.max(s * (r as f64).powf(0.25) * nu.sqrt());
        let norm = m.norm_fro();
        largest = largest.max(norm);
        excess = excess.max(norm - bound);
    }
    if normality > tol {
        return Err(Error::PreconditionViolated(format!("components are not normal (defect {normality:.3e})")));
    }
    let mut report = CheckReport::new(tol);
    report.push_scalar("normality", "graded-vanishing", normality);
    report.push_verdict("higgs-norm", "graded-vanishing", largest, excess <= 0.0);
    Ok(report)
}
