use super::bundle::CVBundleData;
use super::report::CheckReport;
use crate::error::{Error, Result};
use crate::jet::{chern_connection, covariant_d, curvature_residual, h_adjoint_field, FieldResidual, MatrixField};
use crate::linalg::{real_structure_defect, DEFAULT_TOL};

fn cert(b: &CVBundleData, loss: usize) -> usize {
    b.jet_degree.saturating_sub(loss)
}

/// The three harmonic relations: `∂̄Φ = 0`, `Φ∧Φ = 0`, `D′Φ = 0` together
/// with `∂̄Φ† = 0`, and the curvature identity.
pub fn check_harmonic(b: &CVBundleData, tol: f64) -> Result<CheckReport> {
    let conn = chern_connection(&b.metric, DEFAULT_TOL)?;
    let d = b.jet_degree;
    let mut report = CheckReport::new(tol);

    let mut dbar = FieldResidual::zero(d, cert(b, 1));
    for c in &b.higgs {
        for j in 0..b.dim {
            dbar.absorb(&c.d_anti(j)?);
        }
    }
    report.push_field("dbar-phi", "harmonic", &dbar);

    let mut wedge = FieldResidual::zero(d, d);
    for (i, ci) in b.higgs.iter().enumerate() {
        for cj in &b.higgs[i + 1..] {
            wedge.absorb(&ci.commutator(cj)?);
        }
    }
    report.push_field("phi-wedge-phi", "harmonic", &wedge);

    // D′Φ = 0 and its adjoint ∂̄Φ† = 0, reported together
    let dc: Vec<Vec<MatrixField>> = b.higgs.iter().map(|c| covariant_d(&conn, c)).collect::<Result<_>>()?;
    let daggers = b.higgs.iter().map(|c| h_adjoint_field(c, &b.metric)).collect::<Result<Vec<_>>>()?;
    let mut dprime = FieldResidual::zero(d, cert(b, 1));
    let mut dbar_dagger = FieldResidual::zero(d, cert(b, 2));
    for i in 0..b.dim {
        for j in i + 1..b.dim {
            // dc[j][i] = ∂ᵢCⱼ + [Aᵢ, Cⱼ]
            dprime.absorb(&dc[j][i].try_sub(&dc[i][j])?);
            dbar_dagger.absorb(&daggers[j].d_anti(i)?.try_sub(&daggers[i].d_anti(j)?)?);
        }
    }
    dprime.merge(&dbar_dagger);
    report.push_field("dprime-phi", "harmonic", &dprime);

    report.push_field("curvature", "harmonic", &curvature_residual(&conn, &b.higgs, &b.metric)?);
    Ok(report)
}

/// The five integrability equations `U`, `QQ`, `CU`, `UCQ`, `QCU`.
pub fn check_integrable(b: &CVBundleData, tol: f64) -> Result<CheckReport> {
    let conn = chern_connection(&b.metric, DEFAULT_TOL)?;
    let d = b.jet_degree;
    let r = b.rank;
    let mut report = CheckReport::new(tol);

    let mut u_res = FieldResidual::zero(d, cert(b, 1));
    for j in 0..b.dim {
        u_res.absorb(&b.u.d_anti(j)?);
    }
    report.push_field("U", "integrable", &u_res);

    let q_dag = h_adjoint_field(&b.q, &b.metric)?;
    report.push_field("QQ", "integrable", &FieldResidual::from_field(&q_dag.try_sub(&b.q)?, d));

    let mut cu = FieldResidual::zero(d, d);
    for c in &b.higgs {
        cu.absorb(&c.commutator(&b.u)?);
    }
    report.push_field("CU", "integrable", &cu);

    let du = covariant_d(&conn, &b.u)?;
    let dq = covariant_d(&conn, &b.q)?;
    let u_dag = h_adjoint_field(&b.u, &b.metric)?;
    let q_shift = b.q.try_sub(&MatrixField::identity(r, b.dim, d))?;
    let mut ucq = FieldResidual::zero(d, cert(b, 1));
    let mut qcu = FieldResidual::zero(d, cert(b, 1));
    for (i, c) in b.higgs.iter().enumerate() {
        let rhs = c.try_mul(&b.q)?.try_sub(&q_shift.try_mul(c)?)?;
        ucq.absorb(&du[i].try_sub(&rhs)?);
        qcu.absorb(&dq[i].try_sub(&c.commutator(&u_dag)?)?);
    }
    report.push_field("UCQ", "integrable", &ucq);
    report.push_field("QCU", "integrable", &qcu);
    Ok(report)
}

/// Bilinear adjoint of a field for `g(u, v) = vᵀ G u`, `G = K* H`.
fn g_adjoint_field(p: &MatrixField, h: &MatrixField, k: &MatrixField) -> Result<MatrixField> {
    let gt = k.adjoint().try_mul(h)?.transpose();
    gt.inverse()?.try_mul(&p.transpose())?.try_mul(&gt)
}

/// Compatibility of the real structure: involution, isometry, flatness,
/// `U* = U` and `Q* + Q = 0`.
pub fn check_real(b: &CVBundleData, tol: f64) -> Result<CheckReport> {
    let k = b.kappa.as_ref().ok_or(Error::MissingRealStructure)?;
    let conn = chern_connection(&b.metric, DEFAULT_TOL)?;
    let d = b.jet_degree;
    let mut report = CheckReport::new(tol);

    let involution = real_structure_defect(k);
    report.push_scalar("kappa-involution", "real", involution);
    if involution > tol {
        report.note(Error::InvalidRealStructure { defect: involution }.to_string());
    }

    let kf = MatrixField::constant(k, b.dim, d);
    let iso = kf.adjoint().try_mul(&b.metric)?.try_mul(&kf)?.try_sub(&b.metric.conj())?;
    report.push_field("kappa-isometry", "real", &FieldResidual::from_field(&iso, d));

    // constant K: D(κ) = 0 reduces to Aᵢ K = 0
    let mut flat = FieldResidual::zero(d, cert(b, 1));
    for a in &conn.matrices {
        flat.absorb(&a.try_mul(&kf)?);
    }
    report.push_field("kappa-flat", "real", &flat);

    let u_star = g_adjoint_field(&b.u, &b.metric, &kf)?;
    report.push_field("U-symmetry", "real", &FieldResidual::from_field(&u_star.try_sub(&b.u)?, d));
    let q_star = g_adjoint_field(&b.q, &b.metric, &kf)?;
    report.push_field("Q-antisymmetry", "real", &FieldResidual::from_field(&q_star.try_add(&b.q)?, d));
    Ok(report)
}

/// Union of all checkers; real checks are skipped when `kappa` is absent.
pub fn full_report(b: &CVBundleData, tol: f64) -> Result<CheckReport> {
    let mut report = check_harmonic(b, tol)?;
    report.merge(check_integrable(b, tol)?);
    if b.kappa.is_some() {
        report.merge(check_real(b, tol)?);
    } else {
        report.note("no real structure; real checks skipped");
    }
    Ok(report)
}
