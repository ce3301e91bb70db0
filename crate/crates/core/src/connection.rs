//! The structure connection on a fiber `{p} × C*` and its monodromy.
//!
//! The `dz` part of the connection is `∇ = d + (P/z + R + T z) dz/z` with
//! pole `P = U`, residue `R = −Q` (plus `w/2 · I` when the weight shift is
//! on) and tail `T = −U†`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{h_adjoint, matrix_exp, CMatrix, GramMatrix, Lu, C64};
use crate::model::CVBundleData;
use crate::spectrum::SpectrumReport;

pub const MIN_STEPS: usize = 256;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiberConnection {
    pub pole: CMatrix,
    pub residue: CMatrix,
    pub tail: CMatrix,
    pub weight: Option<i64>,
    pub includes_weight_shift: bool,
}

impl FiberConnection {
    /// Connection `d + R dz/z` with constant residue.
    pub fn from_residue(residue: CMatrix) -> Self {
        let r = residue.rows();
        Self {
            pole: CMatrix::zeros(r, r),
            residue,
            tail: CMatrix::zeros(r, r),
            weight: None,
            includes_weight_shift: false,
        }
    }

    pub fn rank(&self) -> usize {
        self.residue.rows()
    }

    pub fn is_constant(&self, tol: f64) -> bool {
        self.pole.is_zero(tol) && self.tail.is_zero(tol)
    }

    /// `z A(z)`'s coefficient matrix at a point of the unit circle, i.e.
    /// `P/z + R + T z`.
    pub fn coefficient_at(&self, z: C64) -> CMatrix {
        &(&self.pole.scale(z.inv()) + &self.residue) + &self.tail.scale(z)
    }

    /// Closed-form monodromy; only valid when the pole and tail vanish.
    pub fn closed_monodromy(&self) -> Result<Monodromy> {
        if !self.is_constant(0.0) {
            return Err(Error::NotConstantResidue("U or U† part is nonzero".into()));
        }
        Ok(monodromy_closed(&self.residue.scale_real(-1.0)))
    }
}

/// Fiber connection at the origin.
pub fn assemble(b: &CVBundleData, with_weight: bool) -> Result<FiberConnection> {
    assemble_at(b, &vec![C64::new(0.0, 0.0); b.dim], with_weight)
}

/// Fiber connection at the point `t` of the base.
pub fn assemble_at(b: &CVBundleData, t: &[C64], with_weight: bool) -> Result<FiberConnection> {
    if t.len() != b.dim {
        return Err(Error::dims(format!("point of dimension {} on a base of dimension {}", t.len(), b.dim)));
    }
    let h = GramMatrix::new(b.metric.eval_at(t), crate::linalg::DEFAULT_TOL)?;
    let u = b.u.eval_at(t);
    let q = b.q.eval_at(t);
    let mut residue = q.scale_real(-1.0);
    if with_weight {
        let w = b.weight.ok_or(Error::MissingWeight)?;
        residue = &residue + &CMatrix::identity(b.rank).scale_real(w as f64 / 2.0);
    }
    let tail = h_adjoint(&u, &h)?.scale_real(-1.0);
    Ok(FiberConnection { pole: u, residue, tail, weight: b.weight, includes_weight_shift: with_weight })
}

/// Exponents `λᵢ + w/2` of the rank-one summands when `U = 0` and `Φ = 0`.
pub fn line_decomposition(b: &CVBundleData, spectrum: &SpectrumReport, w: i64, tol: f64) -> Result<Vec<f64>> {
    if b.u.max_abs() > tol {
        return Err(Error::NotDecomposable(format!("U is {:.3e}", b.u.max_abs())));
    }
    if !b.has_trivial_higgs(tol) {
        return Err(Error::NotDecomposable("Higgs field is nonzero".into()));
    }
    Ok(spectrum.eigenvalues.iter().map(|l| l + w as f64 / 2.0).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MonodromyMethod {
    ClosedForm,
    Numeric,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Monodromy {
    pub t: CMatrix,
    pub method: MonodromyMethod,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    /// `‖T − T_closed‖` when the closed form applies.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    /// `|det T − exp(2πi tr A₀)|`.
    pub liouville_defect: f64,
}

fn two_pi_i() -> C64 {
    C64::new(0.0, 2.0 * PI)
}

fn liouville(t: &CMatrix, a0_trace: C64) -> Result<f64> {
    let det = Lu::factor(t)?.determinant();
    Ok((det - (two_pi_i() * a0_trace).exp()).norm())
}

/// `T = exp(2πi A₀)` for `d − A₀ dz/z`, loop counterclockwise.
pub fn monodromy_closed(a0: &CMatrix) -> Monodromy {
    let t = matrix_exp(&a0.scale(two_pi_i()));
    let liouville_defect = liouville(&t, a0.trace()).unwrap_or(f64::INFINITY);
    Monodromy { t, method: MonodromyMethod::ClosedForm, steps: None, residual: None, liouville_defect }
}

/// Transports a fundamental solution once around `|z| = 1` from `z = 1`
/// with fixed-step RK4 in the angle.
pub fn monodromy_numeric(f: &FiberConnection, steps: usize) -> Result<Monodromy> {
    if steps < MIN_STEPS {
        return Err(Error::StepCountTooSmall { steps, min: MIN_STEPS });
    }
    let r = f.rank();
    let minus_i = C64::new(0.0, -1.0);
    // dY/dθ = −i (P e^{−iθ} + R + T e^{iθ}) Y
    let rhs = |theta: f64, y: &CMatrix| -> CMatrix {
        let z = C64::from_polar(1.0, theta);
        &f.coefficient_at(z).scale(minus_i) * y
    };
    let h = 2.0 * PI / steps as f64;
    let mut y = CMatrix::identity(r);
    for n in 0..steps {
        let th = n as f64 * h;
        let k1 = rhs(th, &y);
        let k2 = rhs(th + h / 2.0, &(&y + &k1.scale_real(h / 2.0)));
        let k3 = rhs(th + h / 2.0, &(&y + &k2.scale_real(h / 2.0)));
        let k4 = rhs(th + h, &(&y + &k3.scale_real(h)));
        let incr = &(&k1 + &k2.scale_real(2.0)) + &(&k3.scale_real(2.0) + &k4);
        y = &y + &incr.scale_real(h / 6.0);
    }
    let a0_trace = -f.residue.trace();
    let residual = f
        .closed_monodromy()
        .ok()
        .map(|c| (&y - &c.t).norm_fro());
    let liouville_defect = liouville(&y, a0_trace)?;
    Ok(Monodromy { t: y, method: MonodromyMethod::Numeric, steps: Some(steps), residual, liouville_defect })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_examples() {
        let t = monodromy_closed(&CMatrix::diag_real(&[-1.0, 0.0, 1.0])).t;
        assert!(t.approx_eq(&CMatrix::identity(3), 1e-12));
        let t = monodromy_closed(&CMatrix::diag_real(&[0.5, -0.5])).t;
        assert!(t.approx_eq(&CMatrix::identity(2).scale_real(-1.0), 1e-12));
    }

    #[test]
    fn numeric_needs_enough_steps() {
        let f = FiberConnection::from_residue(CMatrix::zeros(2, 2));
        assert_eq!(monodromy_numeric(&f, 100), Err(Error::StepCountTooSmall { steps: 100, min: 256 }));
        let m = monodromy_numeric(&f, 256).unwrap();
        assert!(m.t.approx_eq(&CMatrix::identity(2), 0.0));
    }

    #[test]
    fn numeric_matches_closed_form_for_nonnormal_residue() {
        let a0 = CMatrix::from_rows(&[
            vec![C64::new(0.3, 0.1), C64::new(1.0, 0.0)],
            vec![C64::new(0.0, 0.0), C64::new(-0.2, 0.0)],
        ])
        .unwrap();
        let f = FiberConnection::from_residue(a0.scale_real(-1.0));
        let m = monodromy_numeric(&f, 4096).unwrap();
        assert!(m.residual.unwrap() < 1e-9, "{:?}", m.residual);
        assert!(m.liouville_defect < 1e-9);
    }

    #[test]
    fn tail_blocks_closed_form() {
        let mut f = FiberConnection::from_residue(CMatrix::zeros(2, 2));
        f.tail = CMatrix::unit(2, 1, 0);
        assert!(matches!(f.closed_monodromy(), Err(Error::NotConstantResidue(_))));
        let m = monodromy_numeric(&f, 512).unwrap();
        assert!(m.residual.is_none());
        assert!(m.liouville_defect < 1e-9);
    }
}
