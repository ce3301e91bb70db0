//! Named bundles: clean fixtures that satisfy every identity and
//! perturbations that break exactly one.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hodge::vhs_to_ttstar;
use crate::jet::{JetPoly, MatrixField};
use crate::linalg::{matrix_exp, CMatrix, C64};
use crate::model::CVBundleData;

const D: usize = 3;
const EPS: f64 = 1e-3;

/// Fixtures accepted by [`fixture`]; `trivial-r` takes a rank argument.
pub const CLEAN: &[&str] = &["trivial-r", "takahashi-rank2", "rank3-integers", "rank3-halves", "vhs-weight0-r3"];

/// Seeded fixture with a random `±λ`-paired spectrum.
pub const RANDOM: &str = "random-ttstar";

/// Identity names paired with the fixture that breaks only that identity.
pub const PERTURBED: &[&str] =
    &["U", "QQ", "CU", "UCQ", "QCU", "dbar-phi", "phi-wedge-phi", "dprime-phi", "curvature"];

fn exchange(r: usize) -> CMatrix {
    CMatrix::from_fn(r, r, |i, j| if i + j + 1 == r { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
}

fn constant(q: &[f64], kappa: Option<CMatrix>, dim: usize) -> Result<CVBundleData> {
    let r = q.len();
    CVBundleData::constant(
        &CMatrix::identity(r),
        &[],
        &CMatrix::zeros(r, r),
        &CMatrix::diag_real(q),
        kappa,
        None,
        dim,
        D,
    )
}

fn vhs_rank3() -> Result<CVBundleData> {
    let k = CMatrix::diag_real(&[-1.0, 1.0, -1.0]);
    Ok(vhs_to_ttstar(&[(1, 1), (0, 1), (-1, 1)], &k, 0, 1e-12)?.bundle)
}

/// `s · E` with `s` a coordinate (`t` or `t̄`) scaled by `eps`.
fn linear(dim: usize, i: usize, bar: bool, eps: f64, e: &CMatrix) -> MatrixField {
    let v = if bar { JetPoly::var_bar(dim, D, i) } else { JetPoly::var(dim, D, i) };
    MatrixField::scalar_times(&v.scale(C64::new(eps, 0.0)), e)
}

fn cfield(m: &CMatrix, dim: usize) -> MatrixField {
    MatrixField::constant(m, dim, D)
}

/// Constant tt* bundle of rank `r` with metric `I`, κ the exchange
/// `eᵢ ↔ e_{r−1−i}` and `Q = O diag(a, …, [0], …, −a) Oᵀ` for a real
/// orthogonal `O` commuting with κ.
pub fn random_ttstar(r: usize, seed: u64) -> Result<CVBundleData> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = exchange(r);
    let mut spec = vec![0.0; r];
    for i in 0..r / 2 {
        let a: f64 = rng.gen_range(-2.0..2.0);
        spec[i] = a;
        spec[r - 1 - i] = -a;
    }
    let mut s0 = CMatrix::zeros(r, r);
    for i in 0..r {
        for j in i + 1..r {
            let x: f64 = rng.gen_range(-1.0..1.0);
            s0[(i, j)] = C64::new(x, 0.0);
            s0[(j, i)] = C64::new(-x, 0.0);
        }
    }
    let s = (&s0 + &(&(&k * &s0) * &k)).scale_real(0.5);
    let o = matrix_exp(&s);
    let q = &(&o * &CMatrix::diag_real(&spec)) * &o.transpose();
    CVBundleData::constant(&CMatrix::identity(r), &[], &CMatrix::zeros(r, r), &q, Some(k), None, 1, D)
}

/// Clean or perturbed fixture by name. `arg` is the rank for `trivial-r`
/// and `random-ttstar`; `seed` only affects the latter.
pub fn fixture(name: &str, arg: Option<usize>, seed: u64) -> Result<CVBundleData> {
    match name {
        RANDOM => {
            let r = arg.filter(|&r| (1..=64).contains(&r)).ok_or_else(|| Error::UnknownFixture("random-ttstar needs a rank in 1..=64".into()))?;
            random_ttstar(r, seed)
        }
        "trivial-r" => {
            let r = arg.filter(|&r| (1..=64).contains(&r)).ok_or_else(|| Error::UnknownFixture("trivial-r needs a rank in 1..=64".into()))?;
            constant(&vec![0.0; r], Some(CMatrix::identity(r)), 1)
        }
        "takahashi-rank2" => constant(&[0.5, -0.5], Some(exchange(2)), 2),
        "rank3-integers" => constant(&[-1.0, 0.0, 1.0], Some(exchange(3)), 3),
        "rank3-halves" => constant(&[-0.5, 0.0, 0.5], Some(exchange(3)), 3),
        "vhs-weight0-r3" => vhs_rank3(),
        "perturbed-vhs" => {
            let mut b = vhs_rank3()?;
            b.u = linear(1, 0, false, EPS, &CMatrix::unit(3, 0, 1));
            Ok(b)
        }
        other => match other.strip_prefix("perturbed-") {
            Some(id) => perturbed(id),
            None => Err(Error::UnknownFixture(other.to_string())),
        },
    }
}

/// Bundle failing exactly the named identity.
pub fn perturbed(identity: &str) -> Result<CVBundleData> {
    let e12 = CMatrix::unit(2, 0, 1);
    let q10 = CMatrix::diag_real(&[1.0, 0.0]);
    let i2 = CMatrix::identity(2);
    let z2 = CMatrix::zeros(2, 2);
    let build = |dim: usize, metric: MatrixField, higgs: Vec<MatrixField>, u: MatrixField, q: MatrixField| {
        CVBundleData::new(metric.rows(), dim, None, D, metric, higgs, u, q, None)
    };
    match identity {
        "U" => build(1, cfield(&i2, 1), vec![cfield(&z2, 1)], linear(1, 0, true, EPS, &i2), cfield(&z2, 1)),
        "QQ" => {
            let q = CMatrix::diag(&[C64::new(0.5, EPS), C64::new(-0.5, -EPS)]);
            build(1, cfield(&i2, 1), vec![cfield(&z2, 1)], cfield(&z2, 1), cfield(&q, 1))
        }
        "CU" => build(
            1,
            cfield(&i2, 1),
            vec![linear(1, 0, false, EPS, &e12)],
            cfield(&CMatrix::unit(2, 1, 0), 1),
            cfield(&q10, 1),
        ),
        "UCQ" => {
            let mut b = vhs_rank3()?;
            let sym = &CMatrix::unit(3, 0, 1) + &CMatrix::unit(3, 1, 2);
            b.u = linear(1, 0, false, EPS, &sym);
            Ok(b)
        }
        "QCU" => {
            let e11 = CMatrix::unit(2, 0, 0);
            let q = cfield(&q10, 1)
                .try_add(&linear(1, 0, false, EPS, &e11))?
                .try_add(&linear(1, 0, true, EPS, &e11))?;
            build(1, cfield(&i2, 1), vec![cfield(&z2, 1)], cfield(&z2, 1), q)
        }
        "dbar-phi" => build(1, cfield(&i2, 1), vec![linear(1, 0, true, EPS, &e12)], cfield(&z2, 1), cfield(&q10, 1)),
        "phi-wedge-phi" => {
            let eps = 1e-2;
            let c1 = linear(2, 0, false, eps, &CMatrix::unit(3, 0, 1));
            let c2 = linear(2, 1, false, eps, &CMatrix::unit(3, 1, 2));
            let z3 = CMatrix::zeros(3, 3);
            build(2, cfield(&CMatrix::identity(3), 2), vec![c1, c2], cfield(&z3, 2), cfield(&CMatrix::diag_real(&[2.0, 1.0, 0.0]), 2))
        }
        "dprime-phi" => build(
            2,
            cfield(&i2, 2),
            vec![linear(2, 1, false, EPS, &e12), cfield(&z2, 2)],
            cfield(&z2, 2),
            cfield(&q10, 2),
        ),
        "curvature" => {
            let ttb = &JetPoly::var(1, D, 0) * &JetPoly::var_bar(1, D, 0);
            let h = cfield(&i2, 1).try_add(&MatrixField::scalar_times(&ttb.scale(C64::new(EPS, 0.0)), &i2))?;
            build(1, h, vec![cfield(&z2, 1)], cfield(&z2, 1), cfield(&z2, 1))
        }
        other => Err(Error::UnknownFixture(format!("perturbed-{other}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::full_report;

    #[test]
    fn clean_fixtures_pass() {
        for name in CLEAN {
            let b = fixture(name, Some(4), 0).unwrap();
            let rep = full_report(&b, 1e-9).unwrap();
            assert!(rep.pass, "{name}:\n{}", rep.to_text());
        }
    }

    #[test]
    fn each_perturbation_isolated() {
        for id in PERTURBED {
            let b = perturbed(id).unwrap();
            let rep = full_report(&b, 1e-9).unwrap();
            assert_eq!(rep.failed(), vec![*id], "{}", rep.to_text());
        }
    }

    #[test]
    fn perturbed_vhs_names_ucq() {
        let rep = full_report(&fixture("perturbed-vhs", None, 0).unwrap(), 1e-9).unwrap();
        assert!(rep.failed().contains(&"UCQ"));
    }

    #[test]
    fn random_ttstar_is_clean() {
        for (r, seed) in [(3, 1), (4, 2), (7, 3)] {
            let b = random_ttstar(r, seed).unwrap();
            let rep = full_report(&b, 1e-9).unwrap();
            assert!(rep.pass, "{}", rep.to_text());
        }
    }

    #[test]
    fn unknown_name() {
        assert!(matches!(fixture("nope", None, 0), Err(Error::UnknownFixture(_))));
    }
}
