use crate::error::{Error, Result};
use crate::jet::MatrixField;
use crate::linalg::{cholesky, CMatrix};

pub const DEFAULT_JET_DEGREE: usize = 3;

/// Local data of a (possibly real) integrable harmonic Higgs bundle in a
/// holomorphic frame.
///
/// `higgs[i]` is `Cᵢ`, the matrix of `−Φ_{∂ᵢ}`; the metric field is the Gram
/// matrix of `h` with `h(u, v) = v* H u`; `kappa` is a constant `K` acting
/// as `v ↦ K conj(v)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CVBundleData {
    pub rank: usize,
    pub dim: usize,
    pub weight: Option<i64>,
    pub jet_degree: usize,
    pub metric: MatrixField,
    pub higgs: Vec<MatrixField>,
    pub u: MatrixField,
    pub q: MatrixField,
    pub kappa: Option<CMatrix>,
}

impl CVBundleData {
    /// Bundle with constant data on a base of dimension `dim`.
    pub fn constant(
        metric: &CMatrix,
        higgs: &[CMatrix],
        u: &CMatrix,
        q: &CMatrix,
        kappa: Option<CMatrix>,
        weight: Option<i64>,
        dim: usize,
        jet_degree: usize,
    ) -> Result<Self> {
        let f = |m: &CMatrix| MatrixField::constant(m, dim, jet_degree);
        let mut higgs: Vec<MatrixField> = higgs.iter().map(f).collect();
        if higgs.is_empty() {
            higgs = vec![MatrixField::zeros(metric.rows(), metric.rows(), dim, jet_degree); dim];
        }
        Self::new(metric.rows(), dim, weight, jet_degree, f(metric), higgs, f(u), f(q), kappa)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn new(
        rank: usize,
        dim: usize,
        weight: Option<i64>,
        jet_degree: usize,
        metric: MatrixField,
        higgs: Vec<MatrixField>,
        u: MatrixField,
        q: MatrixField,
        kappa: Option<CMatrix>,
    ) -> Result<Self> {
        let b = Self { rank, dim, weight, jet_degree, metric, higgs, u, q, kappa };
        b.validate_shapes()?;
        b.validate_metric(crate::linalg::DEFAULT_TOL)?;
        Ok(b)
    }

    /// Structural checks only; the metric may be indefinite.
    pub(crate) fn new_unchecked_metric(
        rank: usize,
        dim: usize,
        weight: Option<i64>,
        jet_degree: usize,
        metric: MatrixField,
        higgs: Vec<MatrixField>,
        u: MatrixField,
        q: MatrixField,
        kappa: Option<CMatrix>,
    ) -> Result<Self> {
        let b = Self { rank, dim, weight, jet_degree, metric, higgs, u, q, kappa };
        b.validate_shapes()?;
        Ok(b)
    }

    pub fn validate_shapes(&self) -> Result<()> {
        if self.rank == 0 {
            return Err(Error::schema("rank", "must be positive"));
        }
        if self.dim == 0 {
            return Err(Error::schema("dim", "must be positive"));
        }
        if self.jet_degree == 0 {
            return Err(Error::schema("jet_degree", "must be positive"));
        }
        let check = |name: &str, f: &MatrixField| -> Result<()> {
            if f.rows() != self.rank || f.cols() != self.rank {
                return Err(Error::schema(name, format!("expected {0}x{0}, got {1}x{2}", self.rank, f.rows(), f.cols())));
            }
            if f.dim() != self.dim || f.degree() != self.jet_degree {
                return Err(Error::schema(name, "base dimension or jet degree disagrees with the bundle"));
            }
            Ok(())
        };
        check("metric", &self.metric)?;
        check("U", &self.u)?;
        check("Q", &self.q)?;
        if self.higgs.len() != self.dim {
            return Err(Error::schema("higgs", format!("expected {} components, got {}", self.dim, self.higgs.len())));
        }
        for c in &self.higgs {
            check("higgs", c)?;
        }
        if let Some(k) = &self.kappa {
            if k.rows() != self.rank || k.cols() != self.rank {
                return Err(Error::schema("kappa", format!("expected {0}x{0}", self.rank)));
            }
        }
        Ok(())
    }

    /// Metric Hermitian as a field and positive definite at the origin.
    pub fn validate_metric(&self, tol: f64) -> Result<()> {
        let defect = self.metric.adjoint().try_sub(&self.metric)?.max_abs();
        let scale = self.metric.max_abs().max(1.0);
        if defect > tol * scale {
            return Err(Error::invariant("metric", format!("not Hermitian (defect {defect:.3e})")));
        }
        cholesky(&self.metric.at_origin(), tol)
            .map_err(|_| Error::invariant("metric", "not positive definite at the origin"))?;
        Ok(())
    }

    pub fn metric_at_origin(&self) -> CMatrix {
        self.metric.at_origin()
    }

    pub fn has_trivial_higgs(&self, tol: f64) -> bool {
        self.higgs.iter().all(|c| c.max_abs() <= tol)
    }
}
