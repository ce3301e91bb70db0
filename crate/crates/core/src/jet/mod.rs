//! Truncated polynomial matrix fields on a coordinate patch.

mod chern;
mod field;
mod poly;

pub use chern::{chern_connection, compatibility_residual, covariant_d, curvature_residual, h_adjoint_field, ConnectionData};
pub use field::MatrixField;
pub use poly::{Exponents, JetPoly};

use serde::Serialize;

/// Per-degree maxima of a field identity's defect, with the highest degree
/// the truncation lets us certify.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FieldResidual {
    pub per_degree: Vec<f64>,
    pub certified_degree: usize,
}

impl FieldResidual {
    pub fn zero(degree: usize, certified_degree: usize) -> Self {
        Self { per_degree: vec![0.0; degree + 1], certified_degree: certified_degree.min(degree) }
    }

    pub fn from_field(f: &MatrixField, certified_degree: usize) -> Self {
        let mut r = Self::zero(f.degree(), certified_degree);
        r.absorb(f);
        r
    }

    pub fn absorb(&mut self, f: &MatrixField) {
        for (k, v) in f.degree_norms().into_iter().enumerate() {
            if k < self.per_degree.len() {
                self.per_degree[k] = self.per_degree[k].max(v);
            }
        }
    }

    pub fn merge(&mut self, other: &FieldResidual) {
        self.certified_degree = self.certified_degree.min(other.certified_degree);
        for (a, b) in self.per_degree.iter_mut().zip(&other.per_degree) {
            *a = a.max(*b);
        }
    }

    /// Largest defect over the certified degrees.
    pub fn max(&self) -> f64 {
        self.per_degree.iter().take(self.certified_degree + 1).fold(0.0_f64, |a, &b| a.max(b))
    }
}
