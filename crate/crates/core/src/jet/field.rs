use super::poly::JetPoly;
use crate::error::{Error, Result};
use crate::linalg::{inverse, CMatrix, C64};

/// Matrix whose entries are jets sharing one base dimension and degree.
#[derive(Clone, PartialEq, Debug)]
pub struct MatrixField {
    rows: usize,
    cols: usize,
    dim: usize,
    degree: usize,
    entries: Vec<JetPoly>,
}

impl MatrixField {
    pub fn zeros(rows: usize, cols: usize, dim: usize, degree: usize) -> Self {
        Self { rows, cols, dim, degree, entries: vec![JetPoly::zero(dim, degree); rows * cols] }
    }

    pub fn identity(n: usize, dim: usize, degree: usize) -> Self {
        Self::constant(&CMatrix::identity(n), dim, degree)
    }

    pub fn constant(m: &CMatrix, dim: usize, degree: usize) -> Self {
        let entries = m.as_slice().iter().map(|&c| JetPoly::constant(dim, degree, c)).collect();
        Self { rows: m.rows(), cols: m.cols(), dim, degree, entries }
    }

    pub fn from_entries(rows: usize, cols: usize, entries: Vec<JetPoly>) -> Result<Self> {
        if entries.len() != rows * cols || entries.is_empty() {
            return Err(Error::dims(format!("{} jets for a {rows}x{cols} field", entries.len())));
        }
        let (dim, degree) = (entries[0].dim(), entries[0].degree());
        if entries.iter().any(|e| e.dim() != dim || e.degree() != degree) {
            return Err(Error::dims("jets with mixed base dimension or degree"));
        }
        Ok(Self { rows, cols, dim, degree, entries })
    }

    /// `p · E` for a scalar jet `p` and a constant matrix `E`.
    pub fn scalar_times(p: &JetPoly, m: &CMatrix) -> Self {
        let entries = m.as_slice().iter().map(|&c| p.scale(c)).collect();
        Self { rows: m.rows(), cols: m.cols(), dim: p.dim(), degree: p.degree(), entries }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entry(&self, i: usize, j: usize) -> &JetPoly {
        &self.entries[i * self.cols + j]
    }

    pub fn entry_mut(&mut self, i: usize, j: usize) -> &mut JetPoly {
        &mut self.entries[i * self.cols + j]
    }

    pub fn entries(&self) -> &[JetPoly] {
        &self.entries
    }

    fn map(&self, f: impl Fn(&JetPoly) -> JetPoly) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            dim: self.dim,
            degree: self.degree,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols || self.dim != other.dim || self.degree != other.degree {
            return Err(Error::dims(format!(
                "fields {}x{} (m={}, d={}) and {}x{} (m={}, d={})",
                self.rows, self.cols, self.dim, self.degree, other.rows, other.cols, other.dim, other.degree
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let mut out = self.clone();
        for (a, b) in out.entries.iter_mut().zip(&other.entries) {
            *a = &*a + b;
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let mut out = self.clone();
        for (a, b) in out.entries.iter_mut().zip(&other.entries) {
            *a = &*a - b;
        }
        Ok(out)
    }

    /// Matrix product with truncation to the jet degree.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows || self.dim != other.dim || self.degree != other.degree {
            return Err(Error::dims(format!(
                "field product {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols, self.dim, self.degree);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = JetPoly::zero(self.dim, self.degree);
                for k in 0..self.cols {
                    let a = self.entry(i, k);
                    let b = other.entry(k, j);
                    if a.is_zero() || b.is_zero() {
                        continue;
                    }
                    acc = &acc + &(a * b);
                }
                *out.entry_mut(i, j) = acc;
            }
        }
        Ok(out)
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.try_mul(other)?.try_sub(&other.try_mul(self)?)
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map(|p| p.scale(s))
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows, self.dim, self.degree);
        for i in 0..self.rows {
            for j in 0..self.cols {
                *out.entry_mut(j, i) = self.entry(i, j).clone();
            }
        }
        out
    }

    /// Entrywise complex conjugate (swaps `t ↔ t̄`).
    pub fn conj(&self) -> Self {
        self.map(JetPoly::conj)
    }

    /// Conjugate transpose as a field.
    pub fn adjoint(&self) -> Self {
        self.transpose().conj()
    }

    pub fn d_holo(&self, i: usize) -> Result<Self> {
        if i >= self.dim {
            return Err(Error::IndexOutOfRange { index: i, dim: self.dim });
        }
        Ok(self.map(|p| p.d_holo(i).expect("index checked")))
    }

    pub fn d_anti(&self, i: usize) -> Result<Self> {
        if i >= self.dim {
            return Err(Error::IndexOutOfRange { index: i, dim: self.dim });
        }
        Ok(self.map(|p| p.d_anti(i).expect("index checked")))
    }

    pub fn at_origin(&self) -> CMatrix {
        CMatrix::from_fn(self.rows, self.cols, |i, j| self.entry(i, j).constant_term())
    }

    pub fn eval(&self, t: &[C64], tb: &[C64]) -> CMatrix {
        CMatrix::from_fn(self.rows, self.cols, |i, j| self.entry(i, j).eval(t, tb))
    }

    pub fn eval_at(&self, t: &[C64]) -> CMatrix {
        CMatrix::from_fn(self.rows, self.cols, |i, j| self.entry(i, j).eval_at(t))
    }

    /// Per-degree maxima of coefficient magnitudes across all entries.
    pub fn degree_norms(&self) -> Vec<f64> {
        let mut out = vec![0.0_f64; self.degree + 1];
        for e in &self.entries {
            for (k, v) in e.degree_norms().into_iter().enumerate() {
                out[k] = f64::max(out[k], v);
            }
        }
        out
    }

    pub fn max_abs_through(&self, k: usize) -> f64 {
        self.entries.iter().map(|e| e.max_abs_through(k)).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.max_abs_through(self.degree)
    }

    pub fn has_antiholomorphic_terms(&self) -> bool {
        self.entries.iter().any(JetPoly::has_antiholomorphic_terms)
    }

    pub fn truncate(&self, k: usize) -> Self {
        self.map(|p| p.truncate(k))
    }

    /// Inverse as a jet: `(H₀ + N)⁻¹ = Σₖ (−H₀⁻¹N)ᵏ H₀⁻¹`, which terminates
    /// because `N` has no constant part.
    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::dims("inverse of a non-square field"));
        }
        let h0 = self.at_origin();
        let h0_inv = MatrixField::constant(&inverse(&h0)?, self.dim, self.degree);
        let n = self.try_sub(&MatrixField::constant(&h0, self.dim, self.degree))?;
        let step = h0_inv.try_mul(&n)?.scale(C64::new(-1.0, 0.0));
        let mut term = h0_inv.clone();
        let mut sum = h0_inv;
        for _ in 0..self.degree {
            term = step.try_mul(&term)?;
            sum = sum.try_add(&term)?;
        }
        Ok(sum)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_neutral() {
        let t = JetPoly::var(1, 3, 0);
        let b = MatrixField::scalar_times(&t, &CMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]));
        let i = MatrixField::identity(2, 1, 3);
        assert_eq!(i.try_mul(&b).unwrap(), b);
    }

    #[test]
    fn nilpotent_square_vanishes() {
        let n = MatrixField::constant(&CMatrix::unit(2, 0, 1), 1, 3);
        assert!(n.try_mul(&n).unwrap().max_abs() == 0.0);
    }

    #[test]
    fn inverse_of_metric_on_a_line() {
        // (1 + t t̄)⁻¹ = 1 − t t̄ + O(4) at degree 3
        let d = 3;
        let ttb = &JetPoly::var(1, d, 0) * &JetPoly::var_bar(1, d, 0);
        let h = MatrixField::from_entries(1, 1, vec![&JetPoly::constant(1, d, C64::new(1.0, 0.0)) + &ttb]).unwrap();
        let inv = h.inverse().unwrap();
        assert_eq!(inv.entry(0, 0).coefficient(&[1, 1]), C64::new(-1.0, 0.0));
        let prod = h.try_mul(&inv).unwrap();
        assert_eq!(prod, MatrixField::identity(1, 1, d));
    }

    #[test]
    fn mismatched_product_is_error() {
        let a = MatrixField::zeros(2, 3, 1, 2);
        assert!(a.try_mul(&a).is_err());
    }
}
