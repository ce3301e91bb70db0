use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::linalg::{C64, ZERO};

/// Exponent vector over `(t¹..tᵐ, t̄¹..t̄ᵐ)`; holomorphic exponents first.
pub type Exponents = Vec<u8>;

/// Polynomial in `t` and `t̄` with complex coefficients, truncated at a
/// fixed total degree.
///
/// `t` and `t̄` are independent formal variables. Products drop every
/// monomial above the truncation degree, so identities are exact only up
/// to the degree the caller certifies.
#[derive(Clone, PartialEq, Debug)]
pub struct JetPoly {
    dim: usize,
    degree: usize,
    terms: BTreeMap<Exponents, C64>,
}

fn total(e: &[u8]) -> usize {
    e.iter().map(|&x| x as usize).sum()
}

impl JetPoly {
    pub fn zero(dim: usize, degree: usize) -> Self {
        Self { dim, degree, terms: BTreeMap::new() }
    }

    pub fn constant(dim: usize, degree: usize, c: C64) -> Self {
        let mut p = Self::zero(dim, degree);
        p.add_term(vec![0; 2 * dim], c);
        p
    }

    /// `c · Π tⁱ^{hol[i]} · Π t̄ⁱ^{anti[i]}`; monomials above the truncation
    /// degree are rejected.
    pub fn monomial(dim: usize, degree: usize, hol: &[u8], anti: &[u8], c: C64) -> Result<Self> {
        if hol.len() != dim || anti.len() != dim {
            return Err(Error::dims(format!("monomial exponents for base dimension {dim}")));
        }
        let mut e = hol.to_vec();
        e.extend_from_slice(anti);
        if total(&e) > degree {
            return Err(Error::invariant("mono", format!("total degree {} exceeds jet degree {degree}", total(&e))));
        }
        let mut p = Self::zero(dim, degree);
        p.add_term(e, c);
        Ok(p)
    }

    /// The coordinate `tⁱ` (0-based).
    pub fn var(dim: usize, degree: usize, i: usize) -> Self {
        let mut e = vec![0; 2 * dim];
        e[i] = 1;
        let mut p = Self::zero(dim, degree);
        p.add_term(e, C64::new(1.0, 0.0));
        p
    }

    /// The coordinate `t̄ⁱ` (0-based).
    pub fn var_bar(dim: usize, degree: usize, i: usize) -> Self {
        let mut e = vec![0; 2 * dim];
        e[dim + i] = 1;
        let mut p = Self::zero(dim, degree);
        p.add_term(e, C64::new(1.0, 0.0));
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &C64)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub(crate) fn add_term(&mut self, e: Exponents, c: C64) {
        if c == ZERO || total(&e) > self.degree {
            return;
        }
        match self.terms.entry(e) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if *o.get() == ZERO {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn coefficient(&self, e: &[u8]) -> C64 {
        self.terms.get(e).copied().unwrap_or(ZERO)
    }

    pub fn constant_term(&self) -> C64 {
        self.coefficient(&vec![0; 2 * self.dim])
    }

    fn check_compatible(&self, other: &Self) {
        assert!(
            self.dim == other.dim && self.degree == other.degree,
            "jet shape mismatch: (m={}, d={}) vs (m={}, d={})",
            self.dim, self.degree, other.dim, other.degree
        );
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut p = Self::zero(self.dim, self.degree);
        for (e, c) in &self.terms {
            p.add_term(e.clone(), c * s);
        }
        p
    }

    fn derive(&self, slot: usize) -> Self {
        let mut p = Self::zero(self.dim, self.degree);
        for (e, c) in &self.terms {
            if e[slot] > 0 {
                let mut e2 = e.clone();
                e2[slot] -= 1;
                p.add_term(e2, c * e[slot] as f64);
            }
        }
        p
    }

    /// Formal ∂/∂tⁱ (0-based index).
    pub fn d_holo(&self, i: usize) -> Result<Self> {
        if i >= self.dim {
            return Err(Error::IndexOutOfRange { index: i, dim: self.dim });
        }
        Ok(self.derive(i))
    }

    /// Formal ∂/∂t̄ⁱ (0-based index).
    pub fn d_anti(&self, i: usize) -> Result<Self> {
        if i >= self.dim {
            return Err(Error::IndexOutOfRange { index: i, dim: self.dim });
        }
        Ok(self.derive(self.dim + i))
    }

    /// Complex conjugate: conjugates coefficients and swaps `t ↔ t̄`.
    pub fn conj(&self) -> Self {
        let mut p = Self::zero(self.dim, self.degree);
        for (e, c) in &self.terms {
            let mut e2 = e[self.dim..].to_vec();
            e2.extend_from_slice(&e[..self.dim]);
            p.add_term(e2, c.conj());
        }
        p
    }

    /// Evaluates with `t` and `t̄` supplied independently.
    pub fn eval(&self, t: &[C64], tb: &[C64]) -> C64 {
        assert!(t.len() == self.dim && tb.len() == self.dim, "evaluation point dimension");
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut v = *c;
                for i in 0..self.dim {
                    v *= t[i].powu(e[i] as u32) * tb[i].powu(e[self.dim + i] as u32);
                }
                v
            })
            .sum()
    }

    /// Evaluates at a genuine point, `t̄ = conj(t)`.
    pub fn eval_at(&self, t: &[C64]) -> C64 {
        let tb: Vec<C64> = t.iter().map(C64::conj).collect();
        self.eval(t, &tb)
    }

    /// Largest coefficient magnitude in each total degree `0..=degree`.
    pub fn degree_norms(&self) -> Vec<f64> {
        let mut out = vec![0.0_f64; self.degree + 1];
        for (e, c) in &self.terms {
            let k = total(e);
            out[k] = out[k].max(c.norm());
        }
        out
    }

    pub fn max_abs_through(&self, k: usize) -> f64 {
        self.terms.iter().filter(|(e, _)| total(e) <= k).map(|(_, c)| c.norm()).fold(0.0, f64::max)
    }

    /// True when some monomial carries a `t̄` factor.
    pub fn has_antiholomorphic_terms(&self) -> bool {
        self.terms.keys().any(|e| e[self.dim..].iter().any(|&x| x > 0))
    }

    /// Drops every monomial of total degree above `k`.
    pub fn truncate(&self, k: usize) -> Self {
        let mut p = Self::zero(self.dim, self.degree);
        for (e, c) in &self.terms {
            if total(e) <= k {
                p.add_term(e.clone(), *c);
            }
        }
        p
    }
}

impl Add<&JetPoly> for &JetPoly {
    type Output = JetPoly;
    fn add(self, rhs: &JetPoly) -> JetPoly {
        self.check_compatible(rhs);
        let mut p = self.clone();
        for (e, c) in &rhs.terms {
            p.add_term(e.clone(), *c);
        }
        p
    }
}

impl Sub<&JetPoly> for &JetPoly {
    type Output = JetPoly;
    fn sub(self, rhs: &JetPoly) -> JetPoly {
        self.check_compatible(rhs);
        let mut p = self.clone();
        for (e, c) in &rhs.terms {
            p.add_term(e.clone(), -c);
        }
        p
    }
}

impl Mul<&JetPoly> for &JetPoly {
    type Output = JetPoly;
    fn mul(self, rhs: &JetPoly) -> JetPoly {
        self.check_compatible(rhs);
        let mut p = JetPoly::zero(self.dim, self.degree);
        for (ea, ca) in &self.terms {
            let da = total(ea);
            for (eb, cb) in &rhs.terms {
                if da + total(eb) > self.degree {
                    continue;
                }
                let e: Vec<u8> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                p.add_term(e, ca * cb);
            }
        }
        p
    }
}

impl Neg for &JetPoly {
    type Output = JetPoly;
    fn neg(self) -> JetPoly {
        self.scale(C64::new(-1.0, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one() -> C64 {
        C64::new(1.0, 0.0)
    }

    #[test]
    fn mixed_monomial_derivatives() {
        // t¹ t̄² on a two-dimensional base
        let p = JetPoly::monomial(2, 3, &[1, 0], &[0, 1], one()).unwrap();
        let want = JetPoly::var_bar(2, 3, 1);
        assert_eq!(p.d_holo(0).unwrap(), want);
        assert!(p.d_anti(0).unwrap().is_zero());
    }

    #[test]
    fn out_of_range_index() {
        let p = JetPoly::var(1, 3, 0);
        assert_eq!(p.d_holo(1), Err(Error::IndexOutOfRange { index: 1, dim: 1 }));
        assert!(p.d_anti(3).is_err());
    }

    #[test]
    fn products_truncate() {
        let t = JetPoly::var(1, 2, 0);
        let t2 = &t * &t;
        assert_eq!(t2.coefficient(&[2, 0]), one());
        assert!((&t2 * &t).is_zero());
    }

    #[test]
    fn conjugation_swaps_variables() {
        let p = JetPoly::monomial(1, 3, &[2], &[0], C64::new(1.0, 2.0)).unwrap();
        let q = p.conj();
        assert_eq!(q.coefficient(&[0, 2]), C64::new(1.0, -2.0));
        assert_eq!(q.conj(), p);
    }

    #[test]
    fn monomial_above_degree_rejected() {
        assert!(JetPoly::monomial(1, 2, &[2], &[1], one()).is_err());
    }

    #[test]
    fn cancellation_removes_terms() {
        let t = JetPoly::var(1, 3, 0);
        assert!((&t - &t).is_zero());
    }
}
