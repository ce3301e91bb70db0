//! JSON encoding of bundles and of plain complex matrices.
//!
//! An entry is a number, a `[re, im]` pair, or a jet
//! `{"terms": [{"mono": {"t1": 1, "tb2": 1}, "c": [re, im]}]}` with
//! 1-based variable names.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::bundle::{CVBundleData, DEFAULT_JET_DEGREE};
use crate::error::{Error, Result};
use crate::jet::{JetPoly, MatrixField};
use crate::linalg::{CMatrix, C64};

/// Upper bounds keeping hostile inputs from allocating without limit.
const MAX_RANK: usize = 64;
const MAX_DIM: usize = 8;
const MAX_DEGREE: usize = 12;

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(untagged)]
pub(crate) enum EntryJson {
    Real(f64),
    Complex([f64; 2]),
    Jet(JetJson),
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub(crate) struct JetJson {
    terms: Vec<TermJson>,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
struct TermJson {
    mono: BTreeMap<String, u32>,
    c: [f64; 2],
}

pub(crate) type MatrixJson = Vec<Vec<EntryJson>>;

#[derive(Serialize, Deserialize, Debug)]
#[serde(deny_unknown_fields)]
struct BundleJson {
    rank: usize,
    dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weight: Option<i64>,
    #[serde(default = "default_degree")]
    jet_degree: usize,
    metric: MatrixJson,
    higgs: Vec<MatrixJson>,
    #[serde(rename = "U")]
    u: MatrixJson,
    #[serde(rename = "Q")]
    q: MatrixJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kappa: Option<MatrixJson>,
}

fn default_degree() -> usize {
    DEFAULT_JET_DEGREE
}

/// Parses text into a JSON value, mapping syntax failures to `Parse`.
pub(crate) fn parse_value(bytes: &[u8]) -> Result<Value> {
    serde_json::from_slice(bytes).map_err(|e| Error::Parse(e.to_string()))
}

/// Decodes a typed document, mapping shape failures to `Schema` with the
/// field named in serde's message when there is one.
pub(crate) fn from_value<T: for<'de> Deserialize<'de>>(v: Value) -> Result<T> {
    serde_json::from_value(v).map_err(|e| {
        let msg = e.to_string();
        let field = msg.split('`').nth(1).unwrap_or("document").to_string();
        Error::Schema { field, reason: msg }
    })
}

fn finite(field: &str, x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::schema(field, "non-finite number"))
    }
}

fn parse_mono(field: &str, dim: usize, mono: &BTreeMap<String, u32>) -> Result<(Vec<u8>, Vec<u8>)> {
    let mut hol = vec![0u8; dim];
    let mut anti = vec![0u8; dim];
    for (name, &e) in mono {
        let (slot, rest) = match name.strip_prefix("tb") {
            Some(rest) => (&mut anti, rest),
            None => match name.strip_prefix('t') {
                Some(rest) => (&mut hol, rest),
                None => return Err(Error::schema(field, format!("unknown variable `{name}`"))),
            },
        };
        let idx: usize = rest
            .parse()
            .ok()
            .filter(|&i| (1..=dim).contains(&i))
            .ok_or_else(|| Error::schema(field, format!("variable `{name}` out of range for dim {dim}")))?;
        let e = u8::try_from(e).map_err(|_| Error::schema(field, format!("exponent {e} too large")))?;
        slot[idx - 1] = slot[idx - 1]
            .checked_add(e)
            .ok_or_else(|| Error::schema(field, "exponent overflow"))?;
    }
    Ok((hol, anti))
}

fn entry_to_jet(field: &str, e: &EntryJson, dim: usize, degree: usize) -> Result<JetPoly> {
    match e {
        EntryJson::Real(x) => Ok(JetPoly::constant(dim, degree, C64::new(finite(field, *x)?, 0.0))),
        EntryJson::Complex([re, im]) => {
            Ok(JetPoly::constant(dim, degree, C64::new(finite(field, *re)?, finite(field, *im)?)))
        }
        EntryJson::Jet(j) => {
            let mut p = JetPoly::zero(dim, degree);
            for t in &j.terms {
                let (hol, anti) = parse_mono(field, dim, &t.mono)?;
                let c = C64::new(finite(field, t.c[0])?, finite(field, t.c[1])?);
                let total: usize = hol.iter().chain(&anti).map(|&x| x as usize).sum();
                if total > degree {
                    return Err(Error::invariant(field, format!("monomial of degree {total} exceeds jet degree {degree}")));
                }
                p = &p + &JetPoly::monomial(dim, degree, &hol, &anti, c)?;
            }
            Ok(p)
        }
    }
}

fn matrix_shape(field: &str, m: &MatrixJson, rows: usize, cols: usize) -> Result<()> {
    if m.len() != rows || m.iter().any(|r| r.len() != cols) {
        return Err(Error::schema(field, format!("expected a {rows}x{cols} matrix")));
    }
    Ok(())
}

pub(crate) fn field_from_json(field: &str, m: &MatrixJson, rank: usize, dim: usize, degree: usize) -> Result<MatrixField> {
    matrix_shape(field, m, rank, rank)?;
    let entries = m
        .iter()
        .flatten()
        .map(|e| entry_to_jet(field, e, dim, degree))
        .collect::<Result<Vec<_>>>()?;
    MatrixField::from_entries(rank, rank, entries)
}

/// Constant matrix of any shape; jet entries are rejected.
pub(crate) fn matrix_from_json(field: &str, m: &MatrixJson) -> Result<CMatrix> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return Err(Error::schema(field, "empty matrix"));
    }
    if rows > MAX_RANK || cols > MAX_RANK {
        return Err(Error::schema(field, format!("matrix larger than {MAX_RANK}")));
    }
    matrix_shape(field, m, rows, cols)?;
    let data = m
        .iter()
        .flatten()
        .map(|e| match e {
            EntryJson::Real(x) => Ok(C64::new(finite(field, *x)?, 0.0)),
            EntryJson::Complex([re, im]) => Ok(C64::new(finite(field, *re)?, finite(field, *im)?)),
            EntryJson::Jet(_) => Err(Error::schema(field, "expected a constant entry")),
        })
        .collect::<Result<Vec<_>>>()?;
    CMatrix::from_vec(rows, cols, data)
}

fn entry_json(c: C64) -> EntryJson {
    EntryJson::Complex([c.re, c.im])
}

pub(crate) fn matrix_to_json(m: &CMatrix) -> MatrixJson {
    (0..m.rows()).map(|i| m.row(i).iter().map(|&c| entry_json(c)).collect()).collect()
}

fn mono_name(e: &[u8], dim: usize) -> BTreeMap<String, u32> {
    let mut out = BTreeMap::new();
    for (k, &x) in e.iter().enumerate() {
        if x > 0 {
            let name = if k < dim { format!("t{}", k + 1) } else { format!("tb{}", k - dim + 1) };
            out.insert(name, x as u32);
        }
    }
    out
}

fn field_to_json(f: &MatrixField) -> MatrixJson {
    (0..f.rows())
        .map(|i| {
            (0..f.cols())
                .map(|j| {
                    let p = f.entry(i, j);
                    let constant_only = p.terms().all(|(e, _)| e.iter().all(|&x| x == 0));
                    if constant_only {
                        entry_json(p.constant_term())
                    } else {
                        let terms = p
                            .terms()
                            .map(|(e, c)| TermJson { mono: mono_name(e, f.dim()), c: [c.re, c.im] })
                            .collect();
                        EntryJson::Jet(JetJson { terms })
                    }
                })
                .collect()
        })
        .collect()
}

/// Decodes and validates a bundle document.
pub fn load(bytes: &[u8]) -> Result<CVBundleData> {
    let doc: BundleJson = from_value(parse_value(bytes)?)?;
    if doc.rank == 0 || doc.rank > MAX_RANK {
        return Err(Error::schema("rank", format!("must lie in 1..={MAX_RANK}")));
    }
    if doc.dim == 0 || doc.dim > MAX_DIM {
        return Err(Error::schema("dim", format!("must lie in 1..={MAX_DIM}")));
    }
    if doc.jet_degree == 0 || doc.jet_degree > MAX_DEGREE {
        return Err(Error::schema("jet_degree", format!("must lie in 1..={MAX_DEGREE}")));
    }
    let (r, m, d) = (doc.rank, doc.dim, doc.jet_degree);
    if doc.higgs.len() != m {
        return Err(Error::schema("higgs", format!("expected {m} matrices, got {}", doc.higgs.len())));
    }
    let metric = field_from_json("metric", &doc.metric, r, m, d)?;
    let higgs = doc
        .higgs
        .iter()
        .map(|c| field_from_json("higgs", c, r, m, d))
        .collect::<Result<Vec<_>>>()?;
    let u = field_from_json("U", &doc.u, r, m, d)?;
    let q = field_from_json("Q", &doc.q, r, m, d)?;
    let kappa = match &doc.kappa {
        Some(k) => {
            matrix_shape("kappa", k, r, r)?;
            Some(matrix_from_json("kappa", k)?)
        }
        None => None,
    };
    CVBundleData::new(r, m, doc.weight, d, metric, higgs, u, q, kappa)
}

/// Encodes a bundle in the format accepted by [`load`].
pub fn to_json(b: &CVBundleData) -> String {
    let doc = BundleJson {
        rank: b.rank,
        dim: b.dim,
        weight: b.weight,
        jet_degree: b.jet_degree,
        metric: field_to_json(&b.metric),
        higgs: b.higgs.iter().map(field_to_json).collect(),
        u: field_to_json(&b.u),
        q: field_to_json(&b.q),
        kappa: b.kappa.as_ref().map(matrix_to_json),
    };
    serde_json::to_string_pretty(&doc).expect("bundle serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_rank_one() {
        let b = load(br#"{"rank":1,"dim":1,"metric":[[1]],"higgs":[[[0]]],"U":[[0]],"Q":[[0]]}"#).unwrap();
        assert_eq!(b.jet_degree, 3);
        assert!(b.kappa.is_none());
    }

    #[test]
    fn unknown_key_is_schema_error() {
        let e = load(br#"{"rank":1,"dim":1,"metric":[[1]],"higgs":[[[0]]],"U":[[0]],"Q":[[0]],"extra":1}"#);
        assert!(matches!(e, Err(Error::Schema { ref field, .. }) if field == "extra"));
    }

    #[test]
    fn syntax_error_is_parse_error() {
        assert!(matches!(load(b"{\"rank\":"), Err(Error::Parse(_))));
    }

    #[test]
    fn non_hermitian_metric() {
        let e = load(br#"{"rank":2,"dim":1,"metric":[[1,1],[0,1]],"higgs":[[[0,0],[0,0]]],"U":[[0,0],[0,0]],"Q":[[0,0],[0,0]]}"#);
        assert!(matches!(e, Err(Error::InvariantViolation { ref field, .. }) if field == "metric"));
    }

    #[test]
    fn jet_entries_round_trip() {
        let src = br#"{"rank":1,"dim":2,"jet_degree":2,"metric":[[{"terms":[{"mono":{},"c":[1,0]},{"mono":{"t1":1,"tb1":1},"c":[0.5,0]}]}]],
            "higgs":[[[0]],[[{"terms":[{"mono":{"t2":1},"c":[0,2]}]}]]],"U":[[0]],"Q":[[0]]}"#;
        let b = load(src).unwrap();
        assert_eq!(b.higgs[1].entry(0, 0).coefficient(&[0, 1, 0, 0]), C64::new(0.0, 2.0));
        assert_eq!(load(to_json(&b).as_bytes()).unwrap(), b);
    }

    #[test]
    fn monomial_above_degree() {
        let src = br#"{"rank":1,"dim":1,"jet_degree":1,"metric":[[1]],"higgs":[[[{"terms":[{"mono":{"t1":2},"c":[1,0]}]}]]],"U":[[0]],"Q":[[0]]}"#;
        assert!(matches!(load(src), Err(Error::InvariantViolation { .. })));
    }
}
