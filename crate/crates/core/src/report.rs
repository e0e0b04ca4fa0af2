//! JSON rendering of polynomials, forms, tables and residual reports. Every
//! collection is emitted in its canonical order so output is reproducible.

use num_traits::Zero;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::forms::{DxMask, ScalarFormSeries};
use crate::hochschild::{Cochain, ResidualTerm};
use crate::poly::{render_monomial, BasePoly, Monomial};
use crate::scalar::Scalar;
use crate::star_table::{Bidiff, StarProductTable};
use crate::weyl_form::WeylForm;

/// `[coefficient, exponents]` pairs.
pub type PolyTerms = Vec<(String, Vec<u16>)>;

/// `"a/b"` for real scalars, `"a/b+c/d*i"` otherwise.
pub fn scalar_str(s: &Scalar) -> String {
    if s.im().is_zero() {
        let r = s.re();
        format!("{}/{}", r.numer(), r.denom())
    } else {
        s.to_string()
    }
}

pub fn parse_scalar(s: &str) -> Result<Scalar> {
    s.parse().map_err(|_| Error::Invalid(format!("bad scalar {s:?}")))
}

pub fn poly_terms(p: &BasePoly) -> PolyTerms {
    p.terms().map(|(m, c)| (scalar_str(c), m.exponents(p.dim()).to_vec())).collect()
}

pub fn parse_poly(dim: usize, terms: &PolyTerms) -> Result<BasePoly> {
    let mut p = BasePoly::zero(dim);
    for (c, e) in terms {
        if e.len() != dim {
            return Err(Error::DimensionMismatch(dim, e.len()));
        }
        p.add_term(Monomial::from_exponents(e), &parse_scalar(c)?);
    }
    Ok(p)
}

/// `[{hbar_order, dx, poly}]`.
pub fn form_json(w: &ScalarFormSeries) -> Value {
    Value::Array(
        w.entries()
            .map(|((k, m), p)| json!({ "hbar_order": k, "dx": m.indices(), "poly": poly_terms(p) }))
            .collect(),
    )
}

pub fn mask_of(dx: &[usize]) -> Result<(i64, DxMask)> {
    DxMask::from_indices(dx).ok_or_else(|| Error::Invalid(format!("repeated dx index in {dx:?}")))
}

pub fn bidiff_json(op: &Bidiff, dim: usize) -> Value {
    Value::Array(
        op.iter()
            .map(|((a, b), g)| json!({ "left": a.exponents(dim), "right": b.exponents(dim), "coeff": poly_terms(g) }))
            .collect(),
    )
}

pub fn table_json(t: &StarProductTable) -> Value {
    Value::Array(
        t.ops().iter().enumerate().map(|(k, op)| json!({ "order": k, "terms": bidiff_json(op, t.dim()) })).collect(),
    )
}

pub fn cochain_json(c: &Cochain) -> Value {
    let terms: Vec<Value> = c
        .terms()
        .map(|((l, d), g)| {
            let derivs: Vec<&[u16]> = d.iter().map(|m| m.exponents(c.dim())).collect();
            json!({ "hbar_order": l, "derivatives": derivs, "coeff": poly_terms(g) })
        })
        .collect();
    json!({ "arity": c.arity(), "terms": terms })
}

/// One nonzero coefficient of a residual.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct ResidualEntry {
    pub hbar_order: i32,
    pub at: String,
    pub value: String,
}

/// Residual entries of a Weyl form, located by `y`-monomial and `dx` factor.
pub fn weyl_form_residuals(f: &WeylForm) -> Vec<ResidualEntry> {
    let dim = f.dim();
    let mut out = Vec::new();
    for (m, a) in f.entries() {
        for (k, p) in a.terms() {
            out.push(ResidualEntry {
                hbar_order: k.hbar,
                at: format!("{} {}", render_monomial(&k.y, dim, "y"), m.render()),
                value: p.render(),
            });
        }
    }
    out
}

/// Residual entries of evaluation sweeps, located by the argument tuple.
pub fn evaluation_residuals(terms: &[ResidualTerm]) -> Vec<ResidualEntry> {
    terms
        .iter()
        .map(|t| ResidualEntry {
            hbar_order: t.hbar_order,
            at: format!("({})", t.args.iter().map(|a| a.render()).collect::<Vec<_>>().join(", ")),
            value: t.value.render(),
        })
        .collect()
}

/// Residual listings are cut here; the full count goes into the details.
pub const MAX_LISTED_RESIDUALS: usize = 64;

/// Outcome of one named check.
#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub max_hbar_order: i32,
    pub passed: bool,
    pub residual_terms: Vec<ResidualEntry>,
    pub details: Map<String, Value>,
}

impl CheckReport {
    /// A check that passes iff `residuals` is empty.
    pub fn from_residuals(check: &str, max_hbar_order: i32, mut residuals: Vec<ResidualEntry>) -> Self {
        let mut details = Map::new();
        details.insert("residual_count".into(), json!(residuals.len()));
        let passed = residuals.is_empty();
        residuals.truncate(MAX_LISTED_RESIDUALS);
        CheckReport { check: check.into(), max_hbar_order, passed, residual_terms: residuals, details }
    }

    pub fn detail(mut self, key: &str, value: Value) -> Self {
        self.details.insert(key.into(), value);
        self
    }

    /// Additional pass condition beyond the residual list.
    pub fn require(mut self, ok: bool) -> Self {
        self.passed &= ok;
        self
    }
}

/// All checks of one `verify` run.
#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub example: String,
    pub suite: String,
    pub seed: u64,
    pub degree_cap: i32,
    pub order: usize,
    pub test_degree: u32,
    pub passed: bool,
    pub checks: Vec<CheckReport>,
}

/// Pretty JSON with a trailing newline.
pub fn to_json_string<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}
