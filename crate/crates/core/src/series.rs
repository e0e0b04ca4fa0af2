//! Truncated ħ-Laurent series with polynomial coefficients (central elements).

use std::collections::BTreeMap;
use std::fmt;

use crate::poly::BasePoly;
use crate::scalar::Scalar;

/// Precision marker for a series with no truncation error.
pub const EXACT: i32 = i32::MAX / 4;

/// `Σ ħ^k f_k(x)` where every coefficient with `k < prec` is known exactly and
/// nothing is claimed about orders `≥ prec`.
#[derive(Clone, PartialEq, Eq)]
pub struct HbarSeries {
    dim: usize,
    prec: i32,
    coeffs: BTreeMap<i32, BasePoly>,
}

impl HbarSeries {
    pub fn zero(dim: usize, prec: i32) -> Self {
        HbarSeries { dim, prec, coeffs: BTreeMap::new() }
    }

    /// An exactly known, ħ-independent series.
    pub fn from_poly(p: BasePoly) -> Self {
        HbarSeries::term(0, p)
    }

    /// The exact monomial series `ħ^k f`.
    pub fn term(k: i32, p: BasePoly) -> Self {
        let mut s = HbarSeries::zero(p.dim(), EXACT);
        s.add_coeff(k, &p);
        s
    }

    pub fn from_coeffs(dim: usize, prec: i32, coeffs: impl IntoIterator<Item = (i32, BasePoly)>) -> Self {
        let mut s = HbarSeries::zero(dim, prec);
        for (k, p) in coeffs {
            s.add_coeff(k, &p);
        }
        s
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn prec(&self) -> i32 {
        self.prec
    }

    pub fn is_exact(&self) -> bool {
        self.prec >= EXACT / 2
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&i32, &BasePoly)> {
        self.coeffs.iter()
    }

    pub fn coeff(&self, k: i32) -> BasePoly {
        self.coeffs.get(&k).cloned().unwrap_or_else(|| BasePoly::zero(self.dim))
    }

    /// Lowest order that may be nonzero: the smallest stored exponent, or `prec` if none.
    pub fn valuation(&self) -> i32 {
        self.coeffs.keys().next().copied().unwrap_or(self.prec).min(self.prec)
    }

    pub fn add_coeff(&mut self, k: i32, p: &BasePoly) {
        if p.is_zero() || k >= self.prec {
            return;
        }
        assert_eq!(p.dim(), self.dim, "dimension mismatch");
        let e = self.coeffs.entry(k).or_insert_with(|| BasePoly::zero(p.dim()));
        *e = &*e + p;
        if e.is_zero() {
            self.coeffs.remove(&k);
        }
    }

    /// Lower the precision to `prec`, dropping now-unknown terms.
    pub fn truncate(&self, prec: i32) -> HbarSeries {
        let prec = prec.min(self.prec);
        HbarSeries {
            dim: self.dim,
            prec,
            coeffs: self.coeffs.iter().filter(|(k, _)| **k < prec).map(|(k, p)| (*k, p.clone())).collect(),
        }
    }

    pub fn add(&self, o: &HbarSeries) -> HbarSeries {
        let mut out = self.truncate(o.prec);
        for (k, p) in &o.coeffs {
            out.add_coeff(*k, p);
        }
        out
    }

    pub fn sub(&self, o: &HbarSeries) -> HbarSeries {
        self.add(&o.scale(&Scalar::from_int(-1)))
    }

    pub fn scale(&self, s: &Scalar) -> HbarSeries {
        let mut out = HbarSeries::zero(self.dim, self.prec);
        for (k, p) in &self.coeffs {
            out.add_coeff(*k, &p.scale(s));
        }
        out
    }

    /// Multiply by `ħ^shift`; the precision moves along.
    pub fn shift(&self, shift: i32) -> HbarSeries {
        HbarSeries {
            dim: self.dim,
            prec: if self.is_exact() { EXACT } else { self.prec + shift },
            coeffs: self.coeffs.iter().map(|(k, p)| (k + shift, p.clone())).collect(),
        }
    }

    /// Pointwise product in `x`, with ħ-orders convolved.
    pub fn mul(&self, o: &HbarSeries) -> HbarSeries {
        let prec = product_prec(self.valuation(), self.prec, o.valuation(), o.prec);
        let mut out = HbarSeries::zero(self.dim, prec);
        for (ka, pa) in &self.coeffs {
            for (kb, pb) in &o.coeffs {
                if ka + kb < prec {
                    out.add_coeff(ka + kb, &(pa * pb));
                }
            }
        }
        out
    }

    /// `d/dħ`; loses one order of precision.
    pub fn hbar_derivative(&self) -> HbarSeries {
        let prec = if self.is_exact() { EXACT } else { self.prec - 1 };
        let mut out = HbarSeries::zero(self.dim, prec);
        for (k, p) in &self.coeffs {
            if *k != 0 {
                out.add_coeff(k - 1, &p.scale(&Scalar::from_int(*k as i64)));
            }
        }
        out
    }

    /// `ħ d/dħ`, which keeps the precision.
    pub fn euler(&self) -> HbarSeries {
        let mut out = HbarSeries::zero(self.dim, self.prec);
        for (k, p) in &self.coeffs {
            out.add_coeff(*k, &p.scale(&Scalar::from_int(*k as i64)));
        }
        out
    }

    /// Apply a coefficientwise linear map.
    pub fn map(&self, f: impl Fn(&BasePoly) -> BasePoly) -> HbarSeries {
        let mut out = HbarSeries::zero(self.dim, self.prec);
        for (k, p) in &self.coeffs {
            out.add_coeff(*k, &f(p));
        }
        out
    }

    pub fn render(&self) -> String {
        let mut s = if self.coeffs.is_empty() {
            "0".to_string()
        } else {
            self.coeffs.iter().map(|(k, p)| format!("hbar^{k} [{}]", p.render())).collect::<Vec<_>>().join(" + ")
        };
        if !self.is_exact() {
            s.push_str(&format!(" + O(hbar^{})", self.prec));
        }
        s
    }
}

/// Precision of a product whose factors have the given valuations and precisions.
pub fn product_prec(va: i32, pa: i32, vb: i32, pb: i32) -> i32 {
    let lhs = if pa >= EXACT / 2 { EXACT } else { pa + vb };
    let rhs = if pb >= EXACT / 2 { EXACT } else { pb + va };
    lhs.min(rhs)
}

impl fmt::Debug for HbarSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}
