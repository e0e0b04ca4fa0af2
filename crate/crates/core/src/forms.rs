//! Scalar differential forms with polynomial coefficients, optionally graded by powers of ħ.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::poly::{BasePoly, Monomial};
use crate::scalar::Scalar;

/// A strictly increasing tuple of `dx` indices, stored as a bitmask.
///
/// Ordered by length first, then lexicographically on the index tuple.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct DxMask(u16);

impl DxMask {
    pub const EMPTY: DxMask = DxMask(0);

    pub fn single(i: usize) -> Self {
        DxMask(1 << i)
    }

    pub fn bits(self) -> u16 {
        self.0
    }

    pub fn from_bits(b: u16) -> Self {
        DxMask(b)
    }

    /// Builds a mask from an index list, returning the permutation sign needed
    /// to sort it, or `None` when an index repeats.
    pub fn from_indices(idx: &[usize]) -> Option<(i64, DxMask)> {
        let mut acc = (1i64, DxMask::EMPTY);
        for &i in idx {
            let (s, m) = acc.1.wedge(DxMask::single(i))?;
            acc = (acc.0 * s, m);
        }
        Some(acc)
    }

    pub fn degree(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 & (1 << i) != 0
    }

    pub fn indices(self) -> Vec<usize> {
        (0..16).filter(|&i| self.contains(i)).collect()
    }

    /// `dx^self ∧ dx^other` as `(sign, mask)`; `None` if they share an index.
    pub fn wedge(self, other: DxMask) -> Option<(i64, DxMask)> {
        if self.0 & other.0 != 0 {
            return None;
        }
        // each index of `other` must pass every larger index of `self`
        let mut swaps = 0u32;
        for j in other.indices() {
            swaps += (self.0 >> (j + 1)).count_ones();
        }
        let sign = if swaps % 2 == 0 { 1 } else { -1 };
        Some((sign, DxMask(self.0 | other.0)))
    }

    /// Interior product with `∂/∂x^k` from the left: `(sign, mask without k)`.
    pub fn contract(self, k: usize) -> Option<(i64, DxMask)> {
        if !self.contains(k) {
            return None;
        }
        let below = (self.0 & ((1u16 << k) - 1)).count_ones();
        let sign = if below % 2 == 0 { 1 } else { -1 };
        Some((sign, DxMask(self.0 & !(1 << k))))
    }

    /// Every mask of the given degree in `dim` coordinates, in canonical order.
    pub fn all_of_degree(dim: usize, q: usize) -> Vec<DxMask> {
        let mut v: Vec<DxMask> = (0u16..(1 << dim)).map(DxMask).filter(|m| m.degree() == q).collect();
        v.sort();
        v
    }

    pub fn render(self) -> String {
        if self.0 == 0 {
            return "1".to_string();
        }
        self.indices().iter().map(|i| format!("dx{}", i + 1)).collect::<Vec<_>>().join("^")
    }
}

impl Ord for DxMask {
    fn cmp(&self, o: &Self) -> Ordering {
        self.degree().cmp(&o.degree()).then_with(|| self.indices().cmp(&o.indices()))
    }
}

impl PartialOrd for DxMask {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl fmt::Debug for DxMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// `Σ ħ^k f_{k,I}(x) dx^I`, a Laurent series of polynomial differential forms.
#[derive(Clone, PartialEq, Eq)]
pub struct ScalarFormSeries {
    dim: usize,
    entries: BTreeMap<(i32, DxMask), BasePoly>,
}

impl ScalarFormSeries {
    pub fn zero(dim: usize) -> Self {
        ScalarFormSeries { dim, entries: BTreeMap::new() }
    }

    /// A single term `ħ^k f dx^I` given by an unsorted index list.
    pub fn term(dim: usize, hbar: i32, dx: &[usize], f: BasePoly) -> Self {
        let mut out = ScalarFormSeries::zero(dim);
        if let Some((s, m)) = DxMask::from_indices(dx) {
            out.add_entry(hbar, m, &f.scale(&Scalar::from_int(s)));
        }
        out
    }

    /// The constant 2-form `Σ_{i<j} m_ij dx^i∧dx^j` at ħ-order `hbar`.
    pub fn two_form_from_matrix(m: &[Vec<Scalar>], hbar: i32) -> Self {
        let dim = m.len();
        let mut out = ScalarFormSeries::zero(dim);
        for i in 0..dim {
            for j in i + 1..dim {
                let c = &m[i][j];
                if !c.is_zero() {
                    out.add_entry(hbar, DxMask::single(i).wedge(DxMask::single(j)).unwrap().1, &BasePoly::constant(dim, c.clone()));
                }
            }
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(i32, DxMask), &BasePoly)> {
        self.entries.iter()
    }

    pub fn get(&self, hbar: i32, m: DxMask) -> BasePoly {
        self.entries.get(&(hbar, m)).cloned().unwrap_or_else(|| BasePoly::zero(self.dim))
    }

    /// Distinct ħ-exponents present, ascending.
    pub fn hbar_orders(&self) -> Vec<i32> {
        let mut v: Vec<i32> = self.entries.keys().map(|k| k.0).collect();
        v.dedup();
        v
    }

    pub fn min_hbar(&self) -> Option<i32> {
        self.entries.keys().map(|k| k.0).min()
    }

    /// The coefficient of `ħ^k`, as a series concentrated at order 0.
    pub fn at_order(&self, k: i32) -> ScalarFormSeries {
        ScalarFormSeries {
            dim: self.dim,
            entries: self.entries.iter().filter(|(key, _)| key.0 == k).map(|(key, p)| ((0, key.1), p.clone())).collect(),
        }
    }

    pub fn add_entry(&mut self, hbar: i32, m: DxMask, f: &BasePoly) {
        if f.is_zero() {
            return;
        }
        assert_eq!(f.dim(), self.dim, "dimension mismatch");
        let e = self.entries.entry((hbar, m)).or_insert_with(|| BasePoly::zero(f.dim()));
        *e = &*e + f;
        if e.is_zero() {
            self.entries.remove(&(hbar, m));
        }
    }

    pub fn add(&self, o: &ScalarFormSeries) -> ScalarFormSeries {
        let mut out = self.clone();
        for ((k, m), p) in &o.entries {
            out.add_entry(*k, *m, p);
        }
        out
    }

    pub fn sub(&self, o: &ScalarFormSeries) -> ScalarFormSeries {
        self.add(&o.scale(&Scalar::from_int(-1)))
    }

    pub fn scale(&self, s: &Scalar) -> ScalarFormSeries {
        let mut out = ScalarFormSeries::zero(self.dim);
        for ((k, m), p) in &self.entries {
            out.add_entry(*k, *m, &p.scale(s));
        }
        out
    }

    /// Multiply by `ħ^shift`.
    pub fn shift_hbar(&self, shift: i32) -> ScalarFormSeries {
        ScalarFormSeries {
            dim: self.dim,
            entries: self.entries.iter().map(|((k, m), p)| ((k + shift, *m), p.clone())).collect(),
        }
    }

    /// Termwise `d/dħ`.
    pub fn hbar_derivative(&self) -> ScalarFormSeries {
        let mut out = ScalarFormSeries::zero(self.dim);
        for ((k, m), p) in &self.entries {
            if *k != 0 {
                out.add_entry(k - 1, *m, &p.scale(&Scalar::from_int(*k as i64)));
            }
        }
        out
    }

    /// Drop every term with ħ-exponent above `max`.
    pub fn truncate_above(&self, max: i32) -> ScalarFormSeries {
        ScalarFormSeries {
            dim: self.dim,
            entries: self.entries.iter().filter(|(key, _)| key.0 <= max).map(|(k, p)| (*k, p.clone())).collect(),
        }
    }

    /// The coefficient matrix of the constant part of the 2-form component at order `hbar`.
    pub fn constant_two_form_matrix(&self, hbar: i32) -> Vec<Vec<Scalar>> {
        let n = self.dim;
        let mut m = vec![vec![Scalar::zero(); n]; n];
        for ((k, mask), p) in &self.entries {
            if *k != hbar || mask.degree() != 2 {
                continue;
            }
            let idx = mask.indices();
            let c = p.constant_term();
            m[idx[1]][idx[0]] = -&c;
            m[idx[0]][idx[1]] = c;
        }
        m
    }

    pub fn render(&self) -> String {
        if self.entries.is_empty() {
            return "0".to_string();
        }
        self.entries
            .iter()
            .map(|((k, m), p)| format!("hbar^{k} [{}] {}", p.render(), m.render()))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

impl fmt::Debug for ScalarFormSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// The exterior derivative in the `x` variables, ħ-linear.
pub fn d_exterior(w: &ScalarFormSeries) -> ScalarFormSeries {
    let mut out = ScalarFormSeries::zero(w.dim);
    for ((k, m), p) in &w.entries {
        for i in 0..w.dim {
            if let Some((s, m2)) = DxMask::single(i).wedge(*m) {
                out.add_entry(*k, m2, &p.diff(i).scale(&Scalar::from_int(s)));
            }
        }
    }
    out
}

/// Primitive of a closed form via the radial homotopy.
///
/// Each component of polynomial degree `d` and form degree `k` contributes
/// `(1/(d+k)) ι_E w` with `E = x^j ∂/∂x^j`.
pub fn euler_homotopy(w: &ScalarFormSeries) -> Result<ScalarFormSeries> {
    if !d_exterior(w).is_zero() {
        return Err(Error::NotClosed);
    }
    let dim = w.dim;
    let mut out = ScalarFormSeries::zero(dim);
    for ((k, m), p) in &w.entries {
        let q = m.degree() as u32;
        for (mono, c) in p.terms() {
            let total = mono.degree() + q;
            if total == 0 {
                return Err(Error::NoPrimitive);
            }
            let weight = Scalar::from_ratio(1, total as i64);
            for j in m.indices() {
                let (s, m2) = m.contract(j).unwrap();
                let term = BasePoly::monomial(dim, mono.mul(&Monomial::var(j)), &(c * &weight) * &Scalar::from_int(s));
                out.add_entry(*k, m2, &term);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(dim: usize, i: usize) -> BasePoly {
        BasePoly::var(dim, i)
    }

    #[test]
    fn mask_signs() {
        let a = DxMask::single(1);
        let b = DxMask::single(0);
        assert_eq!(a.wedge(b), Some((-1, DxMask::from_bits(0b11))));
        assert_eq!(b.wedge(a), Some((1, DxMask::from_bits(0b11))));
        assert_eq!(a.wedge(a), None);
        assert_eq!(DxMask::from_indices(&[2, 0, 1]), Some((1, DxMask::from_bits(0b111))));
        assert_eq!(DxMask::from_bits(0b11).contract(1), Some((-1, DxMask::single(0))));
    }

    #[test]
    fn d_of_one_term() {
        let w = ScalarFormSeries::term(2, 0, &[1], x(2, 0));
        assert_eq!(d_exterior(&w), ScalarFormSeries::term(2, 0, &[0, 1], BasePoly::one(2)));
    }

    #[test]
    fn d_of_constant_is_zero_and_d_squared_vanishes() {
        let w = ScalarFormSeries::term(4, 1, &[0, 1], BasePoly::constant(4, Scalar::from_int(3)));
        assert!(d_exterior(&w).is_zero());
        let p = &(&x(3, 0) * &x(3, 1)) * &x(3, 2);
        let f = ScalarFormSeries::term(3, 0, &[], p.clone()).add(&ScalarFormSeries::term(3, 2, &[2], &p * &p));
        assert!(d_exterior(&d_exterior(&f)).is_zero());
    }

    #[test]
    fn homotopy_of_area_form() {
        let w = ScalarFormSeries::term(2, 0, &[0, 1], BasePoly::one(2));
        let h = euler_homotopy(&w).unwrap();
        let half = Scalar::from_ratio(1, 2);
        let want = ScalarFormSeries::term(2, 0, &[1], x(2, 0).scale(&half))
            .add(&ScalarFormSeries::term(2, 0, &[0], x(2, 1).scale(&-&half)));
        assert_eq!(h, want);
        assert_eq!(d_exterior(&h), w);
    }

    #[test]
    fn homotopy_round_trip_on_exact_forms() {
        let p = &(&x(3, 0) * &x(3, 1)) + &(&x(3, 2) * &x(3, 2));
        let f = ScalarFormSeries::term(3, 0, &[], p.clone());
        let df = d_exterior(&f);
        let h = euler_homotopy(&df).unwrap();
        assert_eq!(h, f);
        assert!(euler_homotopy(&ScalarFormSeries::zero(3)).unwrap().is_zero());
    }

    #[test]
    fn homotopy_errors() {
        let w = ScalarFormSeries::term(2, 0, &[0], x(2, 1));
        assert!(matches!(euler_homotopy(&w), Err(Error::NotClosed)));
        let c = ScalarFormSeries::term(2, 0, &[], BasePoly::one(2));
        assert!(matches!(euler_homotopy(&c), Err(Error::NoPrimitive)));
    }
}
