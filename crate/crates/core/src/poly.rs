//! Sparse multivariate polynomials over [`Scalar`] in the base coordinates `x¹..xⁿ`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest number of variables a [`Monomial`] can carry.
pub const MAX_VARS: usize = 8;

/// Exponent vector. Ordered graded-lexicographically: total degree first,
/// then the exponent vectors compared entry by entry.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Monomial([u16; MAX_VARS]);

impl Monomial {
    pub fn one() -> Self {
        Monomial([0; MAX_VARS])
    }

    pub fn var(i: usize) -> Self {
        let mut m = Monomial::one();
        m.0[i] = 1;
        m
    }

    pub fn from_exponents(e: &[u16]) -> Self {
        assert!(e.len() <= MAX_VARS, "at most {MAX_VARS} variables are supported");
        let mut m = Monomial::one();
        m.0[..e.len()].copy_from_slice(e);
        m
    }

    pub fn exponents(&self, dim: usize) -> &[u16] {
        &self.0[..dim]
    }

    pub fn get(&self, i: usize) -> u16 {
        self.0[i]
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// Highest variable index carrying a nonzero exponent, plus one.
    pub fn support_len(&self) -> usize {
        self.0.iter().rposition(|&e| e != 0).map_or(0, |k| k + 1)
    }

    pub fn mul(&self, o: &Monomial) -> Monomial {
        let mut r = *self;
        for (a, b) in r.0.iter_mut().zip(o.0.iter()) {
            *a = a.checked_add(*b).expect("monomial exponent overflow");
        }
        r
    }

    pub fn inc(&self, i: usize) -> Monomial {
        let mut r = *self;
        r.0[i] += 1;
        r
    }

    pub fn divides(&self, o: &Monomial) -> bool {
        self.0.iter().zip(o.0.iter()).all(|(a, b)| a <= b)
    }

    /// `o / self`, assuming `self` divides `o`.
    pub fn quotient_of(&self, o: &Monomial) -> Monomial {
        let mut r = *o;
        for (a, b) in r.0.iter_mut().zip(self.0.iter()) {
            *a -= b;
        }
        r
    }

    /// `α!` as an exact integer.
    pub fn factorial(&self) -> Scalar {
        let mut acc: i64 = 1;
        let mut out = Scalar::one();
        for &e in &self.0 {
            for k in 2..=e as i64 {
                acc = match acc.checked_mul(k) {
                    Some(v) => v,
                    None => {
                        out = &out * &Scalar::from_int(acc);
                        k
                    }
                };
            }
        }
        &out * &Scalar::from_int(acc)
    }

    /// `α! / (α-β)!`, the coefficient produced by `∂^β` acting on `x^α`.
    /// Zero when β does not divide α.
    pub fn falling(&self, beta: &Monomial) -> i64 {
        let mut acc: i64 = 1;
        for (a, b) in self.0.iter().zip(beta.0.iter()) {
            if b > a {
                return 0;
            }
            for k in 0..*b {
                acc *= (*a - k) as i64;
            }
        }
        acc
    }

    /// Binomial `α choose β`, componentwise product.
    pub fn binomial(&self, beta: &Monomial) -> i64 {
        let mut acc: i64 = 1;
        for (a, b) in self.0.iter().zip(beta.0.iter()) {
            if b > a {
                return 0;
            }
            let (a, b) = (*a as i64, *b as i64);
            let mut c: i64 = 1;
            for k in 0..b {
                c = c * (a - k) / (k + 1);
            }
            acc *= c;
        }
        acc
    }

    pub fn lex_cmp(&self, o: &Monomial) -> Ordering {
        self.0.cmp(&o.0)
    }

    /// All monomials in `dim` variables of total degree at most `max_deg`, graded-lex order.
    pub fn all_up_to(dim: usize, max_deg: u32) -> Vec<Monomial> {
        let mut out = Vec::new();
        fn rec(dim: usize, pos: usize, left: u32, cur: &mut Monomial, out: &mut Vec<Monomial>) {
            if pos == dim {
                out.push(*cur);
                return;
            }
            for e in 0..=left {
                cur.0[pos] = e as u16;
                rec(dim, pos + 1, left - e, cur, out);
            }
            cur.0[pos] = 0;
        }
        rec(dim, 0, max_deg, &mut Monomial::one(), &mut out);
        out.sort();
        out
    }

    /// All monomials dividing `self`.
    pub fn divisors(&self) -> Vec<Monomial> {
        let mut out = vec![Monomial::one()];
        for i in 0..MAX_VARS {
            let e = self.0[i];
            if e == 0 {
                continue;
            }
            let mut next = Vec::with_capacity(out.len() * (e as usize + 1));
            for m in &out {
                for k in 0..=e {
                    let mut m2 = *m;
                    m2.0[i] = k;
                    next.push(m2);
                }
            }
            out = next;
        }
        out
    }
}

impl Ord for Monomial {
    fn cmp(&self, o: &Self) -> Ordering {
        self.degree().cmp(&o.degree()).then_with(|| self.0.cmp(&o.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &self.0[..self.support_len()])
    }
}

/// Renders `x1^2*x3` style products with a caller-chosen variable prefix.
pub fn render_monomial(m: &Monomial, dim: usize, var: &str) -> String {
    let mut parts = Vec::new();
    for i in 0..dim {
        match m.get(i) {
            0 => {}
            1 => parts.push(format!("{var}{}", i + 1)),
            e => parts.push(format!("{var}{}^{e}", i + 1)),
        }
    }
    if parts.is_empty() {
        "1".to_string()
    } else {
        parts.join("*")
    }
}

/// Sparse polynomial in `dim` variables. Zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BasePoly {
    dim: usize,
    terms: BTreeMap<Monomial, Scalar>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolyOp {
    Add,
    Mul,
}

/// Checked binary arithmetic on polynomials.
pub fn poly_arith(p: &BasePoly, q: &BasePoly, op: PolyOp) -> Result<BasePoly> {
    if p.dim != q.dim {
        return Err(Error::DimensionMismatch(p.dim, q.dim));
    }
    Ok(match op {
        PolyOp::Add => p + q,
        PolyOp::Mul => p * q,
    })
}

/// Checked partial derivative `∂p/∂x^i`.
pub fn poly_diff(p: &BasePoly, i: usize) -> Result<BasePoly> {
    if i >= p.dim {
        return Err(Error::IndexOutOfRange { index: i, dim: p.dim });
    }
    Ok(p.diff(i))
}

impl BasePoly {
    pub fn zero(dim: usize) -> Self {
        assert!(dim <= MAX_VARS);
        BasePoly { dim, terms: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: Scalar) -> Self {
        BasePoly::monomial(dim, Monomial::one(), c)
    }

    pub fn one(dim: usize) -> Self {
        BasePoly::constant(dim, Scalar::one())
    }

    pub fn var(dim: usize, i: usize) -> Self {
        assert!(i < dim);
        BasePoly::monomial(dim, Monomial::var(i), Scalar::one())
    }

    pub fn monomial(dim: usize, m: Monomial, c: Scalar) -> Self {
        let mut p = BasePoly::zero(dim);
        p.add_term(m, &c);
        p
    }

    pub fn from_terms(dim: usize, terms: impl IntoIterator<Item = (Monomial, Scalar)>) -> Self {
        let mut p = BasePoly::zero(dim);
        for (m, c) in terms {
            p.add_term(m, &c);
        }
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Scalar {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.degree()).max()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.is_one())
    }

    pub fn constant_term(&self) -> Scalar {
        self.coeff(&Monomial::one())
    }

    pub fn add_term(&mut self, m: Monomial, c: &Scalar) {
        if c.is_zero() {
            return;
        }
        debug_assert!(m.support_len() <= self.dim, "exponent index out of range");
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add_assign_scaled(&mut self, other: &BasePoly, s: &Scalar) {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        if s.is_zero() {
            return;
        }
        for (m, c) in &other.terms {
            self.add_term(*m, &(c * s));
        }
    }

    pub fn scale(&self, s: &Scalar) -> BasePoly {
        if s.is_zero() {
            return BasePoly::zero(self.dim);
        }
        BasePoly { dim: self.dim, terms: self.terms.iter().map(|(m, c)| (*m, c * s)).collect() }
    }

    /// Multiplication by a single monomial term.
    pub fn mul_term(&self, m: &Monomial, s: &Scalar) -> BasePoly {
        if s.is_zero() {
            return BasePoly::zero(self.dim);
        }
        BasePoly { dim: self.dim, terms: self.terms.iter().map(|(k, c)| (k.mul(m), c * s)).collect() }
    }

    pub fn diff(&self, i: usize) -> BasePoly {
        let mut out = BasePoly::zero(self.dim);
        for (m, c) in &self.terms {
            let e = m.get(i);
            if e == 0 {
                continue;
            }
            let mut m2 = *m;
            m2.0[i] -= 1;
            out.add_term(m2, &c.scale_int(e as i64));
        }
        out
    }

    /// `∂^α p`.
    pub fn diff_multi(&self, alpha: &Monomial) -> BasePoly {
        if alpha.is_one() {
            return self.clone();
        }
        let mut out = BasePoly::zero(self.dim);
        for (m, c) in &self.terms {
            let f = m.falling(alpha);
            if f != 0 {
                out.add_term(alpha.quotient_of(m), &c.scale_int(f));
            }
        }
        out
    }

    /// Keep only the terms whose monomial satisfies `keep`.
    pub fn filter(&self, keep: impl Fn(&Monomial) -> bool) -> BasePoly {
        BasePoly {
            dim: self.dim,
            terms: self.terms.iter().filter(|(m, _)| keep(m)).map(|(m, c)| (*m, c.clone())).collect(),
        }
    }

    /// Homogeneous component of total degree `d`.
    pub fn homogeneous_part(&self, d: u32) -> BasePoly {
        self.filter(|m| m.degree() == d)
    }

    /// Human-readable rendering with variables `x1..xn`.
    pub fn render(&self) -> String {
        self.render_with("x")
    }

    pub fn render_with(&self, var: &str) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        self.terms
            .iter()
            .map(|(m, c)| format!("({c})*{}", render_monomial(m, self.dim, var)))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

impl fmt::Debug for BasePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl Add for &BasePoly {
    type Output = BasePoly;
    fn add(self, o: &BasePoly) -> BasePoly {
        assert_eq!(self.dim, o.dim, "dimension mismatch");
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(*m, c);
        }
        out
    }
}

impl Sub for &BasePoly {
    type Output = BasePoly;
    fn sub(self, o: &BasePoly) -> BasePoly {
        assert_eq!(self.dim, o.dim, "dimension mismatch");
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(*m, &-c);
        }
        out
    }
}

impl Mul for &BasePoly {
    type Output = BasePoly;
    fn mul(self, o: &BasePoly) -> BasePoly {
        assert_eq!(self.dim, o.dim, "dimension mismatch");
        let mut out = BasePoly::zero(self.dim);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                out.add_term(m1.mul(m2), &(c1 * c2));
            }
        }
        out
    }
}

impl Neg for &BasePoly {
    type Output = BasePoly;
    fn neg(self) -> BasePoly {
        BasePoly { dim: self.dim, terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(dim: usize, i: usize) -> BasePoly {
        BasePoly::var(dim, i)
    }

    #[test]
    fn difference_of_squares() {
        let one = BasePoly::one(2);
        let a = &x(2, 0) + &one;
        let b = &x(2, 0) - &one;
        let want = &(&x(2, 0) * &x(2, 0)) - &one;
        assert_eq!(poly_arith(&a, &b, PolyOp::Mul).unwrap(), want);
    }

    #[test]
    fn annihilator_and_monomial_product() {
        let p = &x(2, 0) + &x(2, 1);
        assert!(poly_arith(&p, &BasePoly::zero(2), PolyOp::Mul).unwrap().is_zero());
        let x1x2 = &x(2, 0) * &x(2, 1);
        let prod = &x1x2 * &x(2, 0);
        assert_eq!(prod, BasePoly::monomial(2, Monomial::from_exponents(&[2, 1]), Scalar::one()));
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        assert!(matches!(
            poly_arith(&x(2, 0), &x(3, 0), PolyOp::Add),
            Err(Error::DimensionMismatch(2, 3))
        ));
        assert!(matches!(poly_diff(&x(2, 0), 2), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn power_rule() {
        let p = BasePoly::monomial(2, Monomial::from_exponents(&[2, 1]), Scalar::one());
        let want = BasePoly::monomial(2, Monomial::from_exponents(&[1, 1]), Scalar::from_int(2));
        assert_eq!(poly_diff(&p, 0).unwrap(), want);
        assert!(poly_diff(&x(2, 0), 1).unwrap().is_zero());
        assert!(poly_diff(&BasePoly::constant(2, Scalar::from_int(5)), 0).unwrap().is_zero());
    }

    #[test]
    fn multi_derivative_matches_repeated() {
        let p = BasePoly::monomial(3, Monomial::from_exponents(&[3, 2, 1]), Scalar::from_ratio(1, 3));
        let alpha = Monomial::from_exponents(&[2, 1, 0]);
        assert_eq!(p.diff_multi(&alpha), p.diff(0).diff(0).diff(1));
    }

    #[test]
    fn graded_lex_order() {
        let mut ms = Monomial::all_up_to(2, 2);
        ms.sort();
        let degs: Vec<u32> = ms.iter().map(|m| m.degree()).collect();
        assert_eq!(degs, vec![0, 1, 1, 2, 2, 2]);
        assert_eq!(ms.len(), 6);
    }

    #[test]
    fn binomials_and_divisors() {
        let a = Monomial::from_exponents(&[2, 1]);
        assert_eq!(a.binomial(&Monomial::from_exponents(&[1, 1])), 2);
        assert_eq!(a.divisors().len(), 6);
        assert_eq!(a.factorial(), Scalar::from_int(2));
        assert_eq!(a.falling(&Monomial::from_exponents(&[2, 0])), 2);
    }
}
