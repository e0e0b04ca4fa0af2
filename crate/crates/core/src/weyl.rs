//! The truncated formal Weyl algebra: elements, the Moyal–Weyl product and
//! the fiberwise operators built on it.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::linalg::{invert, is_antisymmetric, mat_mul, Matrix};
use crate::poly::{render_monomial, BasePoly, Monomial};
use crate::scalar::Scalar;
use crate::series::HbarSeries;

/// Which terms survive: `2k + |α| ≤ degree_cap` and `k ≥ laurent_floor`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Truncation {
    pub degree_cap: i32,
    pub laurent_floor: i32,
}

impl Truncation {
    pub fn new(degree_cap: i32, laurent_floor: i32) -> Result<Self> {
        if degree_cap < 0 {
            return Err(Error::Invalid(format!("degree cap must be non-negative, got {degree_cap}")));
        }
        if laurent_floor > 0 {
            return Err(Error::Invalid(format!("laurent floor must be <= 0, got {laurent_floor}")));
        }
        Ok(Truncation { degree_cap, laurent_floor })
    }

    /// Highest ħ-order of a central term that the cap retains.
    pub fn max_central_order(&self) -> i32 {
        self.degree_cap.div_euclid(2)
    }
}

/// Index of a Weyl term `ħ^k y^α`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct WeylIdx {
    pub hbar: i32,
    pub y: Monomial,
}

impl WeylIdx {
    pub fn new(hbar: i32, y: Monomial) -> Self {
        WeylIdx { hbar, y }
    }

    /// Weyl degree `2k + |α|`.
    pub fn weight(&self) -> i32 {
        2 * self.hbar + self.y.degree() as i32
    }
}

impl Ord for WeylIdx {
    fn cmp(&self, o: &Self) -> Ordering {
        self.weight()
            .cmp(&o.weight())
            .then(self.hbar.cmp(&o.hbar))
            .then_with(|| self.y.lex_cmp(&o.y))
    }
}

impl PartialOrd for WeylIdx {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

const MAX_LEVEL: usize = 24;

#[derive(Clone, Debug)]
struct KernelTerm {
    coef: Scalar,
    r: Monomial,
    c: Monomial,
}

/// `(−i/2)^k Π^k / k!` expanded into `∂^r ⊗ ∂^c` terms, computed lazily per `k`.
struct Kernel {
    pairs: Vec<(usize, usize, Scalar)>,
    levels: Vec<OnceLock<Vec<KernelTerm>>>,
}

impl Kernel {
    fn new(pi: &Matrix) -> Self {
        let mut pairs = Vec::new();
        for (i, row) in pi.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if !v.is_zero() {
                    pairs.push((i, j, v.clone()));
                }
            }
        }
        Kernel { pairs, levels: (0..MAX_LEVEL).map(|_| OnceLock::new()).collect() }
    }

    fn level(&self, k: usize) -> &[KernelTerm] {
        assert!(k < MAX_LEVEL, "Moyal order {k} exceeds the supported maximum");
        self.levels[k].get_or_init(|| self.build_level(k))
    }

    /// Coefficient of `∂^r ⊗ ∂^c` at level `|r|`.
    fn coefficient(&self, r: &Monomial, c: &Monomial) -> Option<&Scalar> {
        let level = self.level(r.degree() as usize);
        level.binary_search_by(|t| (t.r, t.c).cmp(&(*r, *c))).ok().map(|i| &level[i].coef)
    }

    fn build_level(&self, k: usize) -> Vec<KernelTerm> {
        let mut acc: BTreeMap<(Monomial, Monomial), Scalar> = BTreeMap::new();
        // distribute k among the nonzero π entries; each share m contributes π^m / m!
        fn rec(
            pairs: &[(usize, usize, Scalar)],
            left: usize,
            coef: Scalar,
            r: Monomial,
            c: Monomial,
            acc: &mut BTreeMap<(Monomial, Monomial), Scalar>,
        ) {
            let Some(((i, j, p), rest)) = pairs.split_first() else {
                if left == 0 {
                    *acc.entry((r, c)).or_default() += &coef;
                }
                return;
            };
            let (mut coef, mut r, mut c) = (coef, r, c);
            for m in 0..=left {
                if m > 0 {
                    coef = &(&coef * p) * &Scalar::from_ratio(1, m as i64);
                    r = r.inc(*i);
                    c = c.inc(*j);
                }
                rec(rest, left - m, coef.clone(), r, c, acc);
            }
        }
        let prefactor = Scalar::gaussian(0, 1, -1, 2).pow(k as u32);
        rec(&self.pairs, k, prefactor, Monomial::one(), Monomial::one(), &mut acc);
        acc.into_iter()
            .filter(|(_, v)| !v.is_zero())
            .map(|((r, c), coef)| KernelTerm { coef, r, c })
            .collect()
    }
}

/// A constant Poisson bivector `π^{ij}`, with the symplectic form `ω = π⁻¹` when invertible.
#[derive(Clone)]
pub struct PoissonMatrix {
    dim: usize,
    omega: Option<Matrix>,
    pi: Matrix,
    kernel: Arc<Kernel>,
}

impl PoissonMatrix {
    /// From a symplectic matrix `ω_ij`; `π` is its inverse.
    pub fn from_omega(omega: Matrix) -> Result<Self> {
        if !is_antisymmetric(&omega) {
            return Err(Error::InvalidMatrix("omega must be square and antisymmetric".into()));
        }
        let pi = invert(&omega)?;
        Ok(PoissonMatrix { dim: omega.len(), kernel: Arc::new(Kernel::new(&pi)), omega: Some(omega), pi })
    }

    /// From a possibly degenerate Poisson matrix. `ω` is filled in when `π` is invertible.
    pub fn from_pi(pi: Matrix) -> Result<Self> {
        if !is_antisymmetric(&pi) {
            return Err(Error::InvalidMatrix("pi must be square and antisymmetric".into()));
        }
        let omega = invert(&pi).ok();
        Ok(PoissonMatrix { dim: pi.len(), kernel: Arc::new(Kernel::new(&pi)), omega, pi })
    }

    /// Darboux form `Σ dx^i ∧ dx^{n+i}` in dimension `2n`.
    pub fn canonical(dim: usize) -> Result<Self> {
        if dim % 2 != 0 {
            return Err(Error::InvalidMatrix(format!("symplectic dimension must be even, got {dim}")));
        }
        let n = dim / 2;
        let mut w = vec![vec![Scalar::zero(); dim]; dim];
        for i in 0..n {
            w[i][n + i] = Scalar::one();
            w[n + i][i] = Scalar::from_int(-1);
        }
        PoissonMatrix::from_omega(w)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pi(&self) -> &Matrix {
        &self.pi
    }

    pub fn omega(&self) -> Option<&Matrix> {
        self.omega.as_ref()
    }

    /// `ω`, or an error for degenerate `π`.
    pub fn require_omega(&self) -> Result<&Matrix> {
        self.omega.as_ref().ok_or(Error::NotInvertible)
    }

    pub fn is_consistent(&self) -> bool {
        match &self.omega {
            Some(w) => mat_mul(w, &self.pi) == crate::linalg::identity(self.dim),
            None => true,
        }
    }
}

impl PartialEq for PoissonMatrix {
    fn eq(&self, o: &Self) -> bool {
        self.pi == o.pi && self.omega == o.omega
    }
}

impl fmt::Debug for PoissonMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PoissonMatrix").field("pi", &self.pi).field("omega", &self.omega).finish()
    }
}

/// `Σ ħ^k a_{k,α}(x) y^α`, truncated in Weyl degree and bounded below in ħ.
#[derive(Clone, PartialEq, Eq)]
pub struct WeylElement {
    dim: usize,
    trunc: Truncation,
    terms: BTreeMap<WeylIdx, BasePoly>,
}

/// Which bilinear operation the product kernel evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Bilinear {
    Star,
    Commutator,
    CommutatorOverHbar,
    HbarDerivative,
}

impl Bilinear {
    /// Weight multiplying Moyal level `k`, or `None` if the level is absent.
    fn level_weight(self, k: usize) -> Option<i64> {
        match self {
            Bilinear::Star => Some(1),
            Bilinear::Commutator | Bilinear::CommutatorOverHbar => (k % 2 == 1).then_some(2),
            Bilinear::HbarDerivative => (k >= 1).then_some(k as i64),
        }
    }

    fn shift(self) -> i32 {
        match self {
            Bilinear::Star | Bilinear::Commutator => 0,
            Bilinear::CommutatorOverHbar | Bilinear::HbarDerivative => -1,
        }
    }
}

impl WeylElement {
    pub fn zero(dim: usize, trunc: Truncation) -> Self {
        WeylElement { dim, trunc, terms: BTreeMap::new() }
    }

    pub fn one(dim: usize, trunc: Truncation) -> Self {
        WeylElement::from_poly(BasePoly::one(dim), trunc)
    }

    /// A central, ħ-independent element.
    pub fn from_poly(p: BasePoly, trunc: Truncation) -> Self {
        let mut out = WeylElement::zero(p.dim(), trunc);
        out.push(WeylIdx::new(0, Monomial::one()), &p);
        out
    }

    /// The fiber coordinate `y^i`.
    pub fn y(dim: usize, trunc: Truncation, i: usize) -> Self {
        WeylElement::monomial(dim, trunc, 0, Monomial::var(i), Scalar::one())
    }

    /// `c ħ^k y^α`; dropped if above the cap.
    pub fn monomial(dim: usize, trunc: Truncation, hbar: i32, y: Monomial, c: Scalar) -> Self {
        let mut out = WeylElement::zero(dim, trunc);
        out.push(WeylIdx::new(hbar, y), &BasePoly::constant(dim, c));
        out
    }

    /// Embed a central series; orders beyond the cap are dropped.
    pub fn from_series(s: &HbarSeries, trunc: Truncation) -> Result<Self> {
        let mut out = WeylElement::zero(s.dim(), trunc);
        for (k, p) in s.coeffs() {
            out.add_term(WeylIdx::new(*k, Monomial::one()), p)?;
        }
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn trunc(&self) -> Truncation {
        self.trunc
    }

    pub fn terms(&self) -> impl Iterator<Item = (&WeylIdx, &BasePoly)> {
        self.terms.iter()
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

    pub fn coeff(&self, idx: &WeylIdx) -> BasePoly {
        self.terms.get(idx).cloned().unwrap_or_else(|| BasePoly::zero(self.dim))
    }

    /// Lowest Weyl degree present.
    pub fn min_weight(&self) -> Option<i32> {
        self.terms.keys().map(|k| k.weight()).min()
    }

    pub fn max_weight(&self) -> Option<i32> {
        self.terms.keys().map(|k| k.weight()).max()
    }

    /// Add `p ħ^k y^α`. Terms above the cap are discarded; terms below the floor are an error.
    pub fn add_term(&mut self, idx: WeylIdx, p: &BasePoly) -> Result<()> {
        if idx.hbar < self.trunc.laurent_floor && !p.is_zero() {
            return Err(Error::FloorViolation { exponent: idx.hbar, floor: self.trunc.laurent_floor });
        }
        self.push(idx, p);
        Ok(())
    }

    fn push(&mut self, idx: WeylIdx, p: &BasePoly) {
        if p.is_zero() || idx.weight() > self.trunc.degree_cap {
            return;
        }
        debug_assert!(idx.hbar >= self.trunc.laurent_floor, "laurent floor violated");
        match self.terms.entry(idx) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(p.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = &*o.get() + p;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    fn check_compatible(&self, o: &WeylElement) -> Result<()> {
        if self.dim != o.dim {
            return Err(Error::DimensionMismatch(self.dim, o.dim));
        }
        if self.trunc != o.trunc {
            return Err(Error::TruncationMismatch);
        }
        Ok(())
    }

    pub fn add(&self, o: &WeylElement) -> WeylElement {
        assert_eq!((self.dim, self.trunc), (o.dim, o.trunc), "incompatible Weyl elements");
        let mut out = self.clone();
        for (k, p) in &o.terms {
            out.push(*k, p);
        }
        out
    }

    pub fn sub(&self, o: &WeylElement) -> WeylElement {
        assert_eq!((self.dim, self.trunc), (o.dim, o.trunc), "incompatible Weyl elements");
        let mut out = self.clone();
        for (k, p) in &o.terms {
            out.push(*k, &-p);
        }
        out
    }

    pub fn neg(&self) -> WeylElement {
        self.scale(&Scalar::from_int(-1))
    }

    pub fn scale(&self, s: &Scalar) -> WeylElement {
        self.map_terms(|_, p| p.scale(s))
    }

    /// Multiply every coefficient by a polynomial in `x` (a central, ħ-free factor).
    pub fn mul_poly(&self, f: &BasePoly) -> WeylElement {
        self.map_terms(|_, p| p * f)
    }

    fn map_terms(&self, f: impl Fn(&WeylIdx, &BasePoly) -> BasePoly) -> WeylElement {
        let mut out = WeylElement::zero(self.dim, self.trunc);
        for (k, p) in &self.terms {
            out.push(*k, &f(k, p));
        }
        out
    }

    /// Keep the terms whose index satisfies `keep`.
    pub fn filter(&self, keep: impl Fn(&WeylIdx) -> bool) -> WeylElement {
        WeylElement {
            dim: self.dim,
            trunc: self.trunc,
            terms: self.terms.iter().filter(|(k, _)| keep(k)).map(|(k, p)| (*k, p.clone())).collect(),
        }
    }

    /// Terms of Weyl degree at most `max`.
    pub fn up_to_weight(&self, max: i32) -> WeylElement {
        self.filter(|k| k.weight() <= max)
    }

    /// Terms of Weyl degree exactly `w`.
    pub fn weight_slice(&self, w: i32) -> WeylElement {
        self.filter(|k| k.weight() == w)
    }

    /// Re-truncate into `trunc`.
    pub fn with_truncation(&self, trunc: Truncation) -> Result<WeylElement> {
        let mut out = WeylElement::zero(self.dim, trunc);
        for (k, p) in &self.terms {
            out.add_term(*k, p)?;
        }
        Ok(out)
    }

    /// Multiply by `ħ^shift`.
    pub fn shift_hbar(&self, shift: i32) -> Result<WeylElement> {
        let mut out = WeylElement::zero(self.dim, self.trunc);
        for (k, p) in &self.terms {
            out.add_term(WeylIdx::new(k.hbar + shift, k.y), p)?;
        }
        Ok(out)
    }

    /// `∂/∂x^i` of the coefficients.
    pub fn diff_x(&self, i: usize) -> WeylElement {
        self.map_terms(|_, p| p.diff(i))
    }

    /// `∂/∂y^i`.
    pub fn diff_y(&self, i: usize) -> WeylElement {
        let mut out = WeylElement::zero(self.dim, self.trunc);
        for (k, p) in &self.terms {
            let e = k.y.get(i);
            if e == 0 {
                continue;
            }
            let y = Monomial::var(i).quotient_of(&k.y);
            out.push(WeylIdx::new(k.hbar, y), &p.scale(&Scalar::from_int(e as i64)));
        }
        out
    }

    /// Commutative multiplication by `y^i` (not the Moyal product).
    pub fn mul_y(&self, i: usize) -> WeylElement {
        let mut out = WeylElement::zero(self.dim, self.trunc);
        for (k, p) in &self.terms {
            out.push(WeylIdx::new(k.hbar, k.y.inc(i)), p);
        }
        out
    }

    /// Central projection `a|_{y=0}`; orders beyond what the cap retains are marked unknown.
    pub fn center(&self) -> HbarSeries {
        let mut s = HbarSeries::zero(self.dim, self.trunc.max_central_order() + 1);
        for (k, p) in &self.terms {
            if k.y.is_one() {
                s.add_coeff(k.hbar, p);
            }
        }
        s
    }

    /// True when every term is y-free.
    pub fn is_central(&self) -> bool {
        self.terms.keys().all(|k| k.y.is_one())
    }

    /// `E(a) = −(i/2) Σ y^j ∂a/∂y^j`.
    pub fn euler(&self) -> WeylElement {
        let half_i = Scalar::gaussian(0, 1, -1, 2);
        self.map_terms(|k, p| p.scale(&half_i.scale_int(k.y.degree() as i64)))
    }

    /// `da/dħ`.
    pub fn hbar_derivative(&self) -> Result<WeylElement> {
        let mut out = WeylElement::zero(self.dim, self.trunc);
        for (k, p) in &self.terms {
            if k.hbar != 0 {
                out.add_term(WeylIdx::new(k.hbar - 1, k.y), &p.scale(&Scalar::from_int(k.hbar as i64)))?;
            }
        }
        Ok(out)
    }

    /// `ħ da/dħ`, which preserves Weyl degree.
    pub fn hbar_euler(&self) -> WeylElement {
        self.map_terms(|k, p| p.scale(&Scalar::from_int(k.hbar as i64)))
    }

    /// `ρ(a) = (ħ/i) ȧ + E(a)`.
    pub fn rho(&self) -> WeylElement {
        let minus_i = Scalar::gaussian(0, 1, -1, 1);
        self.hbar_euler().scale(&minus_i).add(&self.euler())
    }

    fn bilinear(&self, o: &WeylElement, pm: &PoissonMatrix, kind: Bilinear) -> Result<WeylElement> {
        self.check_compatible(o)?;
        if pm.dim != self.dim {
            return Err(Error::DimensionMismatch(pm.dim, self.dim));
        }
        let shift = kind.shift();
        let cap = self.trunc.degree_cap;
        let mut cache: HashMap<(Monomial, Monomial), Vec<(i32, Monomial, Scalar)>> = HashMap::new();
        let mut acc: BTreeMap<WeylIdx, BasePoly> = BTreeMap::new();
        for (ia, pa) in &self.terms {
            let wa = ia.weight();
            for (ib, pb) in &o.terms {
                if wa + ib.weight() + 2 * shift > cap {
                    // terms are sorted by weight
                    break;
                }
                let entries = cache.entry((ia.y, ib.y)).or_insert_with(|| y_product(&ia.y, &ib.y, pm, kind));
                if entries.is_empty() {
                    continue;
                }
                let prod = pa * pb;
                for (k, y, c) in entries.iter() {
                    let hbar = ia.hbar + ib.hbar + k + shift;
                    if hbar < self.trunc.laurent_floor {
                        return Err(Error::FloorViolation { exponent: hbar, floor: self.trunc.laurent_floor });
                    }
                    let e = acc.entry(WeylIdx::new(hbar, *y)).or_insert_with(|| BasePoly::zero(self.dim));
                    e.add_assign_scaled(&prod, c);
                }
            }
        }
        acc.retain(|_, p| !p.is_zero());
        Ok(WeylElement { dim: self.dim, trunc: self.trunc, terms: acc })
    }

    /// `σ(a ∗ b)` without forming the full product: only the terms whose
    /// y-dependence is fully contracted contribute.
    pub fn star_center(&self, o: &WeylElement, pm: &PoissonMatrix) -> Result<HbarSeries> {
        self.check_compatible(o)?;
        let cap = self.trunc.degree_cap;
        let mut by_degree: BTreeMap<u32, Vec<(&WeylIdx, &BasePoly)>> = BTreeMap::new();
        for (k, p) in &o.terms {
            by_degree.entry(k.y.degree()).or_default().push((k, p));
        }
        let mut out = HbarSeries::zero(self.dim, self.trunc.max_central_order() + 1);
        for (ia, pa) in &self.terms {
            let deg = ia.y.degree();
            let Some(bs) = by_degree.get(&deg) else { continue };
            for (ib, pb) in bs {
                if ia.weight() + ib.weight() > cap {
                    continue;
                }
                let Some(c) = pm.kernel.coefficient(&ia.y, &ib.y) else { continue };
                let f = &(c * &ia.y.factorial()) * &ib.y.factorial();
                out.add_coeff(ia.hbar + ib.hbar + deg as i32, &(pa * pb).scale(&f));
            }
        }
        Ok(out)
    }

    /// Moyal–Weyl product `a ∗ b`.
    pub fn star(&self, o: &WeylElement, pm: &PoissonMatrix) -> Result<WeylElement> {
        self.bilinear(o, pm, Bilinear::Star)
    }

    /// `a ∗ b − b ∗ a`.
    pub fn commutator(&self, o: &WeylElement, pm: &PoissonMatrix) -> Result<WeylElement> {
        self.bilinear(o, pm, Bilinear::Commutator)
    }

    /// `(1/ħ)[a, b]`, computed without leaving the truncation: the result keeps
    /// terms of Weyl degree up to the cap, using input terms up to cap + 2.
    pub fn commutator_over_hbar(&self, o: &WeylElement, pm: &PoissonMatrix) -> Result<WeylElement> {
        self.bilinear(o, pm, Bilinear::CommutatorOverHbar)
    }

    /// `c₁(a,b) = d/dħ(a∗b) − ȧ∗b − a∗ḃ`, the ħ-derivative of the product at fixed arguments.
    pub fn star_hbar_derivative(&self, o: &WeylElement, pm: &PoissonMatrix) -> Result<WeylElement> {
        self.bilinear(o, pm, Bilinear::HbarDerivative)
    }

    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        self.terms
            .iter()
            .map(|(k, p)| format!("hbar^{}*{} [{}]", k.hbar, render_monomial(&k.y, self.dim, "y"), p.render()))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

impl fmt::Debug for WeylElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// `y^α ⋆ y^β` restricted to the Moyal levels that `kind` selects, as
/// `(ħ-order, y-monomial, coefficient)` triples.
fn y_product(alpha: &Monomial, beta: &Monomial, pm: &PoissonMatrix, kind: Bilinear) -> Vec<(i32, Monomial, Scalar)> {
    let mut acc: BTreeMap<(i32, Monomial), Scalar> = BTreeMap::new();
    let kmax = alpha.degree().min(beta.degree()) as usize;
    for k in 0..=kmax {
        let Some(w) = kind.level_weight(k) else { continue };
        for t in pm.kernel.level(k) {
            if !t.r.divides(alpha) || !t.c.divides(beta) {
                continue;
            }
            let f = alpha.falling(&t.r) * beta.falling(&t.c) * w;
            let y = t.r.quotient_of(alpha).mul(&t.c.quotient_of(beta));
            *acc.entry((k as i32, y)).or_default() += &t.coef.scale_int(f);
        }
    }
    acc.into_iter().filter(|(_, c)| !c.is_zero()).map(|((k, y), c)| (k, y, c)).collect()
}

/// Checked Moyal–Weyl product.
pub fn moyal_mul(a: &WeylElement, b: &WeylElement, pm: &PoissonMatrix) -> Result<WeylElement> {
    a.star(b, pm)
}

/// Checked fiberwise commutator.
pub fn commutator(a: &WeylElement, b: &WeylElement, pm: &PoissonMatrix) -> Result<WeylElement> {
    a.commutator(b, pm)
}

pub fn center_project(a: &WeylElement) -> HbarSeries {
    a.center()
}

pub fn euler_e(a: &WeylElement) -> WeylElement {
    a.euler()
}

pub fn hbar_derivative(a: &WeylElement) -> Result<WeylElement> {
    a.hbar_derivative()
}

pub fn rho(a: &WeylElement) -> WeylElement {
    a.rho()
}

/// `(BE)(a,b) = (i/ħ)(a∗Eb − E(a∗b) + Ea∗b)`.
pub fn euler_coboundary(a: &WeylElement, b: &WeylElement, pm: &PoissonMatrix) -> Result<WeylElement> {
    let t1 = a.star(&b.euler(), pm)?;
    let t2 = a.star(b, pm)?.euler();
    let t3 = a.euler().star(b, pm)?;
    t1.sub(&t2).add(&t3).scale(&Scalar::i()).shift_hbar(-1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tr(cap: i32) -> Truncation {
        Truncation::new(cap, -2).unwrap()
    }

    fn unit_pi() -> PoissonMatrix {
        PoissonMatrix::from_pi(vec![
            vec![Scalar::zero(), Scalar::one()],
            vec![Scalar::from_int(-1), Scalar::zero()],
        ])
        .unwrap()
    }

    #[test]
    fn y1_star_y2() {
        let t = tr(6);
        let pm = unit_pi();
        let y1 = WeylElement::y(2, t, 0);
        let y2 = WeylElement::y(2, t, 1);
        let want = WeylElement::monomial(2, t, 0, Monomial::from_exponents(&[1, 1]), Scalar::one())
            .add(&WeylElement::monomial(2, t, 1, Monomial::one(), Scalar::gaussian(0, 1, -1, 2)));
        assert_eq!(y1.star(&y2, &pm).unwrap(), want);
        assert_eq!(
            y1.star(&y1, &pm).unwrap(),
            WeylElement::monomial(2, t, 0, Monomial::from_exponents(&[2, 0]), Scalar::one())
        );
        assert_eq!(WeylElement::one(2, t).star(&y2, &pm).unwrap(), y2);
    }

    #[test]
    fn commutator_of_generators() {
        let t = tr(6);
        let pm = PoissonMatrix::canonical(4).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let c = WeylElement::y(4, t, i).commutator(&WeylElement::y(4, t, j), &pm).unwrap();
                let want = WeylElement::monomial(4, t, 1, Monomial::one(), &Scalar::gaussian(0, 1, -1, 1) * &pm.pi()[i][j]);
                assert_eq!(c, want);
            }
        }
    }

    #[test]
    fn center_and_euler_examples() {
        let t = tr(6);
        let y1y2 = WeylElement::monomial(2, t, 0, Monomial::from_exponents(&[1, 1]), Scalar::one());
        let e = y1y2.euler();
        assert_eq!(e, y1y2.scale(&Scalar::gaussian(0, 1, -1, 1)));
        let y1 = WeylElement::y(2, t, 0);
        assert_eq!(y1.euler(), y1.scale(&Scalar::gaussian(0, 1, -1, 2)));
        assert!(y1.center().is_zero());
        let h = WeylElement::monomial(2, t, 1, Monomial::one(), Scalar::one());
        assert_eq!(h.rho(), h.scale(&Scalar::gaussian(0, 1, -1, 1)));
        assert_eq!(y1.rho(), y1.scale(&Scalar::gaussian(0, 1, -1, 2)));
    }

    #[test]
    fn hbar_derivative_floor() {
        let t = Truncation::new(6, -1).unwrap();
        let a = WeylElement::monomial(2, t, -1, Monomial::one(), Scalar::one());
        assert!(matches!(a.hbar_derivative(), Err(Error::FloorViolation { .. })));
        let b = WeylElement::monomial(2, t, 2, Monomial::var(0), Scalar::one());
        assert_eq!(b.hbar_derivative().unwrap(), WeylElement::monomial(2, t, 1, Monomial::var(0), Scalar::from_int(2)));
    }

    #[test]
    fn commutator_over_hbar_matches_shift() {
        let t = tr(8);
        let pm = PoissonMatrix::canonical(2).unwrap();
        let a = WeylElement::monomial(2, t, 0, Monomial::from_exponents(&[2, 1]), Scalar::from_int(3))
            .add(&WeylElement::y(2, t, 1));
        let b = WeylElement::monomial(2, t, 1, Monomial::from_exponents(&[1, 2]), Scalar::one());
        let direct = a.commutator(&b, &pm).unwrap().shift_hbar(-1).unwrap().up_to_weight(6);
        assert_eq!(a.commutator_over_hbar(&b, &pm).unwrap().up_to_weight(6), direct);
    }

    #[test]
    fn mismatch_errors() {
        let pm = PoissonMatrix::canonical(2).unwrap();
        let a = WeylElement::y(2, tr(6), 0);
        let b = WeylElement::y(2, tr(4), 0);
        assert!(matches!(moyal_mul(&a, &b, &pm), Err(Error::TruncationMismatch)));
    }
}
