//! Hochschild cochains of a star-product algebra and the coboundary `b = (i/ħ) b̃`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::forms::{d_exterior, euler_homotopy, DxMask, ScalarFormSeries};
use crate::linalg::{SparseRow, SparseSolver};
use crate::poly::{render_monomial, BasePoly, Monomial};
use crate::scalar::Scalar;
use crate::series::{HbarSeries, EXACT};
use crate::star_table::{Bidiff, StarProductTable};
use crate::weyl::PoissonMatrix;

/// `Σ ħ^l g(x) ∂^{α₁} ⊗ … ⊗ ∂^{α_k}`, known for ħ-orders below `prec`.
#[derive(Clone, PartialEq, Eq)]
pub struct Cochain {
    dim: usize,
    arity: usize,
    prec: i32,
    terms: BTreeMap<(i32, Vec<Monomial>), BasePoly>,
}

impl Cochain {
    pub fn new(dim: usize, arity: usize, prec: i32) -> Self {
        Cochain { dim, arity, prec, terms: BTreeMap::new() }
    }

    /// An exactly known cochain with no terms yet.
    pub fn exact(dim: usize, arity: usize) -> Self {
        Cochain::new(dim, arity, EXACT)
    }

    /// The identity 1-cochain `u ↦ u`.
    pub fn identity(dim: usize) -> Self {
        let mut c = Cochain::exact(dim, 1);
        c.add_term(0, vec![Monomial::one()], &BasePoly::one(dim));
        c
    }

    /// The 0-cochain given by a fixed function.
    pub fn constant(f: &HbarSeries) -> Self {
        let mut c = Cochain::new(f.dim(), 0, f.prec());
        for (k, p) in f.coeffs() {
            c.add_term(*k, vec![], p);
        }
        c
    }

    /// The vector field `Σ Y^i ∂_i` at ħ-order `l`.
    pub fn vector_field(l: i32, components: &[BasePoly]) -> Self {
        let dim = components.len();
        let mut c = Cochain::exact(dim, 1);
        for (i, y) in components.iter().enumerate() {
            c.add_term(l, vec![Monomial::var(i)], y);
        }
        c
    }

    /// The 2-cochain `Σ_k ħ^k C_k` of a table.
    pub fn from_table(s: &StarProductTable) -> Self {
        let mut c = Cochain::new(s.dim(), 2, s.order() as i32 + 1);
        for (k, op) in s.ops().iter().enumerate() {
            for ((a, b), g) in op {
                c.add_term(k as i32, vec![*a, *b], g);
            }
        }
        c
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn prec(&self) -> i32 {
        self.prec
    }

    pub fn is_exact(&self) -> bool {
        self.prec >= EXACT / 2
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(i32, Vec<Monomial>), &BasePoly)> {
        self.terms.iter()
    }

    /// Lowest ħ-order that may be nonzero.
    pub fn valuation(&self) -> i32 {
        self.terms.keys().next().map_or(self.prec, |k| k.0).min(self.prec)
    }

    /// Highest derivative order in any slot.
    pub fn max_order(&self) -> u32 {
        self.terms.keys().flat_map(|(_, d)| d.iter().map(|m| m.degree())).max().unwrap_or(0)
    }

    pub fn add_term(&mut self, l: i32, derivs: Vec<Monomial>, g: &BasePoly) {
        assert_eq!(derivs.len(), self.arity, "arity mismatch");
        if g.is_zero() || l >= self.prec {
            return;
        }
        let key = (l, derivs);
        let e = self.terms.entry(key.clone()).or_insert_with(|| BasePoly::zero(g.dim()));
        *e = &*e + g;
        if e.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn truncate(&self, prec: i32) -> Cochain {
        let prec = prec.min(self.prec);
        Cochain {
            dim: self.dim,
            arity: self.arity,
            prec,
            terms: self.terms.iter().filter(|(k, _)| k.0 < prec).map(|(k, v)| (k.clone(), v.clone())).collect(),
        }
    }

    pub fn add(&self, o: &Cochain) -> Cochain {
        assert_eq!((self.dim, self.arity), (o.dim, o.arity), "incompatible cochains");
        let mut out = self.truncate(o.prec);
        for ((l, d), g) in &o.terms {
            out.add_term(*l, d.clone(), g);
        }
        out
    }

    pub fn sub(&self, o: &Cochain) -> Cochain {
        self.add(&o.scale(&Scalar::from_int(-1)))
    }

    pub fn scale(&self, s: &Scalar) -> Cochain {
        let mut out = Cochain::new(self.dim, self.arity, self.prec);
        for ((l, d), g) in &self.terms {
            out.add_term(*l, d.clone(), &g.scale(s));
        }
        out
    }

    /// Multiply by `ħ^shift`.
    pub fn shift_hbar(&self, shift: i32) -> Cochain {
        Cochain {
            dim: self.dim,
            arity: self.arity,
            prec: if self.is_exact() { EXACT } else { self.prec + shift },
            terms: self.terms.iter().map(|((l, d), g)| ((l + shift, d.clone()), g.clone())).collect(),
        }
    }

    /// The coefficient of `ħ^l` as a bidifferential operator (arity 2 only).
    pub fn bidiff_at(&self, l: i32) -> Bidiff {
        assert_eq!(self.arity, 2);
        self.terms.iter().filter(|(k, _)| k.0 == l).map(|((_, d), g)| ((d[0], d[1]), g.clone())).collect()
    }

    /// Evaluate on ħ-series arguments.
    pub fn apply(&self, args: &[HbarSeries]) -> Result<HbarSeries> {
        if args.len() != self.arity {
            return Err(Error::ArityMismatch { expected: self.arity, got: args.len() });
        }
        let vals: Vec<i32> = args.iter().map(|a| a.valuation()).collect();
        let vsum: i32 = vals.iter().fold(0i32, |s, v| s.saturating_add(*v));
        let mut prec = if self.is_exact() { EXACT } else { self.prec.saturating_add(vsum) };
        let lmin = self.valuation();
        for (i, a) in args.iter().enumerate() {
            if !a.is_exact() {
                prec = prec.min(a.prec() + lmin + vsum - vals[i]);
            }
        }
        let mut out = HbarSeries::zero(self.dim, prec);
        let mut cache: HashMap<(usize, Monomial), HbarSeries> = HashMap::new();
        for ((l, derivs), g) in &self.terms {
            let mut acc = HbarSeries::term(*l, g.clone());
            for (i, alpha) in derivs.iter().enumerate() {
                let d = cache.entry((i, *alpha)).or_insert_with(|| args[i].map(|p| p.diff_multi(alpha)));
                acc = acc.mul(d);
                if acc.is_zero() && acc.is_exact() {
                    break;
                }
            }
            for (k, p) in acc.coeffs() {
                out.add_coeff(*k, p);
            }
        }
        Ok(out)
    }

    /// Evaluate on polynomials.
    pub fn apply_polys(&self, args: &[BasePoly]) -> Result<HbarSeries> {
        let s: Vec<HbarSeries> = args.iter().map(|p| HbarSeries::from_poly(p.clone())).collect();
        self.apply(&s)
    }

    pub fn render(&self) -> String {
        let mut parts: Vec<String> = self
            .terms
            .iter()
            .map(|((l, d), g)| {
                let ops: Vec<String> = d.iter().map(|m| render_monomial(m, self.dim, "d")).collect();
                format!("hbar^{l} ({}) [{}]", g.render(), ops.join(" | "))
            })
            .collect();
        if parts.is_empty() {
            parts.push("0".into());
        }
        let mut s = parts.join(" + ");
        if !self.is_exact() {
            s.push_str(&format!(" + O(hbar^{})", self.prec));
        }
        s
    }
}

impl fmt::Debug for Cochain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Checked evaluation of a cochain on polynomial arguments.
pub fn apply_cochain(c: &Cochain, fs: &[BasePoly]) -> Result<HbarSeries> {
    c.apply_polys(fs)
}

/// All ways to write `beta = γ_0 + … + γ_{parts-1}`, with multinomial weights.
fn leibniz_splits(beta: &Monomial, parts: usize, dim: usize) -> Vec<(i64, Vec<Monomial>)> {
    let mut out: Vec<(i64, Vec<Monomial>)> = vec![(1, vec![Monomial::one(); parts])];
    for c in 0..dim {
        let e = beta.get(c);
        if e == 0 {
            continue;
        }
        // compositions of e into `parts` pieces
        let mut comps: Vec<Vec<u16>> = Vec::new();
        fn rec(left: u16, slots: usize, cur: &mut Vec<u16>, out: &mut Vec<Vec<u16>>) {
            if slots == 1 {
                cur.push(left);
                out.push(cur.clone());
                cur.pop();
                return;
            }
            for v in 0..=left {
                cur.push(v);
                rec(left - v, slots - 1, cur, out);
                cur.pop();
            }
        }
        rec(e, parts, &mut Vec::new(), &mut comps);
        let fact = |n: u16| (1..=n as i64).product::<i64>();
        let mut next = Vec::with_capacity(out.len() * comps.len());
        for (w, ms) in &out {
            for comp in &comps {
                let mut coef = fact(e);
                for v in comp {
                    coef /= fact(*v);
                }
                let mut ms2 = ms.clone();
                for (j, v) in comp.iter().enumerate() {
                    for _ in 0..*v {
                        ms2[j] = ms2[j].inc(c);
                    }
                }
                next.push((w * coef, ms2));
            }
        }
        out = next;
    }
    out
}

/// Accumulator for cochain terms during composition.
struct TermAcc {
    dim: usize,
    terms: BTreeMap<(i32, Vec<Monomial>), BasePoly>,
}

impl TermAcc {
    fn add(&mut self, l: i32, derivs: Vec<Monomial>, g: &BasePoly, s: &Scalar) {
        let e = self.terms.entry((l, derivs)).or_insert_with(|| BasePoly::zero(self.dim));
        e.add_assign_scaled(g, s);
    }
}

/// Symbolic `b(c) = (i/ħ) b̃(c)` through `ħ^n`, composing cochain terms with the table.
pub fn coboundary(c: &Cochain, s: &StarProductTable, n: i32) -> Result<Cochain> {
    let dim = c.dim;
    let k = c.arity;
    let ns = s.order() as i32;
    let natural = c.prec.min(c.valuation().saturating_add(ns + 1)).saturating_sub(1);
    if n + 1 > natural {
        return Err(Error::InsufficientOrder(format!(
            "coboundary through hbar^{n} needs a table of order >= {} and a cochain known to hbar^{}",
            n + 1 - c.valuation(),
            n + 1
        )));
    }
    // b̃ terms are needed through ħ^{n+1}
    let top = n + 1;
    let mut acc = TermAcc { dim, terms: BTreeMap::new() };
    let mut split_cache: HashMap<(Monomial, usize), Vec<(i64, Vec<Monomial>)>> = HashMap::new();
    let mut splits = |b: &Monomial, parts: usize| -> Vec<(i64, Vec<Monomial>)> {
        split_cache.entry((*b, parts)).or_insert_with(|| leibniz_splits(b, parts, dim)).clone()
    };
    for ((l, alphas), h) in &c.terms {
        for m in 0..=ns {
            let order = l + m;
            if order > top {
                break;
            }
            for ((b0, b1), g) in s.op(m as usize) {
                // u0 ∗ c(u1..uk): ∂^{b1} falls on h·Π ∂^{α_i} u_i
                for (w, parts) in splits(b1, k + 1) {
                    let coef = &(g * &h.diff_multi(&parts[0]));
                    let mut d = vec![*b0];
                    d.extend(alphas.iter().zip(&parts[1..]).map(|(a, p)| a.mul(p)));
                    acc.add(order, d, coef, &Scalar::from_int(w));
                }
                // (−1)^{k+1} c(u0..u_{k−1}) ∗ u_k
                let sign_last = if (k + 1) % 2 == 0 { 1 } else { -1 };
                for (w, parts) in splits(b0, k + 1) {
                    let coef = &(g * &h.diff_multi(&parts[0]));
                    let mut d: Vec<Monomial> = alphas.iter().zip(&parts[1..]).map(|(a, p)| a.mul(p)).collect();
                    d.push(*b1);
                    acc.add(order, d, coef, &Scalar::from_int(w * sign_last));
                }
                // (−1)^{i+1} c(u0, …, u_i ∗ u_{i+1}, …, u_k)
                for i in 0..k {
                    let sign = if i % 2 == 0 { -1 } else { 1 };
                    for (w, parts) in splits(&alphas[i], 3) {
                        let coef = &(h * &g.diff_multi(&parts[0]));
                        let mut d: Vec<Monomial> = alphas[..i].to_vec();
                        d.push(b0.mul(&parts[1]));
                        d.push(b1.mul(&parts[2]));
                        d.extend_from_slice(&alphas[i + 1..]);
                        acc.add(order, d, coef, &Scalar::from_int(w * sign));
                    }
                }
            }
        }
    }
    let mut out = Cochain::new(dim, k + 1, n + 1);
    for ((l, d), g) in acc.terms {
        // (i/ħ) shifts every order down by one
        out.add_term(l - 1, d, &g.scale(&Scalar::i()));
    }
    Ok(out)
}

/// `b(c)(u_0,…,u_k)` evaluated directly with the table's star-product.
pub fn eval_coboundary(c: &Cochain, s: &StarProductTable, args: &[HbarSeries]) -> Result<HbarSeries> {
    let k = c.arity;
    if args.len() != k + 1 {
        return Err(Error::ArityMismatch { expected: k + 1, got: args.len() });
    }
    let mut total = s.star(&args[0], &c.apply(&args[1..])?);
    for i in 0..k {
        let mut inner: Vec<HbarSeries> = args[..i].to_vec();
        inner.push(s.star(&args[i], &args[i + 1]));
        inner.extend_from_slice(&args[i + 2..]);
        let term = c.apply(&inner)?;
        total = if i % 2 == 0 { total.sub(&term) } else { total.add(&term) };
    }
    let last = s.star(&c.apply(&args[..k])?, &args[k]);
    total = if (k + 1) % 2 == 0 { total.add(&last) } else { total.sub(&last) };
    Ok(total.scale(&Scalar::i()).shift(-1))
}

/// `c = Σ_k k ħ^{k−1} C_k`, the ħ-derivative of the product at fixed arguments.
pub fn derivative_cocycle(s: &StarProductTable) -> Cochain {
    let mut c = Cochain::new(s.dim(), 2, s.order() as i32);
    for (k, op) in s.ops().iter().enumerate().skip(1) {
        for ((a, b), g) in op {
            c.add_term(k as i32 - 1, vec![*a, *b], &g.scale(&Scalar::from_int(k as i64)));
        }
    }
    c
}

/// One nonzero entry of a residual sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualTerm {
    pub args: Vec<BasePoly>,
    pub hbar_order: i32,
    pub value: BasePoly,
}

/// Collect the nonzero coefficients of `value` at orders `≤ n` as residual terms.
pub fn residual_terms(args: &[BasePoly], value: &HbarSeries, n: i32) -> Vec<ResidualTerm> {
    value
        .coeffs()
        .filter(|(k, _)| **k <= n)
        .map(|(k, p)| ResidualTerm { args: args.to_vec(), hbar_order: *k, value: p.clone() })
        .collect()
}

/// `R(f,g) = (ħ∂ħ + X)(f∗g) − (ħ∂ħ + X)f ∗ g − f ∗ (ħ∂ħ + X)g` for ħ-free `f, g`.
pub fn liouville_residual(x: &Cochain, s: &StarProductTable, f: &BasePoly, g: &BasePoly) -> Result<HbarSeries> {
    let fs = HbarSeries::from_poly(f.clone());
    let gs = HbarSeries::from_poly(g.clone());
    let fg = s.star(&fs, &gs);
    let lhs = fg.euler().add(&x.apply(std::slice::from_ref(&fg))?);
    let r1 = s.star(&x.apply(std::slice::from_ref(&fs))?, &gs);
    let r2 = s.star(&fs, &x.apply(&[gs])?);
    Ok(lhs.sub(&r1).sub(&r2))
}

/// Residuals of the quantum Liouville condition on all monomial pairs of degree
/// `≤ test_deg`, through `ħ^n`. Empty means `ħ∂ħ + X` is a derivation at this scale.
pub fn liouville_check(x: &Cochain, s: &StarProductTable, test_deg: u32, n: i32) -> Result<Vec<ResidualTerm>> {
    if x.arity != 1 {
        return Err(Error::ArityMismatch { expected: 1, got: x.arity });
    }
    let dim = s.dim();
    let monos = Monomial::all_up_to(dim, test_deg);
    let mut out = Vec::new();
    for a in &monos {
        for b in &monos {
            let f = BasePoly::monomial(dim, *a, Scalar::one());
            let g = BasePoly::monomial(dim, *b, Scalar::one());
            let r = liouville_residual(x, s, &f, &g)?;
            if r.prec() <= n {
                return Err(Error::InsufficientOrder(format!(
                    "Liouville residual known only below hbar^{}, requested through hbar^{n}",
                    r.prec()
                )));
            }
            out.extend(residual_terms(&[f, g], &r, n));
        }
    }
    Ok(out)
}

/// The constant `λ` with `c = λ·b(X)` on monomial pairs of degree `≤ test_deg`
/// through `ħ^n`, if one exists.
pub fn liouville_constant(x: &Cochain, s: &StarProductTable, test_deg: u32, n: i32) -> Result<Option<Scalar>> {
    let c = derivative_cocycle(s);
    let bx = coboundary(x, s, n)?;
    let dim = s.dim();
    let monos = Monomial::all_up_to(dim, test_deg);
    let mut lambda: Option<Scalar> = None;
    let mut pairs = Vec::new();
    for a in &monos {
        for b in &monos {
            let f = BasePoly::monomial(dim, *a, Scalar::one());
            let g = BasePoly::monomial(dim, *b, Scalar::one());
            let cv = c.apply_polys(&[f.clone(), g.clone()])?.truncate(n + 1);
            let bv = bx.apply_polys(&[f, g])?.truncate(n + 1);
            if lambda.is_none() {
                lambda = bv.coeffs().find_map(|(k, p)| p.terms().next().map(|(m, v)| &cv.coeff(*k).coeff(m) / v));
            }
            pairs.push((cv, bv));
        }
    }
    let Some(lambda) = lambda else {
        return Ok(pairs.iter().all(|(cv, _)| cv.is_zero()).then(Scalar::one));
    };
    let ok = pairs.iter().all(|(cv, bv)| cv.sub(&bv.scale(&lambda)).is_zero());
    Ok(ok.then_some(lambda))
}

/// Solve `b₀T = s` for a differential operator `T = Σ t_α ∂^α`, using
/// `b₀T = t_0 − Σ_{β+γ=α; β,γ≠0} C(α,β) t_α ∂^β⊗∂^γ`.
fn solve_b0(s: &Bidiff, dim: usize) -> Result<BTreeMap<Monomial, BasePoly>> {
    let mut t: BTreeMap<Monomial, BasePoly> = BTreeMap::new();
    for ((b, c), g) in s {
        let alpha = b.mul(c);
        if b.is_one() != c.is_one() {
            return Err(Error::Infeasible("one-sided term cannot be a Hochschild coboundary".into()));
        }
        let val = if alpha.is_one() { g.clone() } else { g.scale(&Scalar::from_ratio(-1, alpha.binomial(b))) };
        t.entry(alpha).or_insert(val);
    }
    if b0_of(&t, dim) != *s {
        return Err(Error::Infeasible("symmetric part is not a Hochschild coboundary".into()));
    }
    Ok(t)
}

fn b0_of(t: &BTreeMap<Monomial, BasePoly>, _dim: usize) -> Bidiff {
    let mut out = Bidiff::new();
    for (alpha, g) in t {
        if alpha.is_one() {
            out.insert((Monomial::one(), Monomial::one()), g.clone());
            continue;
        }
        for b in alpha.divisors() {
            if b.is_one() || b == *alpha {
                continue;
            }
            let c = b.quotient_of(alpha);
            let v = g.scale(&Scalar::from_int(-alpha.binomial(&b)));
            let e = out.entry((b, c)).or_insert_with(|| BasePoly::zero(g.dim()));
            *e = &*e + &v;
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

/// Step record of the constructive trivialization.
#[derive(Clone, Debug)]
pub struct TrivializerStep {
    pub hbar_order: i32,
    /// `b(Y)|_{ħ⁰} = κ·c′` for the bivector part `c′`; `None` if `c′ = 0`.
    pub kappa: Option<Scalar>,
}

/// `H` with `b(H) = c` through `ħ^n` on a chart with constant `π`, built order by order.
pub fn trivialize_on_flat(
    c: &Cochain,
    s: &StarProductTable,
    pm: &PoissonMatrix,
    n: i32,
) -> Result<(Cochain, Vec<TrivializerStep>)> {
    if c.arity != 2 {
        return Err(Error::ArityMismatch { expected: 2, got: c.arity });
    }
    let dim = c.dim;
    let omega = pm.require_omega()?;
    let pi = pm.pi();
    let mut h = Cochain::exact(dim, 1);
    let mut steps = Vec::new();
    let start = c.valuation().min(n + 1);
    for l in start..=n {
        let r = c.sub(&coboundary(&h, s, n)?).truncate(n + 1);
        if r.valuation() < l {
            return Err(Error::Infeasible(format!("residual reappeared at hbar^{}", r.valuation())));
        }
        let rl = r.bidiff_at(l);
        if rl.is_empty() {
            steps.push(TrivializerStep { hbar_order: l, kappa: None });
            continue;
        }
        // antisymmetric first-order part
        let mut bivector = vec![vec![BasePoly::zero(dim); dim]; dim];
        let half = Scalar::from_ratio(1, 2);
        for i in 0..dim {
            for j in 0..dim {
                let a = rl.get(&(Monomial::var(i), Monomial::var(j))).cloned().unwrap_or_else(|| BasePoly::zero(dim));
                let b = rl.get(&(Monomial::var(j), Monomial::var(i))).cloned().unwrap_or_else(|| BasePoly::zero(dim));
                bivector[i][j] = (&a - &b).scale(&half);
            }
        }
        let mut sym = rl.clone();
        for i in 0..dim {
            for j in 0..dim {
                if bivector[i][j].is_zero() {
                    continue;
                }
                let e = sym.entry((Monomial::var(i), Monomial::var(j))).or_insert_with(|| BasePoly::zero(dim));
                *e = &*e - &bivector[i][j];
            }
        }
        sym.retain(|_, v| !v.is_zero());
        let t = solve_b0(&sym, dim)?;
        let mut tc = Cochain::exact(dim, 1);
        for (alpha, g) in &t {
            tc.add_term(l + 1, vec![*alpha], &g.scale(&Scalar::gaussian(0, 1, -1, 1)));
        }
        h = h.add(&tc);

        let kappa = if bivector.iter().flatten().all(|p| p.is_zero()) {
            None
        } else {
            // lower both indices with ω to get a 2-form, then take a primitive
            let mut beta = ScalarFormSeries::zero(dim);
            for i in 0..dim {
                for j in i + 1..dim {
                    let mut v = BasePoly::zero(dim);
                    for a in 0..dim {
                        for b in 0..dim {
                            let w = &omega[i][a] * &omega[b][j];
                            if !w.is_zero() {
                                v.add_assign_scaled(&bivector[a][b], &w);
                            }
                        }
                    }
                    beta.add_entry(0, DxMask::single(i).wedge(DxMask::single(j)).unwrap().1, &v);
                }
            }
            if !d_exterior(&beta).is_zero() {
                return Err(Error::Infeasible("bivector part is not a Poisson cocycle".into()));
            }
            let alpha = euler_homotopy(&beta)?;
            let comps: Vec<BasePoly> = (0..dim)
                .map(|i| {
                    let mut y = BasePoly::zero(dim);
                    for j in 0..dim {
                        y.add_assign_scaled(&alpha.get(0, DxMask::single(j)), &pi[i][j]);
                    }
                    y
                })
                .collect();
            let y = Cochain::vector_field(0, &comps);
            let by = coboundary(&y, s, 0)?.bidiff_at(0);
            let kappa = fit_ratio(&by, &bivector)?;
            h = h.add(&y.shift_hbar(l).scale(&kappa.inv().unwrap()));
            Some(kappa)
        };
        steps.push(TrivializerStep { hbar_order: l, kappa });
    }
    let residual = c.sub(&coboundary(&h, s, n)?).truncate(n + 1);
    if !residual.is_zero() {
        return Err(Error::Infeasible(format!("trivializer left a residual at hbar^{}", residual.valuation())));
    }
    Ok((h, steps))
}

/// The scalar `κ` with `op = κ·Σ m^{ij} ∂_i⊗∂_j`, if any.
fn fit_ratio(op: &Bidiff, m: &[Vec<BasePoly>]) -> Result<Scalar> {
    let dim = m.len();
    let mut target = Bidiff::new();
    for i in 0..dim {
        for j in 0..dim {
            if !m[i][j].is_zero() {
                target.insert((Monomial::var(i), Monomial::var(j)), m[i][j].clone());
            }
        }
    }
    let Some((key, (mono, v))) = target.iter().find_map(|(k, p)| p.terms().next().map(|t| (k, t))) else {
        return Err(Error::Infeasible("empty bivector".into()));
    };
    let got = op.get(key).map(|q| q.coeff(mono)).unwrap_or_default();
    let kappa = &got / v;
    if kappa.is_zero() {
        return Err(Error::Infeasible("vector field does not reach the bivector".into()));
    }
    let keys: BTreeSet<_> = op.keys().chain(target.keys()).copied().collect();
    for k in keys {
        let a = op.get(&k).cloned().unwrap_or_else(|| BasePoly::zero(dim));
        let b = target.get(&k).cloned().unwrap_or_else(|| BasePoly::zero(dim));
        if a != b.scale(&kappa) {
            return Err(Error::Infeasible("coboundary of the vector field is not proportional to the bivector".into()));
        }
    }
    Ok(kappa)
}

/// Bounds for the Liouville candidate search.
#[derive(Clone, Debug)]
pub struct SearchBounds {
    /// Highest ħ-order of `X` and of the checked residual.
    pub hbar_order: i32,
    pub test_degree: u32,
    pub max_derivative_order: u32,
    pub max_coefficient_degree: u32,
}

impl Default for SearchBounds {
    fn default() -> Self {
        SearchBounds { hbar_order: 3, test_degree: 2, max_derivative_order: 2, max_coefficient_degree: 2 }
    }
}

/// Look for `X = Σ ħ^l t x^m ∂^α` with `ħ∂ħ + X` a derivation of `s` on the
/// test monomials. Coefficients may only depend on coordinates outside `frozen`
/// (coordinates in which the operator must be periodic).
pub fn search_liouville(s: &StarProductTable, frozen: &[usize], bounds: &SearchBounds) -> Result<Option<Cochain>> {
    let dim = s.dim();
    let n = bounds.hbar_order;
    if (s.order() as i32) < n {
        return Err(Error::InsufficientOrder(format!("search through hbar^{n} needs a table of order {n}")));
    }
    let coeff_monos: Vec<Monomial> = Monomial::all_up_to(dim, bounds.max_coefficient_degree)
        .into_iter()
        .filter(|m| frozen.iter().all(|&i| m.get(i) == 0))
        .collect();
    let derivs = Monomial::all_up_to(dim, bounds.max_derivative_order);
    let mut basis: Vec<(Monomial, Monomial)> = Vec::new();
    for m in &coeff_monos {
        for a in &derivs {
            basis.push((*m, *a));
        }
    }
    let nb = basis.len();
    let tests = Monomial::all_up_to(dim, bounds.test_degree);
    let mut solver = SparseSolver::new();
    for fa in &tests {
        for gb in &tests {
            let f = BasePoly::monomial(dim, *fa, Scalar::one());
            let g = BasePoly::monomial(dim, *gb, Scalar::one());
            let fs = HbarSeries::from_poly(f.clone());
            let gs = HbarSeries::from_poly(g.clone());
            let fg = s.star(&fs, &gs);
            // equations: Σ_u t_u L_u(f,g) = −ħ∂ħ(f∗g), per (ħ-order, x-monomial)
            let mut rows: BTreeMap<(i32, Monomial), SparseRow> = BTreeMap::new();
            let mut rhs: BTreeMap<(i32, Monomial), Scalar> = BTreeMap::new();
            for (k, p) in fg.euler().coeffs() {
                for (m, v) in p.terms() {
                    rhs.insert((*k, *m), -v);
                }
            }
            for (u, (m, a)) in basis.iter().enumerate() {
                let mut op = Cochain::exact(dim, 1);
                op.add_term(0, vec![*a], &BasePoly::monomial(dim, *m, Scalar::one()));
                let lu = op
                    .apply(std::slice::from_ref(&fg))?
                    .sub(&s.star(&op.apply(std::slice::from_ref(&fs))?, &gs))
                    .sub(&s.star(&fs, &op.apply(std::slice::from_ref(&gs))?));
                for l in 0..=n {
                    for (k, p) in lu.coeffs() {
                        if k + l > n {
                            continue;
                        }
                        for (mono, v) in p.terms() {
                            rows.entry((k + l, *mono)).or_default().insert(u + nb * l as usize, v.clone());
                        }
                    }
                }
            }
            let keys: BTreeSet<(i32, Monomial)> = rows.keys().chain(rhs.keys()).copied().collect();
            for key in keys {
                if key.0 > n {
                    continue;
                }
                let row = rows.remove(&key).unwrap_or_default();
                let b = rhs.remove(&key).unwrap_or_default();
                if !solver.add_equation(row, b) {
                    return Ok(None);
                }
            }
        }
    }
    let Some(sol) = solver.solution() else { return Ok(None) };
    let mut x = Cochain::exact(dim, 1);
    for (idx, v) in sol {
        let (m, a) = basis[idx % nb];
        let l = (idx / nb) as i32;
        x.add_term(l, vec![a], &BasePoly::monomial(dim, m, v));
    }
    Ok(Some(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::star_table::moyal_table;

    fn moyal(n: usize) -> (PoissonMatrix, StarProductTable) {
        let pm = PoissonMatrix::canonical(2).unwrap();
        let t = moyal_table(2, &[(0, pm.pi().clone())], n);
        (pm, t)
    }

    fn x(i: usize) -> BasePoly {
        BasePoly::var(2, i)
    }

    #[test]
    fn apply_examples() {
        let mut c = Cochain::exact(2, 2);
        c.add_term(0, vec![Monomial::var(0), Monomial::var(1)], &BasePoly::one(2));
        assert_eq!(c.apply_polys(&[x(0), x(1)]).unwrap(), HbarSeries::from_poly(BasePoly::one(2)));
        let mut d = Cochain::exact(2, 1);
        d.add_term(-1, vec![Monomial::var(0)], &BasePoly::one(2));
        assert_eq!(d.apply_polys(&[x(0)]).unwrap(), HbarSeries::term(-1, BasePoly::one(2)));
        assert!(matches!(d.apply_polys(&[]), Err(Error::ArityMismatch { .. })));
    }

    #[test]
    fn leibniz_weights() {
        let b = Monomial::from_exponents(&[2, 1]);
        let sp = leibniz_splits(&b, 2, 2);
        let total: i64 = sp.iter().map(|(w, _)| *w).sum();
        assert_eq!(total, 8); // 2^|β|
    }

    #[test]
    fn symbolic_and_evaluated_coboundary_agree() {
        let (_, s) = moyal(4);
        let mut c = Cochain::exact(2, 1);
        c.add_term(0, vec![Monomial::var(0)], &(&x(0) * &x(1)));
        c.add_term(1, vec![Monomial::from_exponents(&[0, 2])], &x(0));
        c.add_term(0, vec![Monomial::one()], &x(1));
        let bc = coboundary(&c, &s, 2).unwrap();
        let args = [&x(0) * &x(0), &(&x(1) * &x(1)) * &x(0)];
        let sym = bc.apply_polys(&args).unwrap().truncate(3);
        let ser: Vec<HbarSeries> = args.iter().map(|p| HbarSeries::from_poly(p.clone())).collect();
        let direct = eval_coboundary(&c, &s, &ser).unwrap().truncate(3);
        assert_eq!(sym, direct);
    }

    #[test]
    fn unit_is_central() {
        let (_, s) = moyal(3);
        let one = Cochain::constant(&HbarSeries::from_poly(BasePoly::one(2)));
        let b = coboundary(&one, &s, 2).unwrap();
        assert!(b.is_zero());
    }

    #[test]
    fn derivative_cocycle_is_closed() {
        let (_, s) = moyal(4);
        let c = derivative_cocycle(&s);
        assert_eq!(c.apply_polys(&[x(0), x(1)]).unwrap().coeff(0), BasePoly::constant(2, Scalar::gaussian(0, 1, 1, 2)));
        let bc = coboundary(&c, &s, 2).unwrap();
        assert!(bc.is_zero(), "{bc:?}");
    }

    #[test]
    fn half_euler_is_liouville_on_moyal() {
        let (_, s) = moyal(4);
        let half = Scalar::from_ratio(1, 2);
        let xf = Cochain::vector_field(0, &[x(0).scale(&half), x(1).scale(&half)]);
        assert!(liouville_check(&xf, &s, 2, 3).unwrap().is_empty());
        assert!(!liouville_check(&Cochain::exact(2, 1), &s, 2, 3).unwrap().is_empty());
        let lambda = liouville_constant(&xf, &s, 2, 3).unwrap();
        assert_eq!(lambda, Some(Scalar::gaussian(0, 1, -1, 1)));
    }

    #[test]
    fn trivializer_on_moyal_plane() {
        let (pm, s) = moyal(4);
        let c = derivative_cocycle(&s);
        let (h, steps) = trivialize_on_flat(&c, &s, &pm, 3).unwrap();
        assert!(c.sub(&coboundary(&h, &s, 3).unwrap()).truncate(4).is_zero());
        assert!(steps.iter().any(|st| st.kappa.is_some()));
        // ħ∂ħ + iH is then a quantum Liouville operator
        let xh = h.scale(&Scalar::i());
        assert!(liouville_check(&xh, &s, 2, 3).unwrap().is_empty());
    }

    #[test]
    fn search_finds_liouville_field_on_plane() {
        let (_, s) = moyal(3);
        let x = search_liouville(&s, &[], &SearchBounds { hbar_order: 2, test_degree: 2, max_derivative_order: 1, max_coefficient_degree: 1 })
            .unwrap()
            .expect("a Liouville operator exists on the plane");
        assert!(liouville_check(&x, &s, 2, 2).unwrap().is_empty());
    }
}
