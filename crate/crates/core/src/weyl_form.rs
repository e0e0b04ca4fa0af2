//! Weyl-algebra-valued differential forms and the operators of the Fedosov connection.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::forms::{DxMask, ScalarFormSeries};
use crate::poly::{BasePoly, Monomial};
use crate::scalar::Scalar;
use crate::weyl::{PoissonMatrix, Truncation, WeylElement, WeylIdx};

/// `Σ_I A_I dx^I` with Weyl-algebra coefficients. Mixed form degrees are allowed.
#[derive(Clone, PartialEq, Eq)]
pub struct WeylForm {
    dim: usize,
    trunc: Truncation,
    entries: BTreeMap<DxMask, WeylElement>,
}

impl WeylForm {
    pub fn zero(dim: usize, trunc: Truncation) -> Self {
        WeylForm { dim, trunc, entries: BTreeMap::new() }
    }

    /// A 0-form.
    pub fn from_element(a: WeylElement) -> Self {
        WeylForm::component(DxMask::EMPTY, a)
    }

    pub fn component(mask: DxMask, a: WeylElement) -> Self {
        let mut f = WeylForm::zero(a.dim(), a.trunc());
        f.add_component(mask, &a);
        f
    }

    /// Embed a scalar form series as a central Weyl form.
    pub fn from_scalar(w: &ScalarFormSeries, trunc: Truncation) -> Result<Self> {
        let mut out = WeylForm::zero(w.dim(), trunc);
        for ((k, m), p) in w.entries() {
            let mut e = WeylElement::zero(w.dim(), trunc);
            e.add_term(WeylIdx::new(*k, Monomial::one()), p)?;
            out.add_component(*m, &e);
        }
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn trunc(&self) -> Truncation {
        self.trunc
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&DxMask, &WeylElement)> {
        self.entries.iter()
    }

    pub fn get(&self, m: DxMask) -> WeylElement {
        self.entries.get(&m).cloned().unwrap_or_else(|| WeylElement::zero(self.dim, self.trunc))
    }

    /// The 0-form part.
    pub fn scalar_part(&self) -> WeylElement {
        self.get(DxMask::EMPTY)
    }

    /// Form degree when homogeneous; `None` for zero or mixed forms.
    pub fn form_degree(&self) -> Option<usize> {
        let mut it = self.entries.keys().map(|m| m.degree());
        let first = it.next()?;
        it.all(|d| d == first).then_some(first)
    }

    /// Terms of one form degree.
    pub fn degree_part(&self, q: usize) -> WeylForm {
        WeylForm {
            dim: self.dim,
            trunc: self.trunc,
            entries: self.entries.iter().filter(|(m, _)| m.degree() == q).map(|(m, a)| (*m, a.clone())).collect(),
        }
    }

    pub fn add_component(&mut self, m: DxMask, a: &WeylElement) {
        assert_eq!((a.dim(), a.trunc()), (self.dim, self.trunc), "incompatible component");
        if a.is_zero() || m.degree() > self.dim {
            return;
        }
        let sum = match self.entries.get(&m) {
            Some(e) => e.add(a),
            None => a.clone(),
        };
        if sum.is_zero() {
            self.entries.remove(&m);
        } else {
            self.entries.insert(m, sum);
        }
    }

    fn add_signed(&mut self, sign: i64, m: DxMask, a: &WeylElement) {
        if sign == 1 {
            self.add_component(m, a);
        } else {
            self.add_component(m, &a.neg());
        }
    }

    pub fn add(&self, o: &WeylForm) -> WeylForm {
        let mut out = self.clone();
        for (m, a) in &o.entries {
            out.add_component(*m, a);
        }
        out
    }

    pub fn sub(&self, o: &WeylForm) -> WeylForm {
        let mut out = self.clone();
        for (m, a) in &o.entries {
            out.add_component(*m, &a.neg());
        }
        out
    }

    pub fn neg(&self) -> WeylForm {
        self.map(|a| a.neg())
    }

    pub fn scale(&self, s: &Scalar) -> WeylForm {
        self.map(|a| a.scale(s))
    }

    /// Apply a linear map to every coefficient.
    pub fn map(&self, f: impl Fn(&WeylElement) -> WeylElement) -> WeylForm {
        let mut out = WeylForm::zero(self.dim, self.trunc);
        for (m, a) in &self.entries {
            out.add_component(*m, &f(a));
        }
        out
    }

    pub fn try_map(&self, f: impl Fn(&WeylElement) -> Result<WeylElement>) -> Result<WeylForm> {
        let mut out = WeylForm::zero(self.dim, self.trunc);
        for (m, a) in &self.entries {
            out.add_component(*m, &f(a)?);
        }
        Ok(out)
    }

    pub fn with_truncation(&self, trunc: Truncation) -> Result<WeylForm> {
        let mut out = WeylForm::zero(self.dim, trunc);
        for (m, a) in &self.entries {
            out.add_component(*m, &a.with_truncation(trunc)?);
        }
        Ok(out)
    }

    pub fn up_to_weight(&self, max: i32) -> WeylForm {
        self.map(|a| a.up_to_weight(max))
    }

    pub fn weight_slice(&self, w: i32) -> WeylForm {
        self.map(|a| a.weight_slice(w))
    }

    pub fn min_weight(&self) -> Option<i32> {
        self.entries.values().filter_map(|a| a.min_weight()).min()
    }

    pub fn max_weight(&self) -> Option<i32> {
        self.entries.values().filter_map(|a| a.max_weight()).max()
    }

    pub fn euler(&self) -> WeylForm {
        self.map(|a| a.euler())
    }

    pub fn hbar_derivative(&self) -> Result<WeylForm> {
        self.try_map(|a| a.hbar_derivative())
    }

    pub fn hbar_euler(&self) -> WeylForm {
        self.map(|a| a.hbar_euler())
    }

    pub fn shift_hbar(&self, shift: i32) -> Result<WeylForm> {
        self.try_map(|a| a.shift_hbar(shift))
    }

    /// `dx^i ∧ A`.
    pub fn wedge_dx(&self, i: usize) -> WeylForm {
        let mut out = WeylForm::zero(self.dim, self.trunc);
        for (m, a) in &self.entries {
            if let Some((s, m2)) = DxMask::single(i).wedge(*m) {
                out.add_signed(s, m2, a);
            }
        }
        out
    }

    /// True if every coefficient is y-free.
    pub fn is_central(&self) -> bool {
        self.entries.values().all(|a| a.is_central())
    }

    /// The scalar form series of a central Weyl form.
    pub fn to_scalar(&self) -> Option<ScalarFormSeries> {
        let mut out = ScalarFormSeries::zero(self.dim);
        for (m, a) in &self.entries {
            for (k, p) in a.terms() {
                if !k.y.is_one() {
                    return None;
                }
                out.add_entry(k.hbar, *m, p);
            }
        }
        Some(out)
    }

    fn pairwise(
        &self,
        o: &WeylForm,
        f: impl Fn(&WeylElement, &WeylElement) -> Result<WeylElement>,
    ) -> Result<WeylForm> {
        if self.dim != o.dim {
            return Err(Error::DimensionMismatch(self.dim, o.dim));
        }
        if self.trunc != o.trunc {
            return Err(Error::TruncationMismatch);
        }
        let mut out = WeylForm::zero(self.dim, self.trunc);
        for (ma, a) in &self.entries {
            for (mb, b) in &o.entries {
                if let Some((s, m)) = ma.wedge(*mb) {
                    out.add_signed(s, m, &f(a, b)?);
                }
            }
        }
        Ok(out)
    }

    /// Wedge on the `dx` factors, Moyal product on the coefficients.
    pub fn star(&self, o: &WeylForm, pm: &PoissonMatrix) -> Result<WeylForm> {
        self.pairwise(o, |a, b| a.star(b, pm))
    }

    /// `[A,B] = A∗B − (−1)^{|A||B|} B∗A`.
    pub fn graded_commutator(&self, o: &WeylForm, pm: &PoissonMatrix) -> Result<WeylForm> {
        self.pairwise(o, |a, b| a.commutator(b, pm))
    }

    /// `(1/ħ)[A,B]`, keeping Weyl degrees up to the cap.
    pub fn commutator_over_hbar(&self, o: &WeylForm, pm: &PoissonMatrix) -> Result<WeylForm> {
        self.pairwise(o, |a, b| a.commutator_over_hbar(b, pm))
    }

    /// `(i/ħ)[A,B]`.
    pub fn i_over_hbar_commutator(&self, o: &WeylForm, pm: &PoissonMatrix) -> Result<WeylForm> {
        Ok(self.commutator_over_hbar(o, pm)?.scale(&Scalar::i()))
    }

    /// The ħ-derivative of the fiber product, extended to forms with the wedge sign.
    pub fn star_hbar_derivative(&self, o: &WeylForm, pm: &PoissonMatrix) -> Result<WeylForm> {
        self.pairwise(o, |a, b| a.star_hbar_derivative(b, pm))
    }

    pub fn render(&self) -> String {
        if self.entries.is_empty() {
            return "0".to_string();
        }
        self.entries
            .iter()
            .map(|(m, a)| format!("({}) {}", a.render(), m.render()))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

impl fmt::Debug for WeylForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

pub fn graded_commutator(a: &WeylForm, b: &WeylForm, pm: &PoissonMatrix) -> Result<WeylForm> {
    a.graded_commutator(b, pm)
}

/// `δA = dx^k ∧ ∂A/∂y^k`.
pub fn delta(a: &WeylForm) -> WeylForm {
    let mut out = WeylForm::zero(a.dim, a.trunc);
    for (m, e) in &a.entries {
        for k in 0..a.dim {
            let Some((s, m2)) = DxMask::single(k).wedge(*m) else { continue };
            let d = e.diff_y(k);
            if !d.is_zero() {
                out.add_signed(s, m2, &d);
            }
        }
    }
    out
}

/// `δ⁻¹`: on a term of y-degree `p` and form degree `q`, `(1/(p+q)) y^k ι_k`.
pub fn delta_inv(a: &WeylForm) -> WeylForm {
    let dim = a.dim;
    let mut out = WeylForm::zero(dim, a.trunc);
    for (m, e) in &a.entries {
        let q = m.degree() as i64;
        if q == 0 {
            continue;
        }
        for k in m.indices() {
            let (s, m2) = m.contract(k).unwrap();
            let mut comp = WeylElement::zero(dim, a.trunc);
            for (idx, p) in e.terms() {
                let pq = idx.y.degree() as i64 + q;
                let c = Scalar::from_ratio(s, pq);
                comp.add_term(WeylIdx::new(idx.hbar, idx.y.inc(k)), &p.scale(&c)).expect("same ħ-order");
            }
            out.add_component(m2, &comp);
        }
    }
    out
}

/// The part of `A` with no `y` and no `dx`.
pub fn center_part(a: &WeylForm) -> WeylForm {
    let c = a.scalar_part().filter(|k| k.y.is_one());
    WeylForm::from_element(c)
}

/// `(δδ⁻¹A, δ⁻¹δA, A|_{y=0,q=0})`, which sum to `A`.
pub fn hodge_decompose(a: &WeylForm) -> (WeylForm, WeylForm, WeylForm) {
    (delta(&delta_inv(a)), delta_inv(&delta(a)), center_part(a))
}

/// A torsion-free symplectic connection with polynomial Christoffel symbols
/// on a chart with constant symplectic form.
#[derive(Clone, Debug)]
pub struct ConnectionData {
    pm: PoissonMatrix,
    /// `Γ_{ijk} = ω_{im} Γ^m_{jk}`, indexed `[i][j][k]`.
    lower: Vec<Vec<Vec<BasePoly>>>,
    /// `Γ^l_{jk}`, indexed `[l][j][k]`.
    upper: Vec<Vec<Vec<BasePoly>>>,
}

impl ConnectionData {
    /// The trivial connection `Γ = 0`.
    pub fn flat(pm: PoissonMatrix) -> Result<Self> {
        ConnectionData::new(pm, &[])
    }

    /// Each entry `((i,j,k), f)` sets `Γ_{ijk} = Γ_{ikj} = f`. The result must
    /// satisfy `∇ω = 0`.
    pub fn new(pm: PoissonMatrix, entries: &[((usize, usize, usize), BasePoly)]) -> Result<Self> {
        let n = pm.dim();
        let omega = pm.require_omega()?.clone();
        let mut lower = vec![vec![vec![BasePoly::zero(n); n]; n]; n];
        for ((i, j, k), f) in entries {
            if *i >= n || *j >= n || *k >= n {
                return Err(Error::IndexOutOfRange { index: (*i).max(*j).max(*k), dim: n });
            }
            if f.dim() != n {
                return Err(Error::DimensionMismatch(f.dim(), n));
            }
            lower[*i][*j][*k] = f.clone();
            lower[*i][*k][*j] = f.clone();
        }
        let pi = pm.pi();
        let mut upper = vec![vec![vec![BasePoly::zero(n); n]; n]; n];
        for l in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut acc = BasePoly::zero(n);
                    for i in 0..n {
                        acc.add_assign_scaled(&lower[i][j][k], &pi[l][i]);
                    }
                    upper[l][j][k] = acc;
                }
            }
        }
        // ∇_k ω_ij = −Γ^m_{ki} ω_mj − Γ^m_{kj} ω_im, computed from the raised symbols
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut acc = BasePoly::zero(n);
                    for m in 0..n {
                        acc.add_assign_scaled(&upper[m][k][i], &-&omega[m][j]);
                        acc.add_assign_scaled(&upper[m][k][j], &-&omega[i][m]);
                    }
                    if !acc.is_zero() {
                        return Err(Error::InvalidConnection(format!(
                            "connection does not preserve omega: nabla_{} omega_{}{} = {}",
                            k + 1,
                            i + 1,
                            j + 1,
                            acc.render()
                        )));
                    }
                }
            }
        }
        Ok(ConnectionData { pm, lower, upper })
    }

    pub fn poisson(&self) -> &PoissonMatrix {
        &self.pm
    }

    pub fn dim(&self) -> usize {
        self.pm.dim()
    }

    pub fn is_flat(&self) -> bool {
        self.lower.iter().flatten().flatten().all(|p| p.is_zero())
    }

    /// `Γ_{ijk}`.
    pub fn christoffel_lower(&self, i: usize, j: usize, k: usize) -> &BasePoly {
        &self.lower[i][j][k]
    }

    /// `Γ^l_{jk}`.
    pub fn christoffel(&self, l: usize, j: usize, k: usize) -> &BasePoly {
        &self.upper[l][j][k]
    }

    /// `R^m_{jkl} = ∂_kΓ^m_{lj} − ∂_lΓ^m_{kj} + Γ^m_{kp}Γ^p_{lj} − Γ^m_{lp}Γ^p_{kj}`.
    pub fn riemann(&self, m: usize, j: usize, k: usize, l: usize) -> BasePoly {
        let n = self.dim();
        let g = &self.upper;
        let mut r = &g[m][l][j].diff(k) - &g[m][k][j].diff(l);
        for p in 0..n {
            r = &r + &(&g[m][k][p] * &g[p][l][j]);
            r = &r - &(&g[m][l][p] * &g[p][k][j]);
        }
        r
    }

    /// The Weyl curvature term `¼ R_{ijkl} y^i y^j dx^k∧dx^l` with `R_{ijkl} = ω_{im} R^m_{jkl}`.
    pub fn curvature(&self, trunc: Truncation) -> WeylForm {
        let n = self.dim();
        let omega = self.pm.omega().expect("validated at construction");
        let quarter = Scalar::from_ratio(1, 4);
        let mut out = WeylForm::zero(n, trunc);
        for k in 0..n {
            for l in 0..n {
                let Some((s, mask)) = DxMask::single(k).wedge(DxMask::single(l)) else { continue };
                for j in 0..n {
                    let rm: Vec<BasePoly> = (0..n).map(|m| self.riemann(m, j, k, l)).collect();
                    for i in 0..n {
                        let mut rijkl = BasePoly::zero(n);
                        for (m, r) in rm.iter().enumerate() {
                            rijkl.add_assign_scaled(r, &omega[i][m]);
                        }
                        if rijkl.is_zero() {
                            continue;
                        }
                        let y = Monomial::var(i).mul(&Monomial::var(j));
                        let mut e = WeylElement::zero(n, trunc);
                        e.add_term(WeylIdx::new(0, y), &rijkl.scale(&quarter.scale_int(s))).expect("ħ⁰ term");
                        out.add_component(mask, &e);
                    }
                }
            }
        }
        out
    }

    /// `Σ_{l,i} Γ^l_{ki} y^i ∂a/∂y^l` for one direction `k`.
    fn rotate(&self, k: usize, a: &WeylElement) -> WeylElement {
        let n = self.dim();
        let mut out = WeylElement::zero(a.dim(), a.trunc());
        for l in 0..n {
            let da = a.diff_y(l);
            if da.is_zero() {
                continue;
            }
            for i in 0..n {
                let g = &self.upper[l][k][i];
                if !g.is_zero() {
                    out = out.add(&da.mul_y(i).mul_poly(g));
                }
            }
        }
        out
    }
}

/// `∂A = dx^k ∧ (∂A/∂x^k − Γ^l_{ki} y^i ∂A/∂y^l)`.
pub fn covariant_partial(a: &WeylForm, conn: &ConnectionData) -> WeylForm {
    let n = a.dim;
    let mut out = WeylForm::zero(n, a.trunc);
    for k in 0..n {
        let inner = a.map(|e| {
            let d = e.diff_x(k);
            if conn.is_flat() {
                d
            } else {
                d.sub(&conn.rotate(k, e))
            }
        });
        out = out.add(&inner.wedge_dx(k));
    }
    out
}

/// `D(A) = −δA + ∂A + (i/ħ)[γ, A]`.
pub fn fedosov_d(a: &WeylForm, conn: &ConnectionData, gamma: &WeylForm) -> Result<WeylForm> {
    let bracket = gamma.i_over_hbar_commutator(a, conn.poisson())?;
    Ok(covariant_partial(a, conn).sub(&delta(a)).add(&bracket))
}
