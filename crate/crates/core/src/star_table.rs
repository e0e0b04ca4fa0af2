//! Star-products as explicit bidifferential operators `f ∗ g = Σ ħ^k C_k(f,g)`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::connection::{flat_section_poly, FedosovSetup};
use crate::linalg::{mat_mul, Matrix};
use crate::poly::{BasePoly, Monomial};
use crate::random;
use crate::scalar::Scalar;
use crate::series::{product_prec, HbarSeries};
use crate::weyl::WeylElement;

/// `Σ g_{α,β}(x) ∂^α ⊗ ∂^β`.
pub type Bidiff = BTreeMap<(Monomial, Monomial), BasePoly>;

/// Apply a bidifferential operator to two polynomials.
pub fn apply_bidiff(op: &Bidiff, f: &BasePoly, g: &BasePoly) -> BasePoly {
    let mut out = BasePoly::zero(f.dim());
    for ((a, b), coef) in op {
        let df = f.diff_multi(a);
        if df.is_zero() {
            continue;
        }
        let dg = g.diff_multi(b);
        if dg.is_zero() {
            continue;
        }
        out = &out + &(&(coef * &df) * &dg);
    }
    out
}

/// `C_0 … C_N` of a star-product, known exactly through `ħ^N`.
#[derive(Clone, Debug, PartialEq)]
pub struct StarProductTable {
    dim: usize,
    ops: Vec<Bidiff>,
}

impl StarProductTable {
    pub fn new(dim: usize, ops: Vec<Bidiff>) -> Self {
        assert!(!ops.is_empty(), "a table has at least C_0");
        StarProductTable { dim, ops }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Highest ħ-order `N` represented.
    pub fn order(&self) -> usize {
        self.ops.len() - 1
    }

    pub fn op(&self, k: usize) -> &Bidiff {
        &self.ops[k]
    }

    pub fn ops(&self) -> &[Bidiff] {
        &self.ops
    }

    /// `C_k(f,g)` for polynomials.
    pub fn apply(&self, k: usize, f: &BasePoly, g: &BasePoly) -> BasePoly {
        apply_bidiff(&self.ops[k], f, g)
    }

    /// `f ∗ g` of polynomials through `ħ^N`.
    pub fn star_poly(&self, f: &BasePoly, g: &BasePoly) -> HbarSeries {
        let mut out = HbarSeries::zero(self.dim, self.order() as i32 + 1);
        for k in 0..=self.order() {
            out.add_coeff(k as i32, &self.apply(k, f, g));
        }
        out
    }

    /// `f ∗ g` of ħ-series, with precision tracked.
    pub fn star(&self, f: &HbarSeries, g: &HbarSeries) -> HbarSeries {
        let n = self.order() as i32;
        let (vf, vg) = (f.valuation(), g.valuation());
        let prec = product_prec(vf, f.prec(), vg, g.prec()).min(vf.saturating_add(vg).saturating_add(n + 1));
        let mut out = HbarSeries::zero(self.dim, prec);
        for (a, fa) in f.coeffs() {
            for (b, gb) in g.coeffs() {
                for k in 0..=n {
                    if a + b + k < prec {
                        out.add_coeff(a + b + k, &self.apply(k as usize, fa, gb));
                    }
                }
            }
        }
        out
    }

    /// Keep `C_0 … C_n`.
    pub fn truncated(&self, n: usize) -> StarProductTable {
        StarProductTable { dim: self.dim, ops: self.ops[..=n.min(self.order())].to_vec() }
    }
}

/// Moyal table for a constant, possibly ħ-dependent bivector `π(ħ) = Σ_j ħ^j π_j`:
/// the terms of `exp((−iħ/2) π(ħ)^{ab} ∂_a ⊗ ∂_b)` through `ħ^n`.
pub fn moyal_table(dim: usize, pi_series: &[(i32, Matrix)], n: usize) -> StarProductTable {
    // constant-coefficient operators: (ħ-order, α, β) -> coefficient
    type Op = BTreeMap<(i32, Monomial, Monomial), Scalar>;
    let mut gen: Op = BTreeMap::new();
    let pre = Scalar::gaussian(0, 1, -1, 2);
    for (j, m) in pi_series {
        for (a, row) in m.iter().enumerate() {
            for (b, v) in row.iter().enumerate() {
                if !v.is_zero() {
                    *gen.entry((j + 1, Monomial::var(a), Monomial::var(b))).or_default() += &(&pre * v);
                }
            }
        }
    }
    let compose = |x: &Op, y: &Op| -> Op {
        let mut out: Op = BTreeMap::new();
        for ((h1, a1, b1), c1) in x {
            for ((h2, a2, b2), c2) in y {
                if h1 + h2 <= n as i32 {
                    *out.entry((h1 + h2, a1.mul(a2), b1.mul(b2))).or_default() += &(c1 * c2);
                }
            }
        }
        out.retain(|_, v| !v.is_zero());
        out
    };
    let mut total: Op = BTreeMap::new();
    total.insert((0, Monomial::one(), Monomial::one()), Scalar::one());
    let mut power = total.clone();
    for m in 1..=n {
        power = compose(&power, &gen);
        let inv = Scalar::from_ratio(1, m as i64);
        power = power.into_iter().map(|(k, v)| (k, &v * &inv)).collect();
        for (k, v) in &power {
            *total.entry(*k).or_default() += v;
        }
    }
    let mut ops = vec![Bidiff::new(); n + 1];
    for ((h, a, b), v) in total {
        if !v.is_zero() && h >= 0 && (h as usize) <= n {
            ops[h as usize].insert((a, b), BasePoly::constant(dim, v));
        }
    }
    StarProductTable::new(dim, ops)
}

/// `(ω₀ + Σ_k ħ^k ω_k)⁻¹` as a series `Σ ħ^j π_j` through `ħ^n`, for constant `ω_k`.
pub fn inverse_series(pi0: &Matrix, perturbations: &[(i32, Matrix)], n: usize) -> Vec<(i32, Matrix)> {
    // (ω₀(1 + π₀Δ))⁻¹ = Σ_m (−π₀Δ)^m π₀
    let dim = pi0.len();
    let mut series: BTreeMap<i32, Matrix> = BTreeMap::new();
    series.insert(0, pi0.clone());
    let mut term: BTreeMap<i32, Matrix> = series.clone();
    for _ in 1..=n {
        let mut next: BTreeMap<i32, Matrix> = BTreeMap::new();
        for (h, t) in &term {
            for (k, w) in perturbations {
                if h + k > n as i32 {
                    continue;
                }
                let prod = mat_mul(&mat_mul(pi0, w), t);
                let e = next.entry(h + k).or_insert_with(|| vec![vec![Scalar::zero(); dim]; dim]);
                for i in 0..dim {
                    for j in 0..dim {
                        e[i][j] -= &prod[i][j];
                    }
                }
            }
        }
        for (h, t) in &next {
            let e = series.entry(*h).or_insert_with(|| vec![vec![Scalar::zero(); dim]; dim]);
            for i in 0..dim {
                for j in 0..dim {
                    e[i][j] += &t[i][j];
                }
            }
        }
        term = next;
    }
    series.into_iter().filter(|(_, m)| m.iter().flatten().any(|v| !v.is_zero())).collect()
}

/// Reconstruct `C_0 … C_n` from the Fedosov star by interpolating on monomial jets
/// up to derivative order `order_cap` in each argument, then re-check on random pairs.
pub fn extract_table(setup: &FedosovSetup, n: usize, order_cap: u32) -> Result<StarProductTable> {
    if 2 * n as i32 > setup.trunc().degree_cap {
        return Err(Error::InsufficientOrder(format!(
            "star order {n} needs degree cap >= {}, have {}",
            2 * n,
            setup.trunc().degree_cap
        )));
    }
    let dim = setup.dim();
    let monos = Monomial::all_up_to(dim, order_cap);
    let sections: Vec<WeylElement> = monos
        .iter()
        .map(|m| flat_section_poly(&BasePoly::monomial(dim, *m, Scalar::one()), setup))
        .collect::<Result<_>>()?;
    let mut ops = vec![Bidiff::new(); n + 1];
    let index: BTreeMap<Monomial, usize> = monos.iter().enumerate().map(|(i, m)| (*m, i)).collect();
    let mut pairs: Vec<(Monomial, Monomial)> =
        monos.iter().flat_map(|a| monos.iter().map(move |b| (*a, *b))).collect();
    pairs.sort_by_key(|(a, b)| a.degree() + b.degree());
    for (a, b) in pairs {
        let value = sections[index[&a]].star_center(&sections[index[&b]], setup.poisson())?;
        let xa = BasePoly::monomial(dim, a, Scalar::one());
        let xb = BasePoly::monomial(dim, b, Scalar::one());
        let norm = (&a.factorial() * &b.factorial()).inv().unwrap();
        for (k, op) in ops.iter_mut().enumerate() {
            // the already-determined lower jets contribute; the (a,b) jet is what is left
            let known = apply_bidiff(op, &xa, &xb);
            let g = (&value.coeff(k as i32) - &known).scale(&norm);
            if !g.is_zero() {
                op.insert((a, b), g);
            }
        }
    }
    let table = StarProductTable::new(dim, ops);
    verify_table(&table, setup, 4, order_cap + 2, 0)?;
    Ok(table)
}

/// Compare the table with the Fedosov star on seeded random polynomial pairs.
pub fn verify_table(table: &StarProductTable, setup: &FedosovSetup, pairs: usize, max_deg: u32, seed: u64) -> Result<()> {
    let dim = setup.dim();
    let mut rng = random::rng(seed);
    for _ in 0..pairs {
        let f = random::poly(&mut rng, dim, max_deg, 3);
        let g = random::poly(&mut rng, dim, max_deg, 3);
        let direct = crate::connection::star(&HbarSeries::from_poly(f.clone()), &HbarSeries::from_poly(g.clone()), setup)?
            .truncate(table.order() as i32 + 1);
        let via_table = table.star_poly(&f, &g);
        if direct != via_table {
            return Err(Error::InsufficientOrder(format!(
                "table does not reproduce the star product on ({}, {}); raise the derivative order cap",
                f.render(),
                g.render()
            )));
        }
    }
    Ok(())
}

/// How a Fedosov table relates to the Moyal table of `(ω₀ + Σħ^kω_k)⁻¹`.
#[derive(Clone, Debug)]
pub struct GaugeReport {
    pub order: usize,
    /// Per ħ-order: whether `C_k` agrees term by term.
    pub identical: Vec<bool>,
    /// Operators `C_k^{Fedosov} − C_k^{Moyal}` where they differ.
    pub differences: Vec<Bidiff>,
}

impl GaugeReport {
    pub fn term_identical(&self) -> bool {
        self.identical.iter().all(|b| *b)
    }
}

/// Compare `table` with the Moyal product of the ħ-dependent bivector inverse to `Ω`.
/// Only available when every perturbation is a constant form.
pub fn gauge_report(setup: &FedosovSetup, table: &StarProductTable) -> Result<GaugeReport> {
    let pm = setup.poisson();
    let mut perts = Vec::new();
    for (k, w) in setup.presc().perturbations() {
        if w.entries().any(|(_, p)| !p.is_constant()) {
            return Err(Error::Invalid("gauge comparison needs constant perturbations".into()));
        }
        perts.push((*k, w.constant_two_form_matrix(0)));
    }
    let n = table.order();
    let series = inverse_series(pm.pi(), &perts, n);
    let moyal = moyal_table(setup.dim(), &series, n);
    let mut identical = Vec::new();
    let mut differences = Vec::new();
    for k in 0..=n {
        let mut diff = table.op(k).clone();
        for (key, v) in moyal.op(k) {
            let e = diff.entry(*key).or_insert_with(|| BasePoly::zero(setup.dim()));
            *e = &*e - v;
        }
        diff.retain(|_, v| !v.is_zero());
        identical.push(diff.is_empty());
        differences.push(diff);
    }
    Ok(GaugeReport { order: n, identical, differences })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::CurvaturePrescription;
    use crate::weyl::{PoissonMatrix, Truncation};
    use crate::weyl_form::ConnectionData;

    #[test]
    fn flat_table_is_moyal() {
        let pm = PoissonMatrix::canonical(2).unwrap();
        let conn = ConnectionData::flat(pm.clone()).unwrap();
        let setup =
            FedosovSetup::new(conn, CurvaturePrescription::unperturbed(2), Truncation::new(6, -2).unwrap()).unwrap();
        let t = extract_table(&setup, 3, 3).unwrap();
        assert_eq!(t, moyal_table(2, &[(0, pm.pi().clone())], 3));
        let c0 = t.op(0);
        assert_eq!(c0.len(), 1);
        let gauge = gauge_report(&setup, &t).unwrap();
        assert!(gauge.term_identical());
    }

    #[test]
    fn order_zero_is_multiplication() {
        let pm = PoissonMatrix::canonical(2).unwrap();
        let t = moyal_table(2, &[(0, pm.pi().clone())], 0);
        let f = BasePoly::var(2, 0);
        assert_eq!(t.star_poly(&f, &f).coeff(0), &f * &f);
    }
}
