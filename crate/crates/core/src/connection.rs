//! Fedosov's recursions: the Abelian connection `γ` for a prescribed Weyl
//! curvature, flat sections, and the induced star-product.

use crate::error::{Error, Result};
use crate::forms::{d_exterior, DxMask, ScalarFormSeries};
use crate::poly::{BasePoly, Monomial};
use crate::scalar::Scalar;
use crate::series::HbarSeries;
use crate::weyl::{PoissonMatrix, Truncation, WeylElement, WeylIdx};
use crate::weyl_form::{covariant_partial, delta, delta_inv, fedosov_d, ConnectionData, WeylForm};

/// `Ω = ω + Σ_k ħ^k ω_k` with closed polynomial 2-forms `ω_k`, `k ≥ 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvaturePrescription {
    dim: usize,
    perturbations: Vec<(i32, ScalarFormSeries)>,
}

impl CurvaturePrescription {
    /// `Ω = ω`.
    pub fn unperturbed(dim: usize) -> Self {
        CurvaturePrescription { dim, perturbations: Vec::new() }
    }

    /// Each perturbation is a 2-form stored at ħ-order 0; it enters `Ω` multiplied by `ħ^k`.
    pub fn new(dim: usize, perturbations: Vec<(i32, ScalarFormSeries)>) -> Result<Self> {
        for (k, w) in &perturbations {
            if *k < 1 {
                return Err(Error::Invalid(format!("perturbation order must be >= 1, got {k}")));
            }
            if w.dim() != dim {
                return Err(Error::DimensionMismatch(w.dim(), dim));
            }
            if w.entries().any(|((h, m), _)| *h != 0 || m.degree() != 2) {
                return Err(Error::Invalid("perturbations must be 2-forms without hbar".into()));
            }
            if !d_exterior(w).is_zero() {
                return Err(Error::NotClosed);
            }
        }
        Ok(CurvaturePrescription { dim, perturbations })
    }

    pub fn perturbations(&self) -> &[(i32, ScalarFormSeries)] {
        &self.perturbations
    }

    /// `Ω − ω` as a form series.
    pub fn perturbation_series(&self) -> ScalarFormSeries {
        let mut out = ScalarFormSeries::zero(self.dim);
        for (k, w) in &self.perturbations {
            out = out.add(&w.shift_hbar(*k));
        }
        out
    }

    /// The full `Ω`.
    pub fn omega_series(&self, pm: &PoissonMatrix) -> Result<ScalarFormSeries> {
        let w0 = ScalarFormSeries::two_form_from_matrix(pm.require_omega()?, 0);
        Ok(w0.add(&self.perturbation_series()))
    }
}

/// A solved Fedosov connection `D = −δ + ∂ + (i/ħ)[γ,·]`.
#[derive(Clone, Debug)]
pub struct FedosovSetup {
    conn: ConnectionData,
    presc: CurvaturePrescription,
    trunc: Truncation,
    gamma: WeylForm,
}

impl FedosovSetup {
    pub fn new(conn: ConnectionData, presc: CurvaturePrescription, trunc: Truncation) -> Result<Self> {
        let gamma = solve_gamma(&conn, &presc, trunc)?;
        Ok(FedosovSetup { conn, presc, trunc, gamma })
    }

    pub fn conn(&self) -> &ConnectionData {
        &self.conn
    }

    pub fn poisson(&self) -> &PoissonMatrix {
        self.conn.poisson()
    }

    pub fn presc(&self) -> &CurvaturePrescription {
        &self.presc
    }

    pub fn trunc(&self) -> Truncation {
        self.trunc
    }

    pub fn dim(&self) -> usize {
        self.conn.dim()
    }

    pub fn gamma(&self) -> &WeylForm {
        &self.gamma
    }

    /// `Ω` as a form series.
    pub fn omega_series(&self) -> ScalarFormSeries {
        self.presc.omega_series(self.poisson()).expect("validated symplectic")
    }

    /// `ω` alone.
    pub fn symplectic_form(&self) -> ScalarFormSeries {
        ScalarFormSeries::two_form_from_matrix(self.poisson().omega().expect("validated symplectic"), 0)
    }

    /// `D(A)`.
    pub fn d(&self, a: &WeylForm) -> Result<WeylForm> {
        fedosov_d(a, &self.conn, &self.gamma)
    }

    /// Highest Weyl degree at which `D(·)` of a capped element is exact.
    pub fn reliable_weight(&self) -> i32 {
        self.trunc.degree_cap - 1
    }
}

/// Solve `δγ = Ω − ω + R + ∂γ + (i/ħ)γ²` with `δ⁻¹γ = 0`, one Weyl-degree slice at a time.
pub fn solve_gamma(conn: &ConnectionData, presc: &CurvaturePrescription, trunc: Truncation) -> Result<WeylForm> {
    let dim = conn.dim();
    let pm = conn.poisson();
    let source = WeylForm::from_scalar(&presc.perturbation_series(), trunc)?.add(&conn.curvature(trunc));
    let cap = trunc.degree_cap;
    let rhs = |g: &WeylForm| -> Result<WeylForm> {
        // (i/ħ)γ² = (i/2ħ)[γ,γ] for a 1-form
        let sq = g.i_over_hbar_commutator(g, pm)?.scale(&Scalar::from_ratio(1, 2));
        Ok(source.add(&covariant_partial(g, conn)).add(&sq))
    };
    let mut gamma = WeylForm::zero(dim, trunc);
    for w in 1..=cap {
        let slice = delta_inv(&rhs(&gamma.up_to_weight(w - 1))?.weight_slice(w - 1));
        gamma = gamma.add(&slice);
    }
    // the slices were built from lower ones only, so one more pass must reproduce γ
    if delta_inv(&rhs(&gamma)?).up_to_weight(cap) != gamma {
        return Err(Error::NonConvergence(cap));
    }
    Ok(gamma)
}

/// `Ω − (ω − R + δγ − ∂γ − (i/ħ)γ²)`, kept through the Weyl degrees where it is exact.
pub fn curvature_residual(setup: &FedosovSetup) -> Result<WeylForm> {
    let trunc = setup.trunc;
    let pm = setup.poisson();
    let g = &setup.gamma;
    let omega = WeylForm::from_scalar(&setup.omega_series(), trunc)?;
    let w0 = WeylForm::from_scalar(&setup.symplectic_form(), trunc)?;
    let sq = g.i_over_hbar_commutator(g, pm)?.scale(&Scalar::from_ratio(1, 2));
    let assembled = w0
        .sub(&setup.conn.curvature(trunc))
        .add(&delta(g))
        .sub(&covariant_partial(g, &setup.conn))
        .sub(&sq);
    Ok(omega.sub(&assembled).up_to_weight(setup.reliable_weight()))
}

/// The unique flat section `ũ` with `σ(ũ) = a`.
pub fn flat_section(a: &HbarSeries, setup: &FedosovSetup) -> Result<WeylElement> {
    let trunc = setup.trunc;
    let pm = setup.poisson();
    let mut u = WeylForm::from_element(WeylElement::from_series(a, trunc)?);
    for w in 1..=trunc.degree_cap {
        let low = u.up_to_weight(w - 1);
        let rhs = covariant_partial(&low, &setup.conn).add(&setup.gamma.i_over_hbar_commutator(&low, pm)?);
        u = u.add(&delta_inv(&rhs.weight_slice(w - 1)));
    }
    Ok(u.scalar_part())
}

/// Flat section of a polynomial.
pub fn flat_section_poly(a: &BasePoly, setup: &FedosovSetup) -> Result<WeylElement> {
    flat_section(&HbarSeries::from_poly(a.clone()), setup)
}

/// `a ∗ b = σ(ã ∗ b̃)`.
pub fn star(a: &HbarSeries, b: &HbarSeries, setup: &FedosovSetup) -> Result<HbarSeries> {
    let ua = flat_section(a, setup)?;
    let ub = flat_section(b, setup)?;
    let prec = a.prec().min(b.prec()).min(setup.trunc.max_central_order() + 1);
    Ok(ua.star_center(&ub, setup.poisson())?.truncate(prec))
}

/// `Ω/ħ`.
pub fn characteristic_class(setup: &FedosovSetup) -> ScalarFormSeries {
    setup.omega_series().shift_hbar(-1)
}

/// `D(D(u)) + (i/ħ)[Ω, u]` for a 0-form, which vanishes for an Abelian connection.
pub fn d_squared_residual(u: &WeylElement, setup: &FedosovSetup) -> Result<WeylForm> {
    let a = WeylForm::from_element(u.clone());
    let dd = setup.d(&setup.d(&a)?)?;
    let omega = WeylForm::from_scalar(&setup.omega_series(), setup.trunc)?;
    let bracket = omega.i_over_hbar_commutator(&a, setup.poisson())?;
    Ok(dd.add(&bracket).up_to_weight(setup.trunc.degree_cap - 2))
}

/// Residuals of the quantum exponential map axioms on monomials up to `max_deg`.
#[derive(Clone, Debug, Default)]
pub struct ExponentialCheck {
    /// `D(ã∗b̃)` nonzero for these monomial pairs.
    pub product_not_flat: Vec<(Monomial, Monomial)>,
    /// `σ(ã) ≠ a` for these monomials.
    pub section_not_inverse: Vec<Monomial>,
    /// `ã ≢ a + δ⁻¹(da)` modulo Weyl degree 2.
    pub first_order_mismatch: Vec<Monomial>,
}

impl ExponentialCheck {
    pub fn passed(&self) -> bool {
        self.product_not_flat.is_empty() && self.section_not_inverse.is_empty() && self.first_order_mismatch.is_empty()
    }
}

pub fn check_quantum_exponential(setup: &FedosovSetup, max_deg: u32) -> Result<ExponentialCheck> {
    let dim = setup.dim();
    let trunc = setup.trunc;
    let monos = Monomial::all_up_to(dim, max_deg);
    let mut sections = Vec::new();
    let mut report = ExponentialCheck::default();
    for m in &monos {
        let a = BasePoly::monomial(dim, *m, Scalar::one());
        let u = flat_section_poly(&a, setup)?;
        if u.center() != HbarSeries::from_poly(a.clone()).truncate(trunc.max_central_order() + 1) {
            report.section_not_inverse.push(*m);
        }
        // a + δ⁻¹(da): the y-linear Taylor term
        let mut first = WeylElement::from_poly(a.clone(), trunc);
        for i in 0..dim {
            let mut t = WeylElement::zero(dim, trunc);
            t.add_term(WeylIdx::new(0, Monomial::var(i)), &a.diff(i))?;
            first = first.add(&t);
        }
        if u.up_to_weight(1) != first {
            report.first_order_mismatch.push(*m);
        }
        sections.push(u);
    }
    for (i, ua) in sections.iter().enumerate() {
        for (j, ub) in sections.iter().enumerate() {
            let p = WeylForm::from_element(ua.star(ub, setup.poisson())?);
            if !setup.d(&p)?.up_to_weight(setup.reliable_weight()).is_zero() {
                report.product_not_flat.push((monos[i], monos[j]));
            }
        }
    }
    Ok(report)
}

/// The constant 1-form `ω_ij y^i dx^j` as a Weyl form.
pub fn symplectic_potential(pm: &PoissonMatrix, trunc: Truncation) -> Result<WeylForm> {
    let omega = pm.require_omega()?;
    let n = pm.dim();
    let mut out = WeylForm::zero(n, trunc);
    for (i, row) in omega.iter().enumerate() {
        for (j, w) in row.iter().enumerate() {
            if !w.is_zero() {
                let y = WeylElement::monomial(n, trunc, 0, Monomial::var(i), w.clone());
                out = out.add(&WeylForm::component(DxMask::single(j), y));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moyal_setup(dim: usize, cap: i32) -> FedosovSetup {
        let pm = PoissonMatrix::canonical(dim).unwrap();
        let conn = ConnectionData::flat(pm).unwrap();
        FedosovSetup::new(conn, CurvaturePrescription::unperturbed(dim), Truncation::new(cap, -2).unwrap()).unwrap()
    }

    #[test]
    fn flat_gamma_vanishes() {
        let s = moyal_setup(2, 8);
        assert!(s.gamma().is_zero());
        assert!(curvature_residual(&s).unwrap().is_zero());
    }

    #[test]
    fn flat_section_is_taylor_expansion() {
        let s = moyal_setup(2, 8);
        let t = s.trunc();
        let x1x2 = &BasePoly::var(2, 0) * &BasePoly::var(2, 1);
        let u = flat_section_poly(&x1x2, &s).unwrap();
        let mut want = WeylElement::from_poly(x1x2, t);
        for (y, p) in [(Monomial::var(0), BasePoly::var(2, 1)), (Monomial::var(1), BasePoly::var(2, 0))] {
            let mut e = WeylElement::zero(2, t);
            e.add_term(WeylIdx::new(0, y), &p).unwrap();
            want = want.add(&e);
        }
        want = want.add(&WeylElement::monomial(2, t, 0, Monomial::from_exponents(&[1, 1]), Scalar::one()));
        assert_eq!(u, want);
        let c = flat_section_poly(&BasePoly::constant(2, Scalar::from_int(7)), &s).unwrap();
        assert_eq!(c, WeylElement::from_poly(BasePoly::constant(2, Scalar::from_int(7)), t));
    }

    #[test]
    fn flat_star_commutator_is_poisson_bracket() {
        let s = moyal_setup(2, 8);
        let q = HbarSeries::from_poly(BasePoly::var(2, 0));
        let p = HbarSeries::from_poly(BasePoly::var(2, 1));
        let qp = star(&q, &p, &s).unwrap();
        let pq = star(&p, &q, &s).unwrap();
        // {q,p} = π^{12} = −1, so [q,p] = −iħ·(−1) = iħ
        let want = HbarSeries::term(1, BasePoly::constant(2, Scalar::i())).truncate(qp.prec());
        assert_eq!(qp.sub(&pq), want);
    }

    #[test]
    fn quantum_exponential_axioms_flat() {
        let s = moyal_setup(2, 6);
        assert!(check_quantum_exponential(&s, 2).unwrap().passed());
    }
}
