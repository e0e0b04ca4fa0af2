//! The chain from flat sections to `H`, `K₀` and `D(K₀)`, plus the commutator
//! identities of `D` with `E` and `∂/∂ħ`.

use crate::error::Result;
use crate::connection::{flat_section_poly, symplectic_potential, FedosovSetup};
use crate::forms::ScalarFormSeries;
use crate::poly::{BasePoly, Monomial};
use crate::random;
use crate::scalar::Scalar;
use crate::weyl::WeylElement;
use crate::weyl_form::{covariant_partial, delta, delta_inv, WeylForm};

/// The solution `v` of `D(v) = D(ρ(ũ))` with `v|_{y=0} = 0`, built by the same
/// slice recursion as flat sections.
pub fn build_h(setup: &FedosovSetup, u: &WeylElement) -> Result<WeylElement> {
    let pm = setup.poisson();
    let trunc = setup.trunc();
    let source = setup.d(&WeylForm::from_element(u.rho()))?;
    let mut v = WeylForm::zero(setup.dim(), trunc);
    for w in 1..=trunc.degree_cap {
        let low = v.up_to_weight(w - 1);
        let rhs = covariant_partial(&low, setup.conn())
            .add(&setup.gamma().i_over_hbar_commutator(&low, pm)?)
            .sub(&source);
        v = v.add(&delta_inv(&rhs.weight_slice(w - 1)));
    }
    Ok(v.scalar_part())
}

/// Monomials `a` of degree `≤ max_deg` for which `H(ã) ≠ ρ(ã)`.
pub fn h_equals_rho_failures(setup: &FedosovSetup, max_deg: u32) -> Result<Vec<Monomial>> {
    let dim = setup.dim();
    let mut bad = Vec::new();
    for m in Monomial::all_up_to(dim, max_deg) {
        let u = flat_section_poly(&BasePoly::monomial(dim, m, Scalar::one()), setup)?;
        if build_h(setup, &u)? != u.rho() {
            bad.push(m);
        }
    }
    Ok(bad)
}

/// `K₀ = −(Eγ − iħγ̇ + iγ + (i/2)ω_ij y^i dx^j)`.
pub fn compute_k0(setup: &FedosovSetup) -> Result<WeylForm> {
    let g = setup.gamma();
    let i = Scalar::i();
    let potential = symplectic_potential(setup.poisson(), setup.trunc())?;
    let inner = g
        .euler()
        .sub(&g.hbar_euler().scale(&i))
        .add(&g.scale(&i))
        .add(&potential.scale(&Scalar::gaussian(0, 1, 1, 2)));
    Ok(inner.neg())
}

/// Outcome of comparing `D(K₀)` with `i(Ω − ħΩ̇)`.
#[derive(Clone, Debug)]
pub struct Dk0Report {
    /// `D(K₀) − i(Ω − ħΩ̇)` through the reliable Weyl degree.
    pub residual: WeylForm,
    /// The central part of `D(K₀)` through `max_hbar_order`.
    pub dk0: ScalarFormSeries,
    /// `i(Ω − ħΩ̇)` through `max_hbar_order`.
    pub expected: ScalarFormSeries,
    pub max_hbar_order: i32,
}

impl Dk0Report {
    pub fn passed(&self) -> bool {
        self.residual.is_zero() && self.dk0 == self.expected
    }
}

pub fn verify_dk0(setup: &FedosovSetup) -> Result<Dk0Report> {
    let trunc = setup.trunc();
    let reliable = setup.reliable_weight();
    let max_hbar_order = reliable.div_euclid(2);
    let dk0 = setup.d(&compute_k0(setup)?)?.up_to_weight(reliable);
    let omega = setup.omega_series();
    let expected = omega.sub(&omega.hbar_derivative().shift_hbar(1)).scale(&Scalar::i()).truncate_above(max_hbar_order);
    let residual = dk0.sub(&WeylForm::from_scalar(&expected, trunc)?).up_to_weight(reliable);
    let mut central = ScalarFormSeries::zero(setup.dim());
    for (m, a) in dk0.entries() {
        for (k, p) in a.terms() {
            if k.y.is_one() && k.hbar <= max_hbar_order {
                central.add_entry(k.hbar, *m, p);
            }
        }
    }
    Ok(Dk0Report { residual, dk0: central, expected, max_hbar_order })
}

/// `−iħ² d/dħ(Ω/ħ)`, the form the derivative cocycle is sent to.
pub fn derivative_class_image(setup: &FedosovSetup) -> ScalarFormSeries {
    let cl = setup.omega_series().shift_hbar(-1);
    cl.hbar_derivative().shift_hbar(2).scale(&Scalar::gaussian(0, 1, -1, 1))
}

/// Names of the four commutator identities, in report order.
pub const LEMMAS: [&str; 4] = ["partial_euler", "delta_euler", "d_hbar_derivative", "d_euler"];

/// Nonzero residual of one identity on one sample.
#[derive(Clone, Debug)]
pub struct LemmaFailure {
    pub lemma: &'static str,
    pub sample: usize,
    pub residual: WeylForm,
}

#[derive(Clone, Debug)]
pub struct LemmaReport {
    pub samples: usize,
    /// Weyl degree through which residuals are compared.
    pub compared_through: i32,
    pub failures: Vec<LemmaFailure>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// `c₁(γ,a) − (−1)^{|a|} c₁(a,γ)`.
fn c1_bracket(g: &WeylForm, a: &WeylForm, setup: &FedosovSetup) -> Result<WeylForm> {
    let pm = setup.poisson();
    let odd = a.form_degree().unwrap_or(0) % 2 == 1;
    let left = g.star_hbar_derivative(a, pm)?;
    let right = a.star_hbar_derivative(g, pm)?;
    Ok(if odd { left.add(&right) } else { left.sub(&right) })
}

/// Residuals of each commutator identity on one form `a`, compared through Weyl degree `through`.
pub fn lemma_residuals(setup: &FedosovSetup, a: &WeylForm, through: i32) -> Result<[WeylForm; 4]> {
    let pm = setup.poisson();
    let conn = setup.conn();
    let g = setup.gamma();
    let i = Scalar::i();
    let half_i = Scalar::gaussian(0, 1, 1, 2);

    let partial_euler = covariant_partial(&a.euler(), conn).sub(&covariant_partial(a, conn).euler());

    let delta_euler = delta(&a.euler()).sub(&delta(a).euler()).add(&delta(a).scale(&half_i));

    let da = setup.d(a)?;
    let g_over_hbar_dot = g.shift_hbar(-1)?.hbar_derivative()?.scale(&i);
    let lhs = setup.d(&a.hbar_derivative()?)?.sub(&da.hbar_derivative()?);
    let rhs = g_over_hbar_dot
        .graded_commutator(a, pm)?
        .neg()
        .sub(&c1_bracket(g, a, setup)?.shift_hbar(-1)?.scale(&i));
    let d_hbar = lhs.sub(&rhs);

    let lhs = setup.d(&a.euler())?.sub(&da.euler());
    let rhs = delta(a)
        .scale(&half_i)
        .sub(&g.euler().i_over_hbar_commutator(a, pm)?)
        .add(&c1_bracket(g, a, setup)?);
    let d_euler = lhs.sub(&rhs);

    Ok([partial_euler, delta_euler, d_hbar, d_euler].map(|r| r.up_to_weight(through)))
}

/// Check the identities on `samples` seeded random forms of Weyl degree `≤ 4`.
pub fn verify_commutator_lemmas(setup: &FedosovSetup, samples: usize, seed: u64) -> Result<LemmaReport> {
    let trunc = setup.trunc();
    let through = trunc.degree_cap - 4;
    let mut rng = random::rng(seed);
    let mut failures = Vec::new();
    for s in 0..samples {
        let a = random::weyl_form(&mut rng, setup.dim(), trunc, 4, 2);
        for (lemma, r) in LEMMAS.iter().zip(lemma_residuals(setup, &a, through)?) {
            if !r.is_zero() {
                failures.push(LemmaFailure { lemma, sample: s, residual: r });
            }
        }
    }
    Ok(LemmaReport { samples, compared_through: through, failures })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin::builtin;
    use crate::series::HbarSeries;
    use crate::weyl::{euler_coboundary, Truncation};

    fn setup(name: &str, cap: i32) -> FedosovSetup {
        builtin(name).unwrap().with_truncation(Truncation::new(cap, -2).unwrap()).setup().unwrap()
    }

    #[test]
    fn h_on_flat_moyal_coordinate() {
        let s = setup("moyal_r2", 8);
        let u = flat_section_poly(&BasePoly::var(2, 0), &s).unwrap();
        let v = build_h(&s, &u).unwrap();
        let want = WeylElement::monomial(2, s.trunc(), 0, Monomial::var(0), Scalar::gaussian(0, 1, -1, 2));
        assert_eq!(v, want);
        let one = flat_section_poly(&BasePoly::one(2), &s).unwrap();
        assert!(build_h(&s, &one).unwrap().is_zero());
    }

    #[test]
    fn h_with_hbar_dependent_symbol() {
        let s = setup("curved_toy", 8);
        let a = HbarSeries::term(1, BasePoly::var(2, 0));
        let u = crate::connection::flat_section(&a, &s).unwrap();
        let v = build_h(&s, &u).unwrap();
        assert!(v.center().is_zero());
        let lhs = s.d(&WeylForm::from_element(v)).unwrap();
        let rhs = s.d(&WeylForm::from_element(u.rho())).unwrap();
        assert_eq!(lhs.up_to_weight(7), rhs.up_to_weight(7));
    }

    #[test]
    fn h_equals_rho_for_hbar_free_symbols() {
        for name in ["moyal_r2", "curved_toy"] {
            assert!(h_equals_rho_failures(&setup(name, 8), 3).unwrap().is_empty(), "{name}");
        }
    }

    #[test]
    fn flat_k0() {
        let s = setup("moyal_r2", 6);
        let k0 = compute_k0(&s).unwrap();
        let want = symplectic_potential(s.poisson(), s.trunc()).unwrap().scale(&Scalar::gaussian(0, 1, -1, 2));
        assert_eq!(k0, want);
        let r = verify_dk0(&s).unwrap();
        assert!(r.passed(), "{:?}", r.residual);
        assert_eq!(r.dk0, s.symplectic_form().scale(&Scalar::i()));
        assert_eq!(derivative_class_image(&s), r.expected);
    }

    #[test]
    fn fiber_hbar_derivative_is_euler_coboundary() {
        let s = setup("moyal_r2", 8);
        let mut rng = random::rng(7);
        for _ in 0..10 {
            let a = random::weyl_element(&mut rng, 2, s.trunc(), 3, 3);
            let b = random::weyl_element(&mut rng, 2, s.trunc(), 3, 3);
            let c1 = a.star_hbar_derivative(&b, s.poisson()).unwrap();
            let be = euler_coboundary(&a, &b, s.poisson()).unwrap();
            assert_eq!(c1.up_to_weight(6), be.up_to_weight(6));
        }
    }

    #[test]
    fn lemmas_on_flat_and_curved() {
        for name in ["moyal_r2", "curved_toy"] {
            let r = verify_commutator_lemmas(&setup(name, 8), 4, 1).unwrap();
            assert!(r.passed(), "{name}: {:?}", r.failures.first());
        }
    }
}
