//! Seeded generators for randomized checks. Every caller passes its own
//! [`ChaCha8Rng`], so identical seeds give identical samples.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::forms::DxMask;
use crate::poly::{BasePoly, Monomial};
use crate::scalar::Scalar;
use crate::weyl::{Truncation, WeylElement, WeylIdx};
use crate::weyl_form::WeylForm;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A nonzero small Gaussian rational.
pub fn scalar(rng: &mut ChaCha8Rng) -> Scalar {
    loop {
        let re = rng.gen_range(-3..=3);
        let im = if rng.gen_bool(0.3) { rng.gen_range(-2..=2) } else { 0 };
        let den = rng.gen_range(1..=3);
        let s = Scalar::gaussian(re, den, im, 1);
        if !s.is_zero() {
            return s;
        }
    }
}

/// A uniformly chosen monomial of total degree at most `max_deg`.
pub fn monomial(rng: &mut ChaCha8Rng, dim: usize, max_deg: u32) -> Monomial {
    let deg = rng.gen_range(0..=max_deg);
    let mut e = vec![0u16; dim];
    for _ in 0..deg {
        e[rng.gen_range(0..dim)] += 1;
    }
    Monomial::from_exponents(&e)
}

/// A polynomial with up to `terms` terms of degree at most `max_deg`.
pub fn poly(rng: &mut ChaCha8Rng, dim: usize, max_deg: u32, terms: usize) -> BasePoly {
    let mut p = BasePoly::zero(dim);
    for _ in 0..terms {
        p.add_term(monomial(rng, dim, max_deg), &scalar(rng));
    }
    p
}

/// A Weyl element with terms of Weyl degree at most `max_weight`, ħ-orders `≥ 0`.
pub fn weyl_element(rng: &mut ChaCha8Rng, dim: usize, trunc: Truncation, max_weight: i32, terms: usize) -> WeylElement {
    let mut out = WeylElement::zero(dim, trunc);
    for _ in 0..terms {
        let w = rng.gen_range(0..=max_weight);
        let k = rng.gen_range(0..=w / 2);
        let y = {
            let d = (w - 2 * k) as u32;
            let mut e = vec![0u16; dim];
            for _ in 0..d {
                e[rng.gen_range(0..dim)] += 1;
            }
            Monomial::from_exponents(&e)
        };
        let c = poly(rng, dim, 2, 2);
        out.add_term(WeylIdx::new(k, y), &c).expect("non-negative ħ-order");
    }
    out
}

/// A Weyl form whose components have random form degree up to `max_form`.
pub fn weyl_form(rng: &mut ChaCha8Rng, dim: usize, trunc: Truncation, max_weight: i32, max_form: usize) -> WeylForm {
    let mut out = WeylForm::zero(dim, trunc);
    let q = rng.gen_range(0..=max_form.min(dim));
    let masks = DxMask::all_of_degree(dim, q);
    for _ in 0..2 {
        let m = masks[rng.gen_range(0..masks.len())];
        out.add_component(m, &weyl_element(rng, dim, trunc, max_weight, 3));
    }
    out
}
