//! The quantum exponential map: flat sections of D and their symbols.

use fedosov::builtin::builtin;
use fedosov::connection::{flat_section_poly, star};
use fedosov::poly::BasePoly;
use fedosov::series::HbarSeries;
use fedosov::weyl::Truncation;
use fedosov::weyl_form::WeylForm;

fn main() -> fedosov::Result<()> {
    let setup = builtin("curved_toy")?.with_truncation(Truncation::new(6, -2)?).setup()?;
    let q = BasePoly::var(2, 0);
    let p = BasePoly::var(2, 1);
    let a = &q * &p;
    let u = flat_section_poly(&a, &setup)?;
    println!("~(qp) has {} terms", u.len());
    println!("sigma(~(qp)) = {}", u.center().render());
    let du = setup.d(&WeylForm::from_element(u))?.up_to_weight(setup.reliable_weight());
    println!("D(~(qp)) vanishes: {}", du.is_zero());

    let qp = star(&HbarSeries::from_poly(q.clone()), &HbarSeries::from_poly(p.clone()), &setup)?;
    let pq = star(&HbarSeries::from_poly(p), &HbarSeries::from_poly(q), &setup)?;
    println!("[q, p]_* = {}", qp.sub(&pq).render());
    Ok(())
}
