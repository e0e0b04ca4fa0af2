//! On a contractible chart the derivative cocycle is a coboundary: build H with
//! b(H) = c order by order.

use fedosov::builtin::builtin;
use fedosov::hochschild::{derivative_cocycle, eval_coboundary, trivialize_on_flat};
use fedosov::poly::BasePoly;
use fedosov::series::HbarSeries;
use fedosov::star_table::extract_table;

fn main() -> fedosov::Result<()> {
    let setup = builtin("moyal_r2")?.setup()?;
    let s = extract_table(&setup, 5, 5)?;
    let c = derivative_cocycle(&s);
    let (h, steps) = trivialize_on_flat(&c, &s, setup.poisson(), 3)?;
    for st in &steps {
        println!("hbar^{}: bivector ratio {}", st.hbar_order, st.kappa.as_ref().map_or("-".into(), |k| k.to_string()));
    }
    println!("H = {}", h.render());

    let f = HbarSeries::from_poly(&BasePoly::var(2, 0) * &BasePoly::var(2, 0));
    let g = HbarSeries::from_poly(BasePoly::var(2, 1));
    let diff = eval_coboundary(&h, &s, &[f.clone(), g.clone()])?.sub(&c.apply(&[f, g])?);
    println!("b(H) - c on (q^2, p): {}", diff.render());
    Ok(())
}
