//! The derivative cocycle c(f,g) = d/dħ(f ∗ g) and the coboundary b on the plane.

use fedosov::builtin::builtin;
use fedosov::hochschild::{coboundary, derivative_cocycle, eval_coboundary, Cochain};
use fedosov::poly::BasePoly;
use fedosov::series::HbarSeries;
use fedosov::star_table::extract_table;

fn main() -> fedosov::Result<()> {
    let setup = builtin("moyal_r2")?.setup()?;
    let n = 4;
    let s = extract_table(&setup, n, n as u32)?;
    let c = derivative_cocycle(&s);
    println!("c = {}", c.render());

    let args: Vec<HbarSeries> = [BasePoly::var(2, 0), BasePoly::var(2, 1), &BasePoly::var(2, 0) * &BasePoly::var(2, 1)]
        .into_iter()
        .map(HbarSeries::from_poly)
        .collect();
    println!("b(c)(q, p, qp) = {}", eval_coboundary(&c, &s, &args)?.render());

    // b of the vector field q ∂q, composed symbolically, then b again
    let x = Cochain::vector_field(0, &[BasePoly::var(2, 0), BasePoly::zero(2)]);
    let bx = coboundary(&x, &s, n as i32 - 1)?;
    println!("b(q dq) = {}", bx.render());
    println!("b(b(q dq))(q, p, qp) = {}", eval_coboundary(&bx, &s, &args)?.render());
    Ok(())
}
