//! Moyal product on the plane: the table C_0..C_3 and the canonical commutator.

use fedosov::poly::BasePoly;
use fedosov::series::HbarSeries;
use fedosov::star_table::moyal_table;
use fedosov::weyl::PoissonMatrix;

fn main() -> fedosov::Result<()> {
    let pm = PoissonMatrix::canonical(2)?;
    let table = moyal_table(2, &[(0, pm.pi().clone())], 3);
    for (k, op) in table.ops().iter().enumerate() {
        println!("C_{k}: {} terms", op.len());
    }

    let q = BasePoly::var(2, 0);
    let p = BasePoly::var(2, 1);
    let qp = table.star_poly(&q, &p);
    let pq = table.star_poly(&p, &q);
    println!("q*p       = {}", qp.render());
    println!("q*p - p*q = {}", qp.sub(&pq).render());

    let q2 = &q * &q;
    let p2 = &p * &p;
    let lhs = table.star(&table.star_poly(&q2, &p2), &HbarSeries::from_poly(q.clone()));
    let rhs = table.star(&HbarSeries::from_poly(q2.clone()), &table.star_poly(&p2, &q));
    println!("(q^2*p^2)*q == q^2*(p^2*q): {}", lhs == rhs);
    Ok(())
}
