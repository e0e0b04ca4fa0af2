//! Extract the star-product of the torus chart as bidifferential operators and
//! compare it with the Moyal product of the inverted ħ-dependent form.

use fedosov::builtin::builtin;
use fedosov::report::table_json;
use fedosov::star_table::{extract_table, gauge_report};

fn main() -> fedosov::Result<()> {
    let setup = builtin("torus_h_omega1")?.setup()?;
    let table = extract_table(&setup, 2, 2)?;
    for (k, op) in table.ops().iter().enumerate() {
        println!("C_{k}: {} terms", op.len());
    }
    let g = gauge_report(&setup, &table)?;
    println!("term-identical to Moyal of (w0 + hbar w1)^-1 per order: {:?}", g.identical);
    println!("{}", serde_json::to_string(&table_json(&table.truncated(1))).expect("json"));
    Ok(())
}
