//! Quantum Liouville operators on the torus charts: the fiber Euler field works
//! when ω₁ sits at ħ¹ and the class obstruction rules it out at ħ².

use fedosov::builtin::builtin;
use fedosov::cohomology::liouville_obstruction;
use fedosov::hochschild::{liouville_check, search_liouville, SearchBounds};
use fedosov::star_table::extract_table;

fn main() -> fedosov::Result<()> {
    for name in ["torus_h_omega1", "torus_h2_omega1"] {
        let spec = builtin(name)?;
        let setup = spec.setup()?;
        let ob = liouville_obstruction(&setup, &spec.decl)?;
        println!("{name}: obstruction coordinates {:?}", ob.coordinates);

        let s = extract_table(&setup, 4, 4)?;
        let x = spec.liouville.as_ref().expect("torus builtins carry a candidate");
        let residuals = liouville_check(x, &s, 2, 4)?;
        println!("  p.dp candidate: {} nonzero residual terms", residuals.len());

        let bounds = SearchBounds { hbar_order: 3, ..SearchBounds::default() };
        let found = search_liouville(&s, &spec.decl.periodic_coordinates(), &bounds)?;
        println!("  search with angles frozen: {}", found.map_or("none".into(), |x| x.render()));
    }
    Ok(())
}
