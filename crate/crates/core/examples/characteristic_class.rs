//! The characteristic class Ω/ħ, its ħ-derivative, and their coordinates in
//! the declared cohomology basis.

use fedosov::builtin::builtin;
use fedosov::cohomology::{class_derivative, project_class};
use fedosov::connection::characteristic_class;

fn main() -> fedosov::Result<()> {
    for name in ["moyal_r2", "torus_h_omega1", "torus_h2_omega1"] {
        let spec = builtin(name)?;
        let setup = spec.setup()?;
        let cl = characteristic_class(&setup);
        let dcl = class_derivative(&setup);
        println!("{name}");
        println!("  cl        = {}", cl.render());
        println!("  d/dh cl   = {}", dcl.render());
        let p = project_class(&dcl, &spec.decl)?;
        println!("  [d/dh cl] = {:?} (zero: {})", p.coordinates, p.is_zero());
    }
    Ok(())
}
