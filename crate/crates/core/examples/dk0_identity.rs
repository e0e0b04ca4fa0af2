//! D(K₀) = i(Ω − ħ dΩ/dħ) for every builtin, next to the image −iħ² d/dħ(Ω/ħ).

use fedosov::builtin::{builtin, BUILTIN_NAMES};
use fedosov::pipeline::{derivative_class_image, verify_dk0};

fn main() -> fedosov::Result<()> {
    for name in BUILTIN_NAMES {
        let setup = builtin(name)?.setup()?;
        let r = verify_dk0(&setup)?;
        let image = derivative_class_image(&setup).truncate_above(r.max_hbar_order);
        println!("{name:16} passed={} DK0 = {}   matches class image: {}", r.passed(), r.dk0.render(), r.dk0 == image);
    }
    Ok(())
}
