//! Solve for the Fedosov connection on the torus chart with Ω = ω₀ + ħ dθ₁∧dθ₂
//! and confirm the Weyl curvature.

use fedosov::builtin::builtin;
use fedosov::connection::curvature_residual;
use fedosov::weyl::Truncation;

fn main() -> fedosov::Result<()> {
    let spec = builtin("torus_h_omega1")?.with_truncation(Truncation::new(8, -2)?);
    let setup = spec.setup()?;
    println!("gamma            = {}", setup.gamma().render());
    println!("Omega            = {}", setup.omega_series().render());
    let r = curvature_residual(&setup)?;
    println!("curvature residual zero through Weyl degree {}: {}", setup.reliable_weight(), r.is_zero());

    let curved = builtin("curved_toy")?.with_truncation(Truncation::new(6, -2)?).setup()?;
    println!("curved_toy gamma = {}", curved.gamma().render());
    println!("curved_toy residual zero: {}", curvature_residual(&curved)?.is_zero());
    Ok(())
}
