//! Describe an example inline as JSON instead of naming a builtin, then run a
//! verification suite on it.

use fedosov::config::RunConfig;
use fedosov::verify::{self, Context, Suite, VerifyParams};

const CONFIG: &str = r#"{
  "spec": {
    "name": "plane_with_quadratic_symbol",
    "coordinates": ["q", "p"],
    "omega": [["0/1", "1/1"], ["-1/1", "0/1"]],
    "christoffel": [{ "index": [1, 1, 1], "poly": [["1/2", [1, 0]]] }]
  },
  "degree_cap": 8,
  "order": 3
}"#;

fn main() -> fedosov::Result<()> {
    let cfg = RunConfig::from_json(CONFIG)?;
    let spec = cfg.resolve()?;
    let ctx = Context::new(&spec, VerifyParams::new(cfg.order, 2, cfg.seed))?;
    let report = verify::run(&ctx, Suite::Fedosov)?;
    for c in &report.checks {
        println!("{:14} passed={} through hbar^{}", c.check, c.passed, c.max_hbar_order);
    }
    println!("canonical form:\n{}", cfg.to_json()?);
    Ok(())
}
