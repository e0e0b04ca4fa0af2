//! Command-line front end. Every command prints JSON; `verify` also encodes the
//! outcome in the exit status.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::builtin::BUILTIN_NAMES;
use crate::cohomology::{class_derivative, project_class};
use crate::config::RunConfig;
use crate::connection::characteristic_class;
use crate::error::{Error, Result};
use crate::report::{form_json, scalar_str, table_json, to_json_string};
use crate::star_table::{extract_table, gauge_report};
use crate::verify::{self, Context, Suite, VerifyParams};

#[derive(Parser, Debug)]
#[command(name = "fedosov", version, about = "Exact Fedosov star-products and their Hochschild checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Emit the star-product table C[0..N].
    Star(RunArgs),
    /// Run residual suites; exits nonzero if any residual is nonzero.
    Verify(RunArgs),
    /// Emit the characteristic class, its ħ-derivative and their projections.
    Class(RunArgs),
    /// List the builtin examples.
    Examples,
    /// Dump a builtin as an inline config.
    EmitConfig(RunArgs),
}

#[derive(Args, Debug, Default, Clone)]
pub struct RunArgs {
    #[arg(long)]
    pub example: Option<String>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long = "degree-cap")]
    pub degree_cap: Option<i32>,
    #[arg(long = "laurent-floor", allow_hyphen_values = true)]
    pub laurent_floor: Option<i32>,
    #[arg(long = "test-degree")]
    pub test_degree: Option<u32>,
    #[arg(long, default_value = "all")]
    pub suite: String,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl RunArgs {
    /// The config file (or builtin name) with command-line overrides applied.
    pub fn load(&self) -> Result<RunConfig> {
        let mut cfg = match (&self.config, &self.example) {
            (Some(path), None) => RunConfig::from_json(&std::fs::read_to_string(path)?)?,
            (None, Some(name)) => RunConfig::for_example(name),
            _ => return Err(Error::Invalid("pass exactly one of --example and --config".into())),
        };
        if let Some(v) = self.order {
            cfg.order = v;
        }
        if let Some(v) = self.degree_cap {
            cfg.degree_cap = v;
        }
        if let Some(v) = self.laurent_floor {
            cfg.laurent_floor = v;
        }
        if let Some(v) = self.test_degree {
            cfg.test_degree = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(p) = &self.out {
            cfg.out = Some(p.display().to_string());
        }
        Ok(cfg)
    }
}

/// Output of a command: the JSON text and whether the run counts as a success.
pub struct Outcome {
    pub text: String,
    pub success: bool,
    pub out: Option<String>,
}

pub fn cmd_star(cfg: &RunConfig) -> Result<String> {
    let spec = cfg.resolve()?;
    let setup = spec.setup()?;
    let table = extract_table(&setup, cfg.order, cfg.order as u32)?;
    let mut v = json!({
        "example": spec.name,
        "coordinates": spec.coordinates,
        "degree_cap": cfg.degree_cap,
        "order": cfg.order,
        "table": table_json(&table),
    });
    if setup.conn().is_flat() {
        if let Ok(g) = gauge_report(&setup, &table) {
            v["matches_moyal_of_inverse_curvature"] = json!(g.identical);
        }
    }
    to_json_string(&v)
}

pub fn cmd_verify(cfg: &RunConfig, suite: Suite) -> Result<(String, bool)> {
    let spec = cfg.resolve()?;
    let ctx = Context::new(&spec, VerifyParams::new(cfg.order, cfg.test_degree, cfg.seed))?;
    let report = verify::run(&ctx, suite)?;
    Ok((to_json_string(&report)?, report.passed))
}

pub fn cmd_class(cfg: &RunConfig) -> Result<String> {
    let spec = cfg.resolve()?;
    let setup = spec.setup()?;
    let class = characteristic_class(&setup);
    let derivative = class_derivative(&setup);
    let projection = |w| -> Result<Value> {
        let p = project_class(w, &spec.decl)?;
        let coords: serde_json::Map<String, Value> = p
            .coordinates
            .iter()
            .map(|(k, cs)| {
                let named: serde_json::Map<String, Value> =
                    p.names.iter().zip(cs).map(|(n, c)| (n.clone(), json!(scalar_str(c)))).collect();
                (k.to_string(), Value::Object(named))
            })
            .collect();
        Ok(json!({ "coordinates": coords, "zero": p.is_zero() }))
    };
    let v = json!({
        "example": spec.name,
        "class": form_json(&class),
        "class_projection": projection(&class)?,
        "derivative": form_json(&derivative),
        "derivative_projection": projection(&derivative)?,
    });
    to_json_string(&v)
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let (text, success, out) = match &cli.command {
        Command::Examples => (BUILTIN_NAMES.join("\n") + "\n", true, None),
        Command::Star(a) => {
            let cfg = a.load()?;
            (cmd_star(&cfg)?, true, cfg.out)
        }
        Command::Class(a) => {
            let cfg = a.load()?;
            (cmd_class(&cfg)?, true, cfg.out)
        }
        Command::Verify(a) => {
            let cfg = a.load()?;
            let (text, ok) = cmd_verify(&cfg, a.suite.parse()?)?;
            (text, ok, cfg.out)
        }
        Command::EmitConfig(a) => {
            let name = a.example.as_deref().ok_or_else(|| Error::Invalid("emit-config needs --example".into()))?;
            let mut cfg = RunConfig::inline_builtin(name)?;
            let overrides = RunArgs { example: Some(name.into()), ..a.clone() }.load()?;
            cfg.degree_cap = overrides.degree_cap;
            cfg.laurent_floor = overrides.laurent_floor;
            cfg.order = overrides.order;
            cfg.test_degree = overrides.test_degree;
            cfg.seed = overrides.seed;
            (cfg.to_json()?, true, a.out.as_ref().map(|p| p.display().to_string()))
        }
    };
    Ok(Outcome { text, success, out })
}
