//! Named verification suites, each a list of residual checks.

use std::fmt;
use std::str::FromStr;

use serde_json::{json, Value};

use crate::builtin::ExampleSpec;
use crate::cohomology::liouville_obstruction;
use crate::connection::{check_quantum_exponential, curvature_residual, flat_section_poly, FedosovSetup};
use crate::error::{Error, Result};
use crate::hochschild::{
    coboundary, derivative_cocycle, eval_coboundary, liouville_check, liouville_constant, residual_terms,
    search_liouville, trivialize_on_flat, Cochain, ResidualTerm, SearchBounds,
};
use crate::pipeline::{derivative_class_image, h_equals_rho_failures, verify_commutator_lemmas, verify_dk0};
use crate::poly::{render_monomial, BasePoly, Monomial};
use crate::random;
use crate::report::{
    cochain_json, evaluation_residuals, form_json, scalar_str, weyl_form_residuals, CheckReport, ResidualEntry,
    SuiteReport,
};
use crate::scalar::Scalar;
use crate::series::HbarSeries;
use crate::star_table::{extract_table, gauge_report, StarProductTable};
use crate::weyl_form::WeylForm;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Fedosov,
    Hochschild,
    Dk0,
    Liouville,
    Lemmas,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 6] = ["fedosov", "hochschild", "dk0", "liouville", "lemmas", "all"];

    fn parts(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![Suite::Fedosov, Suite::Hochschild, Suite::Dk0, Suite::Liouville, Suite::Lemmas],
            s => vec![s],
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Fedosov => "fedosov",
            Suite::Hochschild => "hochschild",
            Suite::Dk0 => "dk0",
            Suite::Liouville => "liouville",
            Suite::Lemmas => "lemmas",
            Suite::All => "all",
        })
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "fedosov" => Suite::Fedosov,
            "hochschild" => Suite::Hochschild,
            "dk0" => Suite::Dk0,
            "liouville" => Suite::Liouville,
            "lemmas" => Suite::Lemmas,
            "all" => Suite::All,
            _ => return Err(Error::Invalid(format!("unknown suite {s:?}; expected one of {:?}", Suite::NAMES))),
        })
    }
}

/// Sizes used by the suites.
#[derive(Clone, Debug)]
pub struct VerifyParams {
    /// Star order `N` of the extracted table.
    pub order: usize,
    pub test_degree: u32,
    pub seed: u64,
    /// Random forms per commutator identity.
    pub lemma_samples: usize,
    /// Random 1-cochains for `b∘b`.
    pub cochain_samples: usize,
}

impl VerifyParams {
    pub fn new(order: usize, test_degree: u32, seed: u64) -> Self {
        VerifyParams { order, test_degree, seed, lemma_samples: 20, cochain_samples: 3 }
    }
}

/// Everything a suite run needs, built once.
pub struct Context<'a> {
    pub spec: &'a ExampleSpec,
    pub setup: FedosovSetup,
    pub table: StarProductTable,
    pub params: VerifyParams,
}

impl<'a> Context<'a> {
    pub fn new(spec: &'a ExampleSpec, params: VerifyParams) -> Result<Self> {
        let setup = spec.setup()?;
        let table = extract_table(&setup, params.order, params.order as u32)?;
        Ok(Context { spec, setup, table, params })
    }

    fn monomials(&self) -> Vec<BasePoly> {
        let dim = self.setup.dim();
        Monomial::all_up_to(dim, self.params.test_degree)
            .into_iter()
            .map(|m| BasePoly::monomial(dim, m, Scalar::one()))
            .collect()
    }
}

pub fn run(ctx: &Context, suite: Suite) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    for part in suite.parts() {
        checks.extend(match part {
            Suite::Fedosov => fedosov_checks(ctx)?,
            Suite::Hochschild => hochschild_checks(ctx)?,
            Suite::Dk0 => dk0_checks(ctx)?,
            Suite::Liouville => liouville_checks(ctx)?,
            Suite::Lemmas => lemma_checks(ctx)?,
            Suite::All => unreachable!(),
        });
    }
    Ok(SuiteReport {
        example: ctx.spec.name.clone(),
        suite: suite.to_string(),
        seed: ctx.params.seed,
        degree_cap: ctx.setup.trunc().degree_cap,
        order: ctx.params.order,
        test_degree: ctx.params.test_degree,
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

fn reliable_hbar(setup: &FedosovSetup) -> i32 {
    setup.reliable_weight().div_euclid(2)
}

pub fn fedosov_checks(ctx: &Context) -> Result<Vec<CheckReport>> {
    let setup = &ctx.setup;
    let dim = setup.dim();
    let mut out = vec![CheckReport::from_residuals(
        "curvature",
        reliable_hbar(setup),
        weyl_form_residuals(&curvature_residual(setup)?),
    )];

    let mut flat = Vec::new();
    for m in Monomial::all_up_to(dim, ctx.params.test_degree) {
        let u = flat_section_poly(&BasePoly::monomial(dim, m, Scalar::one()), setup)?;
        let du = setup.d(&WeylForm::from_element(u))?.up_to_weight(setup.reliable_weight());
        for mut r in weyl_form_residuals(&du) {
            r.at = format!("D(~{}) at {}", render_monomial(&m, dim, "x"), r.at);
            flat.push(r);
        }
    }
    let exp = check_quantum_exponential(setup, ctx.params.test_degree)?;
    out.push(
        CheckReport::from_residuals("flat_sections", reliable_hbar(setup), flat)
            .detail("symbol_mismatches", json!(exp.section_not_inverse.len()))
            .detail("first_order_mismatches", json!(exp.first_order_mismatch.len()))
            .detail("products_not_flat", json!(exp.product_not_flat.len()))
            .require(exp.passed()),
    );

    let n = ctx.params.order as i32;
    let monos = ctx.monomials();
    let mut assoc = Vec::new();
    for f in &monos {
        let fs = HbarSeries::from_poly(f.clone());
        for g in &monos {
            let fg = ctx.table.star_poly(f, g);
            for h in &monos {
                let hs = HbarSeries::from_poly(h.clone());
                let left = ctx.table.star(&fg, &hs);
                let right = ctx.table.star(&fs, &ctx.table.star_poly(g, h));
                let diff = left.sub(&right);
                assoc.extend(residual_terms(&[f.clone(), g.clone(), h.clone()], &diff, n));
            }
        }
    }
    let mut check = CheckReport::from_residuals("associativity", n, evaluation_residuals(&assoc));
    if setup.conn().is_flat() {
        if let Ok(g) = gauge_report(setup, &ctx.table) {
            check = check.detail("matches_moyal_of_inverse_curvature", json!(g.identical));
        }
    }
    out.push(check);
    Ok(out)
}

/// `b(c)` evaluated on all monomial triples, through `ħ^n`.
fn cocycle_residuals(c: &Cochain, s: &StarProductTable, monos: &[BasePoly], n: i32) -> Result<Vec<ResidualTerm>> {
    let mut out = Vec::new();
    for f in monos {
        for g in monos {
            for h in monos {
                let args: Vec<HbarSeries> = [f, g, h].iter().map(|p| HbarSeries::from_poly((*p).clone())).collect();
                let v = eval_coboundary(c, s, &args)?;
                if v.prec() <= n {
                    return Err(Error::InsufficientOrder(format!("b(c) known only below hbar^{}", v.prec())));
                }
                out.extend(residual_terms(&[f.clone(), g.clone(), h.clone()], &v, n));
            }
        }
    }
    Ok(out)
}

/// A seeded 1-cochain of derivative order `≤ 2` with ħ-orders `0..=1`.
pub fn random_cochain(rng: &mut rand_chacha::ChaCha8Rng, dim: usize) -> Cochain {
    use rand::Rng;
    let mut c = Cochain::exact(dim, 1);
    for _ in 0..4 {
        let l = rng.gen_range(0..=1);
        let d = random::monomial(rng, dim, 2);
        c.add_term(l, vec![d], &random::poly(rng, dim, 2, 2));
    }
    c
}

pub fn hochschild_checks(ctx: &Context) -> Result<Vec<CheckReport>> {
    let s = &ctx.table;
    let n = ctx.params.order as i32;
    let monos = ctx.monomials();
    let c = derivative_cocycle(s);
    // c is known below ħ^N, so b(c) = (i/ħ)b̃(c) is exact through ħ^{N−2}
    let closed = cocycle_residuals(&c, s, &monos, n - 2)?;
    let mut out = vec![CheckReport::from_residuals("derivative_cocycle_closed", n - 2, evaluation_residuals(&closed))];

    // b(b(G)) = 0 through ħ^{N−2}; b(G) is composed symbolically, the outer b evaluated
    let mut rng = random::rng(ctx.params.seed);
    let mut squared = Vec::new();
    let mut routes = Vec::new();
    for _ in 0..ctx.params.cochain_samples {
        let g = random_cochain(&mut rng, s.dim());
        let bg = coboundary(&g, s, n - 1)?;
        squared.extend(cocycle_residuals(&bg, s, &monos, n - 2)?);
        for f in &monos {
            for h in &monos {
                let args = [HbarSeries::from_poly(f.clone()), HbarSeries::from_poly(h.clone())];
                let diff = bg.apply(&args)?.sub(&eval_coboundary(&g, s, &args)?);
                routes.extend(residual_terms(&[f.clone(), h.clone()], &diff, n - 1));
            }
        }
    }
    out.push(CheckReport::from_residuals("coboundary_squared", n - 2, evaluation_residuals(&squared)));
    out.push(CheckReport::from_residuals("coboundary_routes_agree", n - 1, evaluation_residuals(&routes)));
    Ok(out)
}

pub fn dk0_checks(ctx: &Context) -> Result<Vec<CheckReport>> {
    let setup = &ctx.setup;
    let r = verify_dk0(setup)?;
    let image = derivative_class_image(setup).truncate_above(r.max_hbar_order);
    let mut check = CheckReport::from_residuals("dk0_identity", r.max_hbar_order, weyl_form_residuals(&r.residual))
        .detail("dk0", form_json(&r.dk0))
        .detail("expected", form_json(&r.expected))
        .detail("class_derivative_image", form_json(&image))
        .detail("matches_class_derivative_image", json!(r.dk0 == image));
    check = check.require(r.passed() && r.dk0 == image);
    let dim = setup.dim();
    let bad: Vec<ResidualEntry> = h_equals_rho_failures(setup, ctx.params.test_degree)?
        .into_iter()
        .map(|m| ResidualEntry { hbar_order: 0, at: render_monomial(&m, dim, "x"), value: "H != rho".into() })
        .collect();
    Ok(vec![check, CheckReport::from_residuals("h_equals_rho", reliable_hbar(setup), bad)])
}

pub fn liouville_checks(ctx: &Context) -> Result<Vec<CheckReport>> {
    let spec = ctx.spec;
    let s = &ctx.table;
    let n = ctx.params.order as i32;
    let obstruction = liouville_obstruction(&ctx.setup, &spec.decl)?;
    let coords: serde_json::Map<String, Value> = obstruction
        .coordinates
        .iter()
        .map(|(k, cs)| {
            let named: serde_json::Map<String, Value> =
                obstruction.names.iter().zip(cs).map(|(nm, c)| (nm.clone(), json!(scalar_str(c)))).collect();
            (k.to_string(), Value::Object(named))
        })
        .collect();
    let obstruction_entries: Vec<ResidualEntry> = obstruction
        .coordinates
        .iter()
        .flat_map(|(k, cs)| {
            obstruction.names.iter().zip(cs).filter(|(_, c)| !c.is_zero()).map(move |(nm, c)| ResidualEntry {
                hbar_order: *k,
                at: nm.clone(),
                value: scalar_str(c),
            })
        })
        .collect();
    let mut out = vec![CheckReport::from_residuals("liouville_obstruction", n, obstruction_entries)
        .detail("coordinates", Value::Object(coords))];

    let mut exhibited: Option<(String, Cochain)> = None;
    if let Some(x) = &spec.liouville {
        let res = liouville_check(x, s, ctx.params.test_degree, n)?;
        let lambda = liouville_constant(x, s, ctx.params.test_degree, n - 1)?;
        let check = CheckReport::from_residuals("liouville_candidate", n, evaluation_residuals(&res))
            .detail("candidate", cochain_json(x))
            .detail("cocycle_over_coboundary", lambda.as_ref().map_or(Value::Null, |l| json!(scalar_str(l))));
        if check.passed {
            exhibited = Some(("candidate".into(), x.clone()));
        }
        out.push(check);
    }
    let periodic = spec.decl.periodic_coordinates();
    if exhibited.is_none() && periodic.is_empty() {
        // contractible chart: ħ∂ħ + iH with b(H) = c
        if let Ok((h, _)) = trivialize_on_flat(&derivative_cocycle(s), s, ctx.setup.poisson(), n - 1) {
            let x = h.scale(&Scalar::i());
            if liouville_check(&x, s, ctx.params.test_degree, n - 1)?.is_empty() {
                exhibited = Some(("trivializer".into(), x));
            }
        }
    }
    if exhibited.is_none() {
        let bounds = SearchBounds { hbar_order: n.min(3), ..SearchBounds::default() };
        if let Some(x) = search_liouville(s, &periodic, &bounds)? {
            exhibited = Some(("search".into(), x));
        }
    }
    let check = CheckReport::from_residuals("liouville_existence", n, Vec::new())
        .detail("method", exhibited.as_ref().map_or(Value::Null, |(m, _)| json!(m)))
        .detail("operator", exhibited.as_ref().map_or(Value::Null, |(_, x)| cochain_json(x)))
        .detail("periodic_coordinates", json!(periodic))
        .require(exhibited.is_some());
    out.push(check);
    Ok(out)
}

pub fn lemma_checks(ctx: &Context) -> Result<Vec<CheckReport>> {
    let r = verify_commutator_lemmas(&ctx.setup, ctx.params.lemma_samples, ctx.params.seed)?;
    let mut entries = Vec::new();
    for f in &r.failures {
        for mut e in weyl_form_residuals(&f.residual) {
            e.at = format!("{} sample {} at {}", f.lemma, f.sample, e.at);
            entries.push(e);
        }
    }
    Ok(vec![CheckReport::from_residuals("commutator_lemmas", r.compared_through.div_euclid(2), entries)
        .detail("samples", json!(r.samples))
        .detail("compared_through_weyl_degree", json!(r.compared_through))])
}
