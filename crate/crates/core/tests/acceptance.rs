//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. Expected values come from oracles written here, not
//! from the library routines under test.

use std::process::Command;
use std::thread;

use fedosov::builtin::{builtin, ExampleSpec, BUILTIN_NAMES};
use fedosov::cohomology::liouville_obstruction;
use fedosov::connection::{curvature_residual, flat_section_poly, solve_gamma, star, FedosovSetup};
use fedosov::forms::{DxMask, ScalarFormSeries};
use fedosov::hochschild::{
    coboundary, derivative_cocycle, eval_coboundary, liouville_check, trivialize_on_flat, Cochain,
};
use fedosov::pipeline::{verify_commutator_lemmas, verify_dk0};
use fedosov::poly::{BasePoly, Monomial};
use fedosov::random;
use fedosov::series::HbarSeries;
use fedosov::star_table::{extract_table, StarProductTable};
use fedosov::verify::random_cochain;
use fedosov::weyl::{Truncation, WeylElement, WeylIdx};
use fedosov::weyl_form::{delta, covariant_partial, WeylForm};
use fedosov::Scalar;

type Outcome = Result<String, String>;

fn fail<T>(msg: impl Into<String>) -> Result<T, String> {
    Err(msg.into())
}

fn spec(name: &str) -> ExampleSpec {
    builtin(name).expect("builtin exists")
}

fn setup_of(name: &str, cap: i32) -> FedosovSetup {
    spec(name).with_truncation(Truncation::new(cap, -2).unwrap()).setup().expect("setup builds")
}

fn monomials(dim: usize, max_deg: u32) -> Vec<BasePoly> {
    Monomial::all_up_to(dim, max_deg).into_iter().map(|m| BasePoly::monomial(dim, m, Scalar::one())).collect()
}

/// Err if any coefficient through `ħ^n` is nonzero or the series is not known that far.
fn zero_through(s: &HbarSeries, n: i32, what: &dyn Fn() -> String) -> Result<(), String> {
    if s.prec() <= n {
        return fail(format!("{}: only known below hbar^{}", what(), s.prec()));
    }
    for (k, p) in s.coeffs() {
        if *k <= n && !p.is_zero() {
            return fail(format!("{}: hbar^{} coefficient {}", what(), k, p.render()));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- oracles

/// `π = ω⁻¹` for the Darboux form `ω = Σ dx^i ∧ dx^{n+i}`: the block matrix
/// `[[0, −I], [I, 0]]`.
fn darboux_pi(dim: usize) -> Vec<Vec<Scalar>> {
    let n = dim / 2;
    let mut pi = vec![vec![Scalar::zero(); dim]; dim];
    for i in 0..n {
        pi[i][n + i] = Scalar::from_int(-1);
        pi[n + i][i] = Scalar::one();
    }
    pi
}

/// `f ∗ g = Σ_k (1/k!) ((−iħ/2) P)^k (f ⊗ g)` with `P = π^{ab} ∂_a ⊗ ∂_b`, by
/// repeatedly applying `P` to a list of tensor terms. Returns `C_0 … C_n`.
fn oracle_moyal(f: &BasePoly, g: &BasePoly, pi: &[Vec<Scalar>], n: usize) -> Vec<BasePoly> {
    let dim = f.dim();
    let minus_half_i = Scalar::gaussian(0, 1, -1, 2);
    let mut tensors = vec![(f.clone(), g.clone())];
    let mut out = Vec::new();
    let mut factor = Scalar::one();
    for k in 0..=n {
        if k > 0 {
            factor = &(&factor * &minus_half_i) * &Scalar::from_ratio(1, k as i64);
        }
        let mut ck = BasePoly::zero(dim);
        for (a, b) in &tensors {
            ck = &ck + &(a * b);
        }
        out.push(ck.scale(&factor));
        let mut next = Vec::new();
        for (a, b) in &tensors {
            for (p, row) in pi.iter().enumerate() {
                for (q, v) in row.iter().enumerate() {
                    if v.is_zero() {
                        continue;
                    }
                    let (da, db) = (a.diff(p), b.diff(q));
                    if !da.is_zero() && !db.is_zero() {
                        next.push((da.scale(v), db));
                    }
                }
            }
        }
        tensors = next;
    }
    out
}

fn oracle_series(f: &BasePoly, g: &BasePoly, pi: &[Vec<Scalar>], n: usize) -> HbarSeries {
    HbarSeries::from_coeffs(f.dim(), n as i32 + 1, oracle_moyal(f, g, pi, n).into_iter().enumerate().map(|(k, p)| (k as i32, p)))
}

/// `Σ_{ij} c_ij dx^i ∧ dx^j` at `ħ^k`, from the upper triangle of an antisymmetric matrix.
fn two_form(m: &[Vec<Scalar>], k: i32) -> ScalarFormSeries {
    let dim = m.len();
    let mut w = ScalarFormSeries::zero(dim);
    for i in 0..dim {
        for j in i + 1..dim {
            if !m[i][j].is_zero() {
                w = w.add(&ScalarFormSeries::term(dim, k, &[i, j], BasePoly::constant(dim, m[i][j].clone())));
            }
        }
    }
    w
}

fn darboux_omega(dim: usize) -> Vec<Vec<Scalar>> {
    let n = dim / 2;
    let mut w = vec![vec![Scalar::zero(); dim]; dim];
    for i in 0..n {
        w[i][n + i] = Scalar::one();
        w[n + i][i] = Scalar::from_int(-1);
    }
    w
}

/// `dθ₁∧dθ₂` in the torus chart.
fn dtheta(k: i32) -> ScalarFormSeries {
    ScalarFormSeries::term(4, k, &[0, 1], BasePoly::one(4))
}

// ---------------------------------------------------------------- criteria

fn moyal_associativity() -> Outcome {
    let n = 4;
    let mut triples = 0;
    for name in ["moyal_r2", "moyal_r4"] {
        let setup = setup_of(name, 10);
        let dim = setup.dim();
        let table = extract_table(&setup, n, n as u32).map_err(|e| e.to_string())?;
        let pi = darboux_pi(dim);
        let mut rng = random::rng(20_240_601);
        for t in 0..50 {
            let [f, g, h] = [0; 3].map(|_| random::poly(&mut rng, dim, 3, 3));
            let series = |p: &BasePoly| HbarSeries::from_poly(p.clone());
            let left = table.star(&table.star_poly(&f, &g), &series(&h));
            let right = table.star(&series(&f), &table.star_poly(&g, &h));
            zero_through(&left.sub(&right), n as i32, &|| format!("{name} triple {t} associator"))?;
            // the table's product is the exponential formula itself
            for (a, b) in [(&f, &g), (&g, &h)] {
                let d = table.star_poly(a, b).sub(&oracle_series(a, b, &pi, n));
                zero_through(&d, n as i32, &|| format!("{name} triple {t} vs oracle"))?;
            }
            triples += 1;
        }
    }
    Ok(format!("{triples} random triples of degree <= 3 associative through hbar^4"))
}

fn flat_reduction() -> Outcome {
    let mut pairs = 0;
    for name in ["moyal_r2", "moyal_r4"] {
        let setup = setup_of(name, 10);
        let dim = setup.dim();
        let direct = solve_gamma(setup.conn(), setup.presc(), setup.trunc()).map_err(|e| e.to_string())?;
        if !direct.is_zero() || !setup.gamma().is_zero() {
            return fail(format!("{name}: gamma is not zero"));
        }
        let pi = darboux_pi(dim);
        let monos = monomials(dim, 4);
        for f in &monos {
            for g in &monos {
                let got = star(&HbarSeries::from_poly(f.clone()), &HbarSeries::from_poly(g.clone()), &setup)
                    .map_err(|e| e.to_string())?;
                let n = (got.prec() - 1) as usize;
                if n < 4 {
                    return fail(format!("{name}: star known only through hbar^{n}"));
                }
                zero_through(&got.sub(&oracle_series(f, g, &pi, n)), n as i32, &|| {
                    format!("{name} ({}) * ({})", f.render(), g.render())
                })?;
                pairs += 1;
            }
        }
    }
    Ok(format!("gamma = 0 and star == Moyal oracle on {pairs} monomial pairs of degree <= 4"))
}

fn gamma_closed_form() -> Outcome {
    let setup = setup_of("torus_h_omega1", 8);
    let trunc = setup.trunc();
    // γ = (ħ/2) (ω₁)_{ij} y^i dx^j with ω₁ = dθ₁∧dθ₂: (ω₁)_{01} = 1, (ω₁)_{10} = −1
    let half = Scalar::from_ratio(1, 2);
    let mut want = WeylForm::zero(4, trunc);
    for (i, j, c) in [(0, 1, half.clone()), (1, 0, -&half)] {
        let y = WeylElement::monomial(4, trunc, 1, Monomial::var(i), c);
        want = want.add(&WeylForm::component(DxMask::single(j), y));
    }
    if setup.gamma() != &want {
        return fail(format!("gamma = {}", setup.gamma().render()));
    }
    let r = curvature_residual(&setup).map_err(|e| e.to_string())?;
    if !r.is_zero() {
        return fail(format!("curvature residual {}", r.render()));
    }
    Ok("gamma == (hbar/2) w1_ij y^i dx^j and curvature residual 0 at degree cap 8".into())
}

/// `Σ_α ∂^α a · y^α / α!`.
fn taylor(a: &BasePoly, trunc: Truncation) -> WeylElement {
    let dim = a.dim();
    let mut out = WeylElement::zero(dim, trunc);
    for alpha in Monomial::all_up_to(dim, a.degree().unwrap_or(0)) {
        let mut fact = 1i64;
        for i in 0..dim {
            for j in 1..=alpha.get(i) as i64 {
                fact *= j;
            }
        }
        let c = a.diff_multi(&alpha).scale(&Scalar::from_ratio(1, fact));
        out.add_term(WeylIdx::new(0, alpha), &c).expect("within truncation");
    }
    out
}

fn flat_sections() -> Outcome {
    let mut count = 0;
    for name in BUILTIN_NAMES {
        let setup = setup_of(name, 10);
        let dim = setup.dim();
        let flat = name.starts_with("moyal");
        for a in monomials(dim, 4) {
            let u = flat_section_poly(&a, &setup).map_err(|e| e.to_string())?;
            let du = setup.d(&WeylForm::from_element(u.clone())).map_err(|e| e.to_string())?;
            let du = du.up_to_weight(setup.reliable_weight());
            if !du.is_zero() {
                return fail(format!("{name}: D(~{}) = {}", a.render(), du.render()));
            }
            let sigma = u.center();
            if sigma != HbarSeries::from_poly(a.clone()).truncate(sigma.prec()) {
                return fail(format!("{name}: sigma(~{}) = {}", a.render(), sigma.render()));
            }
            if flat && u != taylor(&a, setup.trunc()) {
                return fail(format!("{name}: ~{} is not the Taylor expansion", a.render()));
            }
            count += 1;
        }
    }
    Ok(format!("D(~a) = 0 and sigma(~a) = a for {count} monomials of degree <= 4; Taylor form on flat charts"))
}

fn hochschild() -> Outcome {
    // c is known below ħ^N, so b(c) and b(b(G)) are exact through ħ^{N−2}; N = 5 reaches ħ³
    let n = 5;
    let through = 3;
    let mut evaluations = 0;
    for name in BUILTIN_NAMES {
        let setup = setup_of(name, 10);
        let dim = setup.dim();
        let s = extract_table(&setup, n, n as u32).map_err(|e| e.to_string())?;
        let c = derivative_cocycle(&s);
        let mut rng = random::rng(7);
        let bgs: Vec<Cochain> = (0..3)
            .map(|_| coboundary(&random_cochain(&mut rng, dim), &s, through + 1))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let monos = monomials(dim, 2);
        for f in &monos {
            for g in &monos {
                for h in &monos {
                    let args: Vec<HbarSeries> = [f, g, h].iter().map(|p| HbarSeries::from_poly((*p).clone())).collect();
                    let at = || format!("{name} ({}, {}, {})", f.render(), g.render(), h.render());
                    let v = eval_coboundary(&c, &s, &args).map_err(|e| e.to_string())?;
                    zero_through(&v, through, &|| format!("b(c) at {}", at()))?;
                    for bg in &bgs {
                        let v = eval_coboundary(bg, &s, &args).map_err(|e| e.to_string())?;
                        zero_through(&v, through, &|| format!("b(b(G)) at {}", at()))?;
                    }
                    evaluations += 1;
                }
            }
        }
    }
    Ok(format!("b(c) = 0 and b(b(G)) = 0 through hbar^3 on {evaluations} monomial triples of degree <= 2"))
}

fn dk0_identity() -> Outcome {
    let omega0 = |dim| two_form(&darboux_omega(dim), 0);
    let i = Scalar::i();
    let cases = [
        ("moyal_r2", omega0(2).scale(&i)),
        ("torus_h_omega1", omega0(4).scale(&i)),
        ("torus_h2_omega1", omega0(4).sub(&dtheta(2)).scale(&i)),
        ("curved_toy", omega0(2).scale(&i)),
    ];
    for (name, want) in cases {
        let r = verify_dk0(&setup_of(name, 10)).map_err(|e| e.to_string())?;
        if !r.residual.is_zero() {
            return fail(format!("{name}: residual {}", r.residual.render()));
        }
        if r.dk0 != want.truncate_above(r.max_hbar_order) {
            return fail(format!("{name}: DK0 = {}, expected {}", r.dk0.render(), want.render()));
        }
    }
    Ok("DK0 = i(Omega - hbar dOmega/dhbar) for moyal_r2, torus_h_omega1, torus_h2_omega1, curved_toy".into())
}

/// `E = −(i/2) Σ y^j ∂/∂y^j`, applied componentwise.
fn fiber_euler(a: &WeylForm) -> WeylForm {
    let dim = a.dim();
    a.map(|e| {
        let mut acc = WeylElement::zero(dim, e.trunc());
        for j in 0..dim {
            acc = acc.add(&e.diff_y(j).mul_y(j));
        }
        acc.scale(&Scalar::gaussian(0, 1, -1, 2))
    })
}

fn commutator_lemmas() -> Outcome {
    let half_i = Scalar::gaussian(0, 1, 1, 2);
    for name in BUILTIN_NAMES {
        let setup = setup_of(name, 10);
        let report = verify_commutator_lemmas(&setup, 20, 11).map_err(|e| e.to_string())?;
        if let Some(f) = report.failures.first() {
            return fail(format!("{name}: {} on sample {}: {}", f.lemma, f.sample, f.residual.render()));
        }
        // the two algebraic identities once more with E written out here
        let mut rng = random::rng(11);
        for k in 0..20 {
            let a = random::weyl_form(&mut rng, setup.dim(), setup.trunc(), 4, 2);
            let p = covariant_partial(&fiber_euler(&a), setup.conn()).sub(&fiber_euler(&covariant_partial(&a, setup.conn())));
            if !p.is_zero() {
                return fail(format!("{name}: [partial, E] on sample {k}: {}", p.render()));
            }
            let d = delta(&fiber_euler(&a)).sub(&fiber_euler(&delta(&a))).add(&delta(&a).scale(&half_i));
            if !d.is_zero() {
                return fail(format!("{name}: [delta, E] + (i/2) delta on sample {k}: {}", d.render()));
            }
        }
    }
    Ok("four commutator identities hold on 20 random forms per builtin".into())
}

fn liouville_positive() -> Outcome {
    let n = 4;
    let half = Scalar::from_ratio(1, 2);
    let q = |dim, i| BasePoly::var(dim, i);
    let cases = [
        ("moyal_r2", Cochain::vector_field(0, &[q(2, 0).scale(&half), q(2, 1).scale(&half)])),
        ("torus_h_omega1", Cochain::vector_field(0, &[BasePoly::zero(4), BasePoly::zero(4), q(4, 2), q(4, 3)])),
    ];
    for (name, x) in cases {
        let ex = spec(name);
        let setup = ex.setup().map_err(|e| e.to_string())?;
        let s = extract_table(&setup, n, n as u32).map_err(|e| e.to_string())?;
        let res = liouville_check(&x, &s, 3, n as i32).map_err(|e| e.to_string())?;
        if let Some(r) = res.first() {
            return fail(format!("{name}: residual {} at hbar^{}", r.value.render(), r.hbar_order));
        }
        let ob = liouville_obstruction(&setup, &ex.decl).map_err(|e| e.to_string())?;
        if !ob.is_zero() {
            return fail(format!("{name}: obstruction {:?}", ob.coordinates));
        }
    }
    // the derivation property directly against the exponential formula on R²
    let pi = darboux_pi(2);
    let euler_half = |f: &BasePoly| (0..2).fold(BasePoly::zero(2), |acc, i| &acc + &(&f.diff(i) * &q(2, i))).scale(&half);
    for f in monomials(2, 3) {
        for g in monomials(2, 3) {
            let fg = oracle_moyal(&f, &g, &pi, n);
            let xf_g = oracle_moyal(&euler_half(&f), &g, &pi, n);
            let f_xg = oracle_moyal(&f, &euler_half(&g), &pi, n);
            for k in 0..=n {
                let lhs = &fg[k].scale(&Scalar::from_int(k as i64)) + &euler_half(&fg[k]);
                if lhs != &xf_g[k] + &f_xg[k] {
                    return fail(format!("oracle: derivation fails at ({}, {}) hbar^{k}", f.render(), g.render()));
                }
            }
        }
    }
    Ok("X = p.dp on torus_h_omega1 and X = (q.dq + p.dp)/2 on moyal_r2 pass through hbar^4; obstruction zero".into())
}

fn liouville_negative() -> Outcome {
    let ex = spec("torus_h2_omega1");
    let setup = ex.setup().map_err(|e| e.to_string())?;
    let ob = liouville_obstruction(&setup, &ex.decl).map_err(|e| e.to_string())?;
    // d/dħ(ω₀/ħ + ħω₁) = −ω₀/ħ² + ω₁, and ω₀ is exact on the cotangent bundle
    let idx = ob.names.iter().position(|n| n == "dtheta1^dtheta2").ok_or("decl basis lacks dtheta1^dtheta2")?;
    let at0 = ob.coordinates.get(&0).map(|c| c[idx].clone()).unwrap_or_else(Scalar::zero);
    if at0 != Scalar::one() {
        return fail(format!("coordinate at hbar^0 is {at0}, expected 1"));
    }
    let status = Command::new(env!("CARGO_BIN_EXE_fedosov"))
        .args(["verify", "--example", "torus_h2_omega1", "--suite", "liouville"])
        .output()
        .map_err(|e| e.to_string())?
        .status;
    if status.success() {
        return fail("verify exited 0");
    }
    Ok(format!("obstruction coordinate 1 on dtheta1^dtheta2 at hbar^0; verify exit status {:?}", status.code()))
}

fn trivializer() -> Outcome {
    let setup = setup_of("moyal_r2", 10);
    let s: StarProductTable = extract_table(&setup, 5, 5).map_err(|e| e.to_string())?;
    let c = derivative_cocycle(&s);
    let (h, _) = trivialize_on_flat(&c, &s, setup.poisson(), 3).map_err(|e| e.to_string())?;
    let monos = monomials(2, 2);
    for f in &monos {
        for g in &monos {
            let args = [HbarSeries::from_poly(f.clone()), HbarSeries::from_poly(g.clone())];
            let bh = eval_coboundary(&h, &s, &args).map_err(|e| e.to_string())?;
            let cv = c.apply(&args).map_err(|e| e.to_string())?;
            zero_through(&bh.sub(&cv), 3, &|| format!("b(H) - c at ({}, {})", f.render(), g.render()))?;
        }
    }
    Ok(format!("b(H) = c through hbar^3 on {} monomial pairs of degree <= 2", monos.len() * monos.len()))
}

fn main_theorem_consistency() -> Outcome {
    let i = Scalar::i();
    for name in BUILTIN_NAMES {
        let ex = spec(name);
        // cl = Σ_k ħ^{k−1} ω_k, so −iħ² d/dħ cl = Σ_k −i(k−1) ħ^k ω_k
        let omega0 = ex.poisson.require_omega().map_err(|e| e.to_string())?;
        let mut want = two_form(omega0, 0).scale(&i);
        for (k, w) in &ex.perturbations {
            let c = &(-&i) * &Scalar::from_int(*k as i64 - 1);
            want = want.add(&w.shift_hbar(*k).scale(&c));
        }
        let r = verify_dk0(&ex.setup().map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let want = want.truncate_above(r.max_hbar_order);
        if r.dk0 != want {
            return fail(format!("{name}: DK0 = {}, -i hbar^2 d/dhbar(cl) = {}", r.dk0.render(), want.render()));
        }
    }
    Ok("emitted DK0 == -i hbar^2 d/dhbar(cl) per hbar-order for every builtin".into())
}

fn determinism() -> Outcome {
    let run = || {
        thread::spawn(|| {
            Command::new(env!("CARGO_BIN_EXE_fedosov"))
                .args(["verify", "--example", "torus_h_omega1", "--suite", "all", "--seed", "7"])
                .output()
        })
    };
    let (a, b) = (run(), run());
    let a = a.join().map_err(|_| "run panicked")?.map_err(|e| e.to_string())?;
    let b = b.join().map_err(|_| "run panicked")?.map_err(|e| e.to_string())?;
    if !a.status.success() || !b.status.success() {
        return fail(format!("verify torus_h_omega1 exited {:?} / {:?}", a.status.code(), b.status.code()));
    }
    if a.stdout != b.stdout {
        return fail("outputs differ");
    }
    Ok(format!("two seeded runs byte-identical ({} bytes), all checks zero", a.stdout.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("moyal associativity", moyal_associativity),
        ("flat reduction", flat_reduction),
        ("gamma closed form", gamma_closed_form),
        ("flat sections", flat_sections),
        ("hochschild", hochschild),
        ("dk0 identity", dk0_identity),
        ("commutator lemmas", commutator_lemmas),
        ("liouville positive", liouville_positive),
        ("liouville negative", liouville_negative),
        ("trivializer", trivializer),
        ("dk0 versus class derivative", main_theorem_consistency),
        ("determinism", determinism),
    ];
    let handles: Vec<_> = criteria.iter().map(|(_, f)| thread::spawn(*f)).collect();
    let mut failed = 0;
    for (k, ((name, _), h)) in criteria.iter().zip(handles).enumerate() {
        let outcome = h.join().unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(msg) => println!("PASS {:>2} {name}: {msg}", k + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {msg}", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
