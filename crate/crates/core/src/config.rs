//! Run configuration: a single JSON document naming a builtin or spelling out
//! an example inline. Scalars travel as exact `"num/den"` strings.

use serde::{Deserialize, Serialize};

use crate::builtin::{builtin, ExampleSpec};
use crate::cohomology::CohomologyDecl;
use crate::error::{Error, Result};
use crate::forms::ScalarFormSeries;
use crate::hochschild::Cochain;
use crate::poly::Monomial;
use crate::report::{mask_of, parse_poly, parse_scalar, poly_terms, scalar_str, PolyTerms};
use crate::weyl::{PoissonMatrix, Truncation};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChristoffelEntry {
    /// `(i, j, k)` of the lower symbol `Γ_{ijk}`.
    pub index: [usize; 3],
    pub poly: PolyTerms,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormTerm {
    pub dx: Vec<usize>,
    pub poly: PolyTerms,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationEntry {
    pub hbar_order: i32,
    pub form: Vec<FormTerm>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorTerm {
    pub hbar_order: i32,
    pub derivative: Vec<u16>,
    pub poly: PolyTerms,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeclEntry {
    pub name: String,
    pub form: Vec<FormTerm>,
}

/// An example written out in full.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecConfig {
    pub name: String,
    pub coordinates: Vec<String>,
    pub omega: Vec<Vec<String>>,
    #[serde(default)]
    pub christoffel: Vec<ChristoffelEntry>,
    #[serde(default)]
    pub perturbations: Vec<PerturbationEntry>,
    #[serde(default)]
    pub liouville: Option<Vec<OperatorTerm>>,
    #[serde(default)]
    pub decl: Vec<DeclEntry>,
}

fn form_terms(w: &ScalarFormSeries) -> Vec<FormTerm> {
    w.entries().map(|((_, m), p)| FormTerm { dx: m.indices(), poly: poly_terms(p) }).collect()
}

fn parse_form(dim: usize, terms: &[FormTerm]) -> Result<ScalarFormSeries> {
    let mut w = ScalarFormSeries::zero(dim);
    for t in terms {
        if let Some(&i) = t.dx.iter().find(|&&i| i >= dim) {
            return Err(Error::IndexOutOfRange { index: i, dim });
        }
        let (sign, mask) = mask_of(&t.dx)?;
        let p = parse_poly(dim, &t.poly)?;
        w.add_entry(0, mask, &p.scale(&crate::Scalar::from_int(sign)));
    }
    Ok(w)
}

impl SpecConfig {
    pub fn from_spec(spec: &ExampleSpec) -> Result<Self> {
        let omega = spec.poisson.require_omega()?.iter().map(|row| row.iter().map(scalar_str).collect()).collect();
        let dim = spec.dim();
        let liouville = spec.liouville.as_ref().map(|x| {
            x.terms()
                .map(|((l, d), g)| OperatorTerm { hbar_order: *l, derivative: d[0].exponents(dim).to_vec(), poly: poly_terms(g) })
                .collect()
        });
        Ok(SpecConfig {
            name: spec.name.clone(),
            coordinates: spec.coordinates.clone(),
            omega,
            christoffel: spec
                .christoffel
                .iter()
                .map(|((i, j, k), p)| ChristoffelEntry { index: [*i, *j, *k], poly: poly_terms(p) })
                .collect(),
            perturbations: spec
                .perturbations
                .iter()
                .map(|(k, w)| PerturbationEntry { hbar_order: *k, form: form_terms(w) })
                .collect(),
            liouville,
            decl: spec.decl.basis().iter().map(|(n, w)| DeclEntry { name: n.clone(), form: form_terms(w) }).collect(),
        })
    }

    pub fn to_spec(&self, truncation: Truncation) -> Result<ExampleSpec> {
        let dim = self.coordinates.len();
        if self.omega.len() != dim || self.omega.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidMatrix(format!("omega must be {dim}x{dim}")));
        }
        let omega = self.omega.iter().map(|r| r.iter().map(|s| parse_scalar(s)).collect()).collect::<Result<_>>()?;
        let poisson = PoissonMatrix::from_omega(omega)?;
        let christoffel = self
            .christoffel
            .iter()
            .map(|e| Ok(((e.index[0], e.index[1], e.index[2]), parse_poly(dim, &e.poly)?)))
            .collect::<Result<_>>()?;
        let perturbations = self
            .perturbations
            .iter()
            .map(|p| Ok((p.hbar_order, parse_form(dim, &p.form)?)))
            .collect::<Result<_>>()?;
        let liouville = match &self.liouville {
            None => None,
            Some(terms) => {
                let mut x = Cochain::exact(dim, 1);
                for t in terms {
                    if t.derivative.len() != dim {
                        return Err(Error::DimensionMismatch(dim, t.derivative.len()));
                    }
                    x.add_term(t.hbar_order, vec![Monomial::from_exponents(&t.derivative)], &parse_poly(dim, &t.poly)?);
                }
                Some(x)
            }
        };
        let basis = self.decl.iter().map(|d| Ok((d.name.clone(), parse_form(dim, &d.form)?))).collect::<Result<_>>()?;
        Ok(ExampleSpec {
            name: self.name.clone(),
            coordinates: self.coordinates.clone(),
            poisson,
            christoffel,
            perturbations,
            liouville,
            decl: CohomologyDecl::new(dim, basis)?,
            truncation,
        })
    }
}

fn default_cap() -> i32 {
    10
}
fn default_floor() -> i32 {
    -2
}
fn default_order() -> usize {
    4
}
fn default_test_degree() -> u32 {
    2
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub example: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<SpecConfig>,
    #[serde(default = "default_cap")]
    pub degree_cap: i32,
    #[serde(default = "default_floor")]
    pub laurent_floor: i32,
    /// Star order `N`.
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default = "default_test_degree")]
    pub test_degree: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

impl RunConfig {
    pub fn for_example(name: &str) -> Self {
        RunConfig {
            example: Some(name.into()),
            spec: None,
            degree_cap: default_cap(),
            laurent_floor: default_floor(),
            order: default_order(),
            test_degree: default_test_degree(),
            seed: 0,
            out: None,
        }
    }

    /// A builtin written out inline, so it can be edited without touching code.
    pub fn inline_builtin(name: &str) -> Result<Self> {
        let spec = builtin(name)?;
        let mut cfg = RunConfig::for_example(name);
        cfg.example = None;
        cfg.degree_cap = spec.truncation.degree_cap;
        cfg.laurent_floor = spec.truncation.laurent_floor;
        cfg.spec = Some(SpecConfig::from_spec(&spec)?);
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Canonical serialization.
    pub fn to_json(&self) -> Result<String> {
        crate::report::to_json_string(self)
    }

    pub fn truncation(&self) -> Result<Truncation> {
        Truncation::new(self.degree_cap, self.laurent_floor)
    }

    pub fn resolve(&self) -> Result<ExampleSpec> {
        let trunc = self.truncation()?;
        match (&self.example, &self.spec) {
            (Some(name), None) => Ok(builtin(name)?.with_truncation(trunc)),
            (None, Some(spec)) => spec.to_spec(trunc),
            _ => Err(Error::Invalid("config needs exactly one of \"example\" and \"spec\"".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin::BUILTIN_NAMES;

    #[test]
    fn inline_builtins_round_trip() {
        for name in BUILTIN_NAMES {
            let cfg = RunConfig::inline_builtin(name).unwrap();
            let text = cfg.to_json().unwrap();
            let back = RunConfig::from_json(&text).unwrap();
            assert_eq!(back, cfg);
            assert_eq!(back.to_json().unwrap(), text);
            let spec = back.resolve().unwrap();
            let orig = builtin(name).unwrap();
            assert_eq!(spec.poisson, orig.poisson);
            assert_eq!(spec.christoffel, orig.christoffel);
            assert_eq!(spec.perturbations, orig.perturbations);
            assert_eq!(spec.liouville, orig.liouville);
            assert_eq!(spec.decl, orig.decl);
        }
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = RunConfig::from_json("{\n  \"example\": \"moyal_r2\",\n  \"order\": x\n}").unwrap_err();
        match err {
            Error::Parse { line, column, .. } => assert_eq!((line, column), (3, 12)),
            e => panic!("unexpected {e}"),
        }
        assert!(RunConfig::from_json("{\"example\": \"moyal_r2\", \"bogus\": 1}").is_err());
    }

    #[test]
    fn needs_exactly_one_source() {
        let mut cfg = RunConfig::for_example("moyal_r2");
        cfg.example = None;
        assert!(cfg.resolve().is_err());
        assert!(RunConfig::for_example("nope").resolve().is_err());
    }
}
