//! Named example setups.

use crate::cohomology::{constant_two_form, CohomologyDecl};
use crate::error::{Error, Result};
use crate::connection::{CurvaturePrescription, FedosovSetup};
use crate::forms::ScalarFormSeries;
use crate::hochschild::Cochain;
use crate::poly::BasePoly;
use crate::scalar::Scalar;
use crate::weyl::{PoissonMatrix, Truncation};
use crate::weyl_form::ConnectionData;

pub const BUILTIN_NAMES: [&str; 5] = ["moyal_r2", "moyal_r4", "torus_h_omega1", "torus_h2_omega1", "curved_toy"];

/// Everything needed to build and check one example.
#[derive(Clone, Debug)]
pub struct ExampleSpec {
    pub name: String,
    pub coordinates: Vec<String>,
    pub poisson: PoissonMatrix,
    /// Lower Christoffel symbols `Γ_{ijk}` (symmetric in `j,k`).
    pub christoffel: Vec<((usize, usize, usize), BasePoly)>,
    /// `(k, ω_k)`: `Ω = ω + Σ ħ^k ω_k`.
    pub perturbations: Vec<(i32, ScalarFormSeries)>,
    pub liouville: Option<Cochain>,
    pub decl: CohomologyDecl,
    pub truncation: Truncation,
}

impl ExampleSpec {
    pub fn dim(&self) -> usize {
        self.coordinates.len()
    }

    pub fn connection(&self) -> Result<ConnectionData> {
        ConnectionData::new(self.poisson.clone(), &self.christoffel)
    }

    pub fn prescription(&self) -> Result<CurvaturePrescription> {
        CurvaturePrescription::new(self.dim(), self.perturbations.clone())
    }

    /// Solve for `γ` at the example's truncation.
    pub fn setup(&self) -> Result<FedosovSetup> {
        FedosovSetup::new(self.connection()?, self.prescription()?, self.truncation)
    }

    pub fn with_truncation(mut self, trunc: Truncation) -> Self {
        self.truncation = trunc;
        self
    }
}

fn default_truncation() -> Truncation {
    Truncation::new(10, -2).expect("valid default truncation")
}

fn half_euler(dim: usize) -> Cochain {
    let half = Scalar::from_ratio(1, 2);
    let comps: Vec<BasePoly> = (0..dim).map(|i| BasePoly::var(dim, i).scale(&half)).collect();
    Cochain::vector_field(0, &comps)
}

fn moyal(name: &str, coordinates: &[&str]) -> ExampleSpec {
    let dim = coordinates.len();
    ExampleSpec {
        name: name.into(),
        coordinates: coordinates.iter().map(|s| s.to_string()).collect(),
        poisson: PoissonMatrix::canonical(dim).expect("even dimension"),
        christoffel: Vec::new(),
        perturbations: Vec::new(),
        liouville: Some(half_euler(dim)),
        decl: CohomologyDecl::empty(dim),
        truncation: default_truncation(),
    }
}

/// `T*T²` in coordinates `(θ₁, θ₂, p₁, p₂)` with `Ω = ω₀ + ħ^order dθ₁∧dθ₂`.
fn torus(name: &str, order: i32) -> ExampleSpec {
    let dim = 4;
    let fiber_euler =
        Cochain::vector_field(0, &[BasePoly::zero(dim), BasePoly::zero(dim), BasePoly::var(dim, 2), BasePoly::var(dim, 3)]);
    let omega1 = constant_two_form(dim, 0, 1, Scalar::one());
    ExampleSpec {
        name: name.into(),
        coordinates: ["theta1", "theta2", "p1", "p2"].iter().map(|s| s.to_string()).collect(),
        poisson: PoissonMatrix::canonical(dim).expect("even dimension"),
        christoffel: Vec::new(),
        perturbations: vec![(order, omega1.clone())],
        liouville: Some(fiber_euler),
        decl: CohomologyDecl::new(dim, vec![("dtheta1^dtheta2".into(), omega1)]).expect("valid decl"),
        truncation: default_truncation(),
    }
}

/// `ℝ²` with the single nonzero symbol `Γ_{111} = p`.
fn curved_toy() -> ExampleSpec {
    let dim = 2;
    ExampleSpec {
        name: "curved_toy".into(),
        coordinates: vec!["q".into(), "p".into()],
        poisson: PoissonMatrix::canonical(dim).expect("even dimension"),
        christoffel: vec![((0, 0, 0), BasePoly::var(dim, 1))],
        perturbations: Vec::new(),
        liouville: None,
        decl: CohomologyDecl::empty(dim),
        truncation: default_truncation(),
    }
}

pub fn builtin(name: &str) -> Result<ExampleSpec> {
    Ok(match name {
        "moyal_r2" => moyal(name, &["q", "p"]),
        "moyal_r4" => moyal(name, &["q1", "q2", "p1", "p2"]),
        "torus_h_omega1" => torus(name, 1),
        "torus_h2_omega1" => torus(name, 2),
        "curved_toy" => curved_toy(),
        _ => return Err(Error::UnknownExample(name.into())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_builtin_builds() {
        for name in BUILTIN_NAMES {
            let spec = builtin(name).unwrap().with_truncation(Truncation::new(6, -2).unwrap());
            spec.setup().unwrap();
        }
        assert!(matches!(builtin("sphere"), Err(Error::UnknownExample(_))));
    }

    #[test]
    fn torus_bivector_expansion() {
        use crate::star_table::inverse_series;
        let spec = builtin("torus_h_omega1").unwrap();
        let w1 = spec.perturbations[0].1.constant_two_form_matrix(0);
        let pis = inverse_series(spec.poisson.pi(), &[(1, w1)], 2);
        let pi1 = &pis.iter().find(|(k, _)| *k == 1).unwrap().1;
        // π₁ = −π₀ω₁π₀ is ±∂p₁∧∂p₂ and nothing else
        for i in 0..4 {
            for j in 0..4 {
                let expect = match (i, j) {
                    (2, 3) => Scalar::one(),
                    (3, 2) => Scalar::from_int(-1),
                    _ => Scalar::zero(),
                };
                assert_eq!(pi1[i][j], expect, "pi1[{i}][{j}]");
            }
        }
    }
}
