//! Chart-level de Rham bookkeeping against a declared basis of non-exact 2-forms.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::connection::{characteristic_class, FedosovSetup};
use crate::forms::{d_exterior, euler_homotopy, DxMask, ScalarFormSeries};
use crate::linalg::{SparseRow, SparseSolver};
use crate::poly::BasePoly;
use crate::scalar::Scalar;

/// Named constant 2-forms that are closed but declared non-exact. Every other
/// closed polynomial form counts as exact.
#[derive(Clone, Debug, PartialEq)]
pub struct CohomologyDecl {
    dim: usize,
    basis: Vec<(String, ScalarFormSeries)>,
}

impl CohomologyDecl {
    pub fn empty(dim: usize) -> Self {
        CohomologyDecl { dim, basis: Vec::new() }
    }

    pub fn new(dim: usize, basis: Vec<(String, ScalarFormSeries)>) -> Result<Self> {
        let mut solver = SparseSolver::new();
        for (name, w) in &basis {
            if w.dim() != dim {
                return Err(Error::DimensionMismatch(dim, w.dim()));
            }
            if w.entries().any(|((k, m), f)| *k != 0 || m.degree() != 2 || !f.is_constant()) {
                return Err(Error::InvalidDecl(format!("{name} must be a constant 2-form")));
            }
            if w.is_zero() {
                return Err(Error::InvalidDecl(format!("{name} is zero")));
            }
            if !d_exterior(w).is_zero() {
                return Err(Error::InvalidDecl(format!("{name} is not closed")));
            }
        }
        // independence via the rank of the constant coefficient vectors
        let masks: BTreeSet<DxMask> = basis.iter().flat_map(|(_, w)| w.entries().map(|((_, m), _)| *m)).collect();
        for m in &masks {
            let row: SparseRow = basis
                .iter()
                .enumerate()
                .map(|(j, (_, w))| (j, w.get(0, *m).constant_term()))
                .filter(|(_, v)| !v.is_zero())
                .collect();
            solver.add_equation(row, Scalar::zero());
        }
        if solver.rank() < basis.len() {
            return Err(Error::InvalidDecl("basis forms are linearly dependent".into()));
        }
        let mut names = BTreeSet::new();
        if !basis.iter().all(|(n, _)| names.insert(n.clone())) {
            return Err(Error::InvalidDecl("duplicate basis name".into()));
        }
        Ok(CohomologyDecl { dim, basis })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis(&self) -> &[(String, ScalarFormSeries)] {
        &self.basis
    }

    pub fn names(&self) -> Vec<String> {
        self.basis.iter().map(|(n, _)| n.clone()).collect()
    }

    /// Coordinates appearing in some basis form. Operators that must stay
    /// periodic may not have coefficients depending on these.
    pub fn periodic_coordinates(&self) -> Vec<usize> {
        let set: BTreeSet<usize> =
            self.basis.iter().flat_map(|(_, w)| w.entries().flat_map(|((_, m), _)| m.indices())).collect();
        set.into_iter().collect()
    }

    fn support(&self) -> BTreeSet<DxMask> {
        self.basis.iter().flat_map(|(_, w)| w.entries().map(|((_, m), _)| *m)).collect()
    }
}

/// Per-ħ-order class coordinates and primitives of the exact remainder.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassProjection {
    pub names: Vec<String>,
    pub coordinates: BTreeMap<i32, Vec<Scalar>>,
    pub primitives: BTreeMap<i32, ScalarFormSeries>,
}

impl ClassProjection {
    pub fn is_zero(&self) -> bool {
        self.coordinates.values().flatten().all(Scalar::is_zero)
    }

    /// ħ-orders carrying a nonzero coordinate.
    pub fn obstructed_orders(&self) -> Vec<i32> {
        self.coordinates.iter().filter(|(_, c)| c.iter().any(|v| !v.is_zero())).map(|(k, _)| *k).collect()
    }

    /// `Σ c_j basis_j + d(η)` per order.
    pub fn reassemble(&self, decl: &CohomologyDecl) -> ScalarFormSeries {
        let mut out = ScalarFormSeries::zero(decl.dim);
        for (k, cs) in &self.coordinates {
            for (c, (_, b)) in cs.iter().zip(&decl.basis) {
                out = out.add(&b.scale(c).shift_hbar(*k));
            }
        }
        for eta in self.primitives.values() {
            out = out.add(&d_exterior(eta));
        }
        out
    }
}

/// Split each ħ-order of a closed 2-form series into declared classes plus an exact part.
pub fn project_class(w: &ScalarFormSeries, decl: &CohomologyDecl) -> Result<ClassProjection> {
    if w.dim() != decl.dim {
        return Err(Error::DimensionMismatch(decl.dim, w.dim()));
    }
    let support = decl.support();
    let mut coordinates = BTreeMap::new();
    let mut primitives = BTreeMap::new();
    for k in w.hbar_orders() {
        let wk = w.at_order(k);
        if !d_exterior(&wk).is_zero() {
            return Err(Error::NotClosed);
        }
        let mut solver = SparseSolver::new();
        for m in &support {
            let row: SparseRow = decl
                .basis
                .iter()
                .enumerate()
                .map(|(j, (_, b))| (j, b.get(0, *m).constant_term()))
                .filter(|(_, v)| !v.is_zero())
                .collect();
            if !solver.add_equation(row, wk.get(0, *m).constant_term()) {
                return Err(Error::NotExactUnderDecl);
            }
        }
        let sol = solver.solution().ok_or(Error::NotExactUnderDecl)?;
        let coords: Vec<Scalar> = (0..decl.basis.len()).map(|j| sol.get(&j).cloned().unwrap_or_default()).collect();
        let mut rem = wk;
        for (c, (_, b)) in coords.iter().zip(&decl.basis) {
            rem = rem.sub(&b.scale(c));
        }
        let eta = if rem.is_zero() { ScalarFormSeries::zero(decl.dim) } else { euler_homotopy(&rem)? };
        if d_exterior(&eta) != rem {
            return Err(Error::NotExactUnderDecl);
        }
        coordinates.insert(k, coords);
        primitives.insert(k, eta.shift_hbar(k));
    }
    Ok(ClassProjection { names: decl.names(), coordinates, primitives })
}

/// `d/dħ (Ω/ħ)` as a Laurent form series.
pub fn class_derivative(setup: &FedosovSetup) -> ScalarFormSeries {
    characteristic_class(setup).hbar_derivative()
}

/// Projection of `d/dħ (Ω/ħ)`. A nonzero coordinate rules out a quantum Liouville operator.
pub fn liouville_obstruction(setup: &FedosovSetup, decl: &CohomologyDecl) -> Result<ClassProjection> {
    project_class(&class_derivative(setup), decl)
}

/// Convenience constructor for a constant 2-form `c·dx^i∧dx^j`.
pub fn constant_two_form(dim: usize, i: usize, j: usize, c: Scalar) -> ScalarFormSeries {
    ScalarFormSeries::term(dim, 0, &[i, j], BasePoly::constant(dim, c))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn torus_decl() -> CohomologyDecl {
        CohomologyDecl::new(4, vec![("dtheta1^dtheta2".into(), constant_two_form(4, 0, 1, Scalar::one()))]).unwrap()
    }

    fn omega0() -> ScalarFormSeries {
        constant_two_form(4, 0, 2, Scalar::one()).add(&constant_two_form(4, 1, 3, Scalar::one()))
    }

    #[test]
    fn canonical_form_is_exact_on_torus_chart() {
        let decl = torus_decl();
        let p = project_class(&omega0(), &decl).unwrap();
        assert!(p.is_zero());
        assert_eq!(d_exterior(&p.primitives[&0]), omega0());
        assert_eq!(p.reassemble(&decl), omega0());
    }

    #[test]
    fn basis_member_has_unit_coordinate() {
        let decl = torus_decl();
        let w = constant_two_form(4, 0, 1, Scalar::from_int(3)).shift_hbar(-2);
        let p = project_class(&w, &decl).unwrap();
        assert_eq!(p.coordinates[&-2], vec![Scalar::from_int(3)]);
        assert!(p.primitives[&-2].is_zero());
        assert_eq!(p.obstructed_orders(), vec![-2]);
        assert_eq!(p.reassemble(&decl), w);
    }

    #[test]
    fn zero_form_projects_to_nothing() {
        let p = project_class(&ScalarFormSeries::zero(4), &torus_decl()).unwrap();
        assert!(p.coordinates.is_empty() && p.is_zero());
    }

    #[test]
    fn invalid_decls_rejected() {
        let x = BasePoly::var(4, 2);
        let nonconst = ScalarFormSeries::term(4, 0, &[0, 1], x);
        assert!(CohomologyDecl::new(4, vec![("a".into(), nonconst)]).is_err());
        let a = constant_two_form(4, 0, 1, Scalar::one());
        let b = constant_two_form(4, 0, 1, Scalar::from_int(2));
        assert!(CohomologyDecl::new(4, vec![("a".into(), a), ("b".into(), b)]).is_err());
        assert_eq!(torus_decl().periodic_coordinates(), vec![0, 1]);
    }

    #[test]
    fn non_closed_input_rejected() {
        let w = ScalarFormSeries::term(4, 0, &[0, 1], BasePoly::var(4, 2));
        assert!(matches!(project_class(&w, &torus_decl()), Err(Error::NotClosed)));
    }
}
