//! Contract refinement `C1 <= C2`: C1 assumes no more and guarantees no
//! less than C2 on C2's assumption set.
//!
//! `psi_d` is the largest violation of a C1 assumption row over pairs that
//! satisfy C2's assumptions. `psi_omega` is the largest violation of a C2
//! guarantee row over pairs satisfying C1's guarantees and C2's
//! assumptions. Both must be non-positive for refinement.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Shape};
use crate::lp::LpBuilder;
use crate::model::{Assumptions, Contract, Guarantees};
use crate::scalar::Scalar;
use crate::verify::{max_over_rows, Bound};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsiValue<T> {
    pub bound: Bound<T>,
    /// Optimal value of each per-row program, in row order.
    pub per_row: Vec<Bound<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementReport<T> {
    pub psi_d: PsiValue<T>,
    pub psi_omega: PsiValue<T>,
    pub refines: bool,
    pub tolerance: T,
    pub diagnostics: Vec<String>,
}

// Variables: [d0; y0; d1; y1].
struct PairLayout {
    n_d: usize,
    n_y: usize,
}

impl PairLayout {
    fn n_vars(&self) -> usize {
        2 * (self.n_d + self.n_y)
    }

    fn assumption_row<T: Scalar>(&self, a: &Assumptions<T>, i: usize) -> Vec<T> {
        let mut row = vec![T::zero(); self.n_vars()];
        let off1 = self.n_d + self.n_y;
        for j in 0..self.n_d {
            row[j] = a.a0()[(i, j)].clone();
            row[off1 + j] = a.a1()[(i, j)].clone();
        }
        row
    }

    fn guarantee_row<T: Scalar>(&self, g: &Guarantees<T>, i: usize) -> Vec<T> {
        let w = self.n_d + self.n_y;
        let mut row = g.g0().row(i).to_vec();
        row.extend_from_slice(g.g1().row(i));
        debug_assert_eq!(row.len(), 2 * w);
        row
    }
}

fn check_dims<T: Scalar>(c1: &Contract<T>, c2: &Contract<T>, with_y: bool) -> Result<()> {
    if c1.n_d() != c2.n_d() {
        return Err(Error::dim("refinement input dimension", Shape(c2.n_d(), 1), Shape(c1.n_d(), 1)));
    }
    if with_y && c1.n_y() != c2.n_y() {
        return Err(Error::dim("refinement output dimension", Shape(c2.n_y(), 1), Shape(c1.n_y(), 1)));
    }
    Ok(())
}

/// Worst violation of C1's assumptions over C2's assumption set.
pub fn psi_d<T: Scalar>(c1: &Contract<T>, c2: &Contract<T>) -> Result<PsiValue<T>> {
    check_dims(c1, c2, false)?;
    // Outputs are unconstrained here, so they are left out of the program.
    let layout = PairLayout { n_d: c1.n_d(), n_y: 0 };
    let a2 = c2.assumptions();
    let mut base = LpBuilder::new(layout.n_vars());
    for i in 0..a2.n_rows() {
        base.le(layout.assumption_row(a2, i), a2.rhs()[i].clone());
    }
    let a1 = c1.assumptions();
    let objectives = (0..a1.n_rows()).map(|i| (layout.assumption_row(a1, i), -a1.rhs()[i].clone()));
    let (bound, per_row) = max_over_rows(&base, objectives)?;
    Ok(PsiValue { bound, per_row })
}

/// Worst violation of C2's guarantees over C1's guarantees intersected
/// with C2's assumptions.
pub fn psi_omega<T: Scalar>(c1: &Contract<T>, c2: &Contract<T>) -> Result<PsiValue<T>> {
    check_dims(c1, c2, true)?;
    let layout = PairLayout {
        n_d: c1.n_d(),
        n_y: c1.n_y(),
    };
    let mut base = LpBuilder::new(layout.n_vars());
    let g1 = c1.guarantees();
    for i in 0..g1.n_rows() {
        base.le(layout.guarantee_row(g1, i), g1.rhs()[i].clone());
    }
    let a2 = c2.assumptions();
    for i in 0..a2.n_rows() {
        base.le(layout.assumption_row(a2, i), a2.rhs()[i].clone());
    }
    let g2 = c2.guarantees();
    let objectives = (0..g2.n_rows()).map(|i| (layout.guarantee_row(g2, i), -g2.rhs()[i].clone()));
    let (bound, per_row) = max_over_rows(&base, objectives)?;
    Ok(PsiValue { bound, per_row })
}

pub fn check_refinement<T: Scalar>(c1: &Contract<T>, c2: &Contract<T>) -> Result<RefinementReport<T>> {
    check_refinement_with_tolerance(c1, c2, T::lit(crate::DEFAULT_TOLERANCE))
}

pub fn check_refinement_with_tolerance<T: Scalar>(
    c1: &Contract<T>,
    c2: &Contract<T>,
    tolerance: T,
) -> Result<RefinementReport<T>> {
    check_dims(c1, c2, true)?;
    let (psi_d, psi_omega) = std::thread::scope(|s| {
        let d = s.spawn(|| psi_d(c1, c2));
        let o = psi_omega(c1, c2);
        (d.join().expect("psi_d worker panicked"), o)
    });
    let (psi_d, psi_omega) = (psi_d?, psi_omega?);
    // An empty C1 row set makes psi vacuous; that is a genuine pass.
    let refines = psi_d.bound.certifies(&tolerance) && psi_omega.bound.certifies(&tolerance);
    let mut diagnostics = Vec::new();
    if psi_d.bound == Bound::Infeasible {
        diagnostics.push("psi_d is infeasible: the assumptions of the second contract are empty".to_string());
    }
    if psi_omega.bound == Bound::Infeasible {
        diagnostics.push(
            "psi_omega is infeasible: the first contract's guarantees and the second's assumptions \
             have no common point"
                .to_string(),
        );
    }
    if psi_omega.bound == Bound::PlusInfinity {
        diagnostics.push(
            "psi_omega is unbounded: some guarantee row of the second contract is not implied"
                .to_string(),
        );
    }
    Ok(RefinementReport {
        psi_d,
        psi_omega,
        refines,
        tolerance,
        diagnostics,
    })
}
