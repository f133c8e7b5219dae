//! Contract satisfaction by k-induction over linear programs.
//!
//! `theta(n, l)` is the worst guarantee violation at step `n + 1` over all
//! length-`l` histories (starting at `p = n - l`) in which the assumptions
//! and dynamics hold and the guarantee held at every earlier step. When
//! `p == 0` the history starts in the initial set; otherwise the starting
//! state is left free. A system satisfies the contract if
//! `theta(n, n) <= 0` for `n < nu` and `theta(nu + 1, nu) <= 0`, where `nu`
//! is the observability index.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{self, LinearProgram, LpBuilder, LpStatus};
use crate::model::{Contract, System};
use crate::scalar::Scalar;

/// Supremum of a family of per-row linear programs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Bound<T> {
    Value(T),
    /// No rows to maximize over; the supremum is minus infinity.
    Vacuous,
    PlusInfinity,
    /// The shared constraint set is empty.
    Infeasible,
}

impl<T: Scalar> Bound<T> {
    pub fn value(&self) -> Option<&T> {
        match self {
            Bound::Value(v) => Some(v),
            _ => None,
        }
    }

    /// Holds when the bound certifies the property at tolerance `tol`.
    pub fn certifies(&self, tol: &T) -> bool {
        match self {
            Bound::Value(v) => v <= tol,
            Bound::Vacuous => true,
            Bound::PlusInfinity | Bound::Infeasible => false,
        }
    }

    /// Orders bounds as extended reals: `Infeasible` and `Vacuous` sit at
    /// minus infinity, `PlusInfinity` above every value.
    pub fn compare(&self, other: &Self) -> Option<Ordering> {
        fn key<T>(b: &Bound<T>) -> i8 {
            match b {
                Bound::Infeasible | Bound::Vacuous => -1,
                Bound::Value(_) => 0,
                Bound::PlusInfinity => 1,
            }
        }
        match (self, other) {
            (Bound::Value(a), Bound::Value(b)) => a.partial_cmp(b),
            _ => Some(key(self).cmp(&key(other))),
        }
    }

    pub fn to_f64(&self) -> Bound<f64> {
        match self {
            Bound::Value(v) => Bound::Value(v.to_f64_lossy()),
            Bound::Vacuous => Bound::Vacuous,
            Bound::PlusInfinity => Bound::PlusInfinity,
            Bound::Infeasible => Bound::Infeasible,
        }
    }
}

impl<T: std::fmt::Display> std::fmt::Display for Bound<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Bound::Value(v) => write!(f, "{v}"),
            Bound::Vacuous => write!(f, "-inf (vacuous)"),
            Bound::PlusInfinity => write!(f, "+inf"),
            Bound::Infeasible => write!(f, "infeasible"),
        }
    }
}

/// Solves one LP per objective row over a shared constraint set and
/// combines the results into a [`Bound`].
pub(crate) fn max_over_rows<T: Scalar>(
    base: &LpBuilder<T>,
    objectives: impl IntoIterator<Item = (Vec<T>, T)>,
) -> Result<(Bound<T>, Vec<Bound<T>>)> {
    let mut per_row = Vec::new();
    let mut best: Option<T> = None;
    let mut unbounded = false;
    for (c, offset) in objectives {
        let mut b = base.clone();
        b.objective(c, offset);
        let out = lp::solve(&b.build()?)?;
        match out.status {
            // Every row shares the feasible set.
            LpStatus::Infeasible => return Ok((Bound::Infeasible, vec![Bound::Infeasible])),
            LpStatus::Unbounded => {
                unbounded = true;
                per_row.push(Bound::PlusInfinity);
            }
            LpStatus::Optimal => {
                let v = out.value.expect("optimal value");
                per_row.push(Bound::Value(v.clone()));
                best = Some(match best {
                    Some(b) => T::max_of(b, v),
                    None => v,
                });
            }
        }
    }
    let bound = if unbounded {
        Bound::PlusInfinity
    } else {
        best.map_or(Bound::Vacuous, Bound::Value)
    };
    Ok((bound, per_row))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaValue<T> {
    pub n: usize,
    pub l: usize,
    pub bound: Bound<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport<T> {
    pub thetas: Vec<ThetaValue<T>>,
    pub verified: bool,
    pub tolerance: T,
    /// Set when the contract has no guarantee rows.
    pub vacuous: bool,
    pub obs_index: usize,
    pub diagnostics: Vec<String>,
}

/// Column layout of the theta program: for each time slot `s` (time
/// `p + s`), the block `[d; x; y]`.
#[derive(Debug, Clone, Copy)]
pub struct ThetaLayout {
    pub n_d: usize,
    pub n_x: usize,
    pub n_y: usize,
    pub slots: usize,
}

impl ThetaLayout {
    fn width(&self) -> usize {
        self.n_d + self.n_x + self.n_y
    }
    pub fn n_vars(&self) -> usize {
        self.width() * self.slots
    }
    pub fn d(&self, slot: usize) -> usize {
        slot * self.width()
    }
    pub fn x(&self, slot: usize) -> usize {
        slot * self.width() + self.n_d
    }
    pub fn y(&self, slot: usize) -> usize {
        slot * self.width() + self.n_d + self.n_x
    }

    /// Column of entry `j` of the stacked sample `[d; y]` at `slot`.
    fn dy(&self, slot: usize, j: usize) -> usize {
        if j < self.n_d {
            self.d(slot) + j
        } else {
            self.y(slot) + (j - self.n_d)
        }
    }
}

/// Coefficient row of `M1[i] . u(slot + 1) + M0[i] . u(slot)` where `u` is
/// the stacked `[d; y]` (or `[d]` when `with_y` is false).
fn one_step_row<T: Scalar>(
    layout: &ThetaLayout,
    m1: &[T],
    m0: &[T],
    slot: usize,
    with_y: bool,
) -> Vec<T> {
    let mut row = vec![T::zero(); layout.n_vars()];
    let col = |s: usize, j: usize| if with_y { layout.dy(s, j) } else { layout.d(s) + j };
    for (j, c) in m0.iter().enumerate() {
        let k = col(slot, j);
        row[k] = row[k].clone() + c.clone();
    }
    for (j, c) in m1.iter().enumerate() {
        let k = col(slot + 1, j);
        row[k] = row[k].clone() + c.clone();
    }
    row
}

/// Constraint set of `theta(n, l)`, without an objective.
pub fn theta_constraints<T: Scalar>(
    sys: &System<T>,
    con: &Contract<T>,
    n: usize,
    l: usize,
) -> Result<(LpBuilder<T>, ThetaLayout)> {
    if l > n {
        return Err(Error::InvalidParameter(format!("history length {l} exceeds step {n}")));
    }
    con.check_compatible(sys)?;
    let p = n - l;
    let layout = ThetaLayout {
        n_d: sys.n_d(),
        n_x: sys.n_x(),
        n_y: sys.n_y(),
        slots: l + 2,
    };
    let nv = layout.n_vars();
    let mut lp = LpBuilder::new(nv);
    let asm = con.assumptions();
    let gua = con.guarantees();

    // Guarantees for k = p..n-1, i.e. slots 0..l-1.
    for s in 0..l {
        for i in 0..gua.n_rows() {
            let row = one_step_row(&layout, gua.g1().row(i), gua.g0().row(i), s, true);
            lp.le(row, gua.rhs()[i].clone());
        }
    }
    // Assumptions for k = p..n, i.e. slots 0..=l.
    for s in 0..=l {
        for i in 0..asm.n_rows() {
            let row = one_step_row(&layout, asm.a1().row(i), asm.a0().row(i), s, false);
            lp.le(row, asm.rhs()[i].clone());
        }
    }
    // x(s+1) - A x(s) - B d(s) = w for s = 0..=l.
    for s in 0..=l {
        for i in 0..layout.n_x {
            let mut row = vec![T::zero(); nv];
            row[layout.x(s + 1) + i] = T::one();
            for j in 0..layout.n_x {
                row[layout.x(s) + j] = -sys.a()[(i, j)].clone();
            }
            for j in 0..layout.n_d {
                row[layout.d(s) + j] = -sys.b()[(i, j)].clone();
            }
            lp.eq(row, sys.w()[i].clone());
        }
    }
    // y(s) - C x(s) - D d(s) = v for s = 0..=l+1.
    for s in 0..layout.slots {
        for i in 0..layout.n_y {
            let mut row = vec![T::zero(); nv];
            row[layout.y(s) + i] = T::one();
            for j in 0..layout.n_x {
                row[layout.x(s) + j] = -sys.c()[(i, j)].clone();
            }
            for j in 0..layout.n_d {
                row[layout.d(s) + j] = -sys.d()[(i, j)].clone();
            }
            lp.eq(row, sys.v()[i].clone());
        }
    }
    if p == 0 {
        let init = sys.initial_set();
        for i in 0..init.n_rows() {
            let mut row = vec![T::zero(); nv];
            for j in 0..layout.n_x {
                row[layout.x(0) + j] = init.fx()[(i, j)].clone();
            }
            for j in 0..layout.n_d {
                row[layout.d(0) + j] = init.fd()[(i, j)].clone();
            }
            lp.le(row, init.f()[i].clone());
        }
    }
    Ok((lp, layout))
}

fn theta_objective<T: Scalar>(con: &Contract<T>, layout: &ThetaLayout, row: usize) -> (Vec<T>, T) {
    let g = con.guarantees();
    let c = one_step_row(layout, g.g1().row(row), g.g0().row(row), layout.slots - 2, true);
    (c, -g.rhs()[row].clone())
}

/// The theta program for a single guarantee row.
pub fn build_theta_lp<T: Scalar>(
    sys: &System<T>,
    con: &Contract<T>,
    n: usize,
    l: usize,
    row: usize,
) -> Result<LinearProgram<T>> {
    let m_g = con.guarantees().n_rows();
    if row >= m_g {
        return Err(Error::InvalidParameter(format!(
            "guarantee row {row} out of range (contract has {m_g} rows)"
        )));
    }
    let (mut lp, layout) = theta_constraints(sys, con, n, l)?;
    let (c, offset) = theta_objective(con, &layout, row);
    lp.objective(c, offset);
    lp.build()
}

pub fn compute_theta<T: Scalar>(sys: &System<T>, con: &Contract<T>, n: usize, l: usize) -> Result<ThetaValue<T>> {
    let (base, layout) = theta_constraints(sys, con, n, l)?;
    let objectives = (0..con.guarantees().n_rows()).map(|i| theta_objective(con, &layout, i));
    let (bound, _) = max_over_rows(&base, objectives)?;
    Ok(ThetaValue { n, l, bound })
}

/// `(n, l)` pairs checked for a system with observability index `nu`.
pub fn theta_schedule(nu: usize) -> Vec<(usize, usize)> {
    (0..nu).map(|n| (n, n)).chain(std::iter::once((nu + 1, nu))).collect()
}

pub fn verify_contract<T: Scalar>(sys: &System<T>, con: &Contract<T>) -> Result<VerificationReport<T>> {
    verify_contract_with_tolerance(sys, con, T::lit(crate::DEFAULT_TOLERANCE))
}

pub fn verify_contract_with_tolerance<T: Scalar>(
    sys: &System<T>,
    con: &Contract<T>,
    tolerance: T,
) -> Result<VerificationReport<T>> {
    con.check_compatible(sys)?;
    let nu = sys.obs_index();
    let thetas = theta_schedule(nu)
        .into_iter()
        .map(|(n, l)| compute_theta(sys, con, n, l))
        .collect::<Result<Vec<_>>>()?;
    let verified = thetas.iter().all(|t| t.bound.certifies(&tolerance));
    let vacuous = con.guarantees().n_rows() == 0;
    let mut diagnostics = Vec::new();
    if vacuous {
        diagnostics.push("contract has no guarantee rows; satisfied vacuously".to_string());
    }
    if thetas.iter().any(|t| t.bound == Bound::Infeasible) {
        diagnostics.push(
            "some theta programs are infeasible: the assumptions (or the initial set combined with \
             the guarantees) may be empty or not extendable"
                .to_string(),
        );
    }
    if thetas.iter().any(|t| t.bound == Bound::PlusInfinity) {
        diagnostics.push("some theta programs are unbounded: the guarantee cannot be certified by induction".to_string());
    }
    Ok(VerificationReport {
        thetas,
        verified,
        tolerance,
        vacuous,
        obs_index: nu,
        diagnostics,
    })
}
