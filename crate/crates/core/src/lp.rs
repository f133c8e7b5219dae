//! Two-phase dense tableau simplex for small linear programs.
//!
//! Problems are stated as `maximize c'z + c0` subject to `A_ineq z <= b_ineq`
//! and `A_eq z = b_eq` with every variable free in sign. Internally each free
//! variable is split into a nonnegative pair and each equality becomes two
//! opposing inequalities, so the tableau only ever sees `A u <= b, u >= 0`.
//!
//! Pricing uses Dantzig's largest-coefficient rule and falls back to Bland's
//! rule after a run of degenerate pivots, which rules out cycling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Shape};
use crate::linalg::{dot, Matrix};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram<T> {
    objective: Vec<T>,
    offset: T,
    a_ineq: Matrix<T>,
    b_ineq: Vec<T>,
    a_eq: Matrix<T>,
    b_eq: Vec<T>,
}

impl<T: Scalar> LinearProgram<T> {
    pub fn new(objective: Vec<T>, a_ineq: Matrix<T>, b_ineq: Vec<T>, a_eq: Matrix<T>, b_eq: Vec<T>) -> Result<Self> {
        let n = objective.len();
        if a_ineq.cols() != n {
            return Err(Error::dim("inequality block", Shape(a_ineq.rows(), n), a_ineq.shape()));
        }
        if a_eq.cols() != n {
            return Err(Error::dim("equality block", Shape(a_eq.rows(), n), a_eq.shape()));
        }
        if b_ineq.len() != a_ineq.rows() {
            return Err(Error::dim("inequality rhs", Shape(a_ineq.rows(), 1), Shape(b_ineq.len(), 1)));
        }
        if b_eq.len() != a_eq.rows() {
            return Err(Error::dim("equality rhs", Shape(a_eq.rows(), 1), Shape(b_eq.len(), 1)));
        }
        let finite = |v: &[T]| v.iter().all(Scalar::is_finite);
        if !finite(&objective) || !finite(&b_ineq) || !finite(&b_eq) {
            return Err(Error::NonFinite {
                context: "linear program vector".into(),
            });
        }
        Ok(Self {
            objective,
            offset: T::zero(),
            a_ineq,
            b_ineq,
            a_eq,
            b_eq,
        })
    }

    /// Adds a constant term to the objective; it shifts the optimal value
    /// without affecting the optimizer.
    pub fn with_offset(mut self, offset: T) -> Self {
        self.offset = offset;
        self
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn objective(&self) -> &[T] {
        &self.objective
    }

    pub fn offset(&self) -> &T {
        &self.offset
    }

    pub fn a_ineq(&self) -> &Matrix<T> {
        &self.a_ineq
    }

    pub fn b_ineq(&self) -> &[T] {
        &self.b_ineq
    }

    pub fn a_eq(&self) -> &Matrix<T> {
        &self.a_eq
    }

    pub fn b_eq(&self) -> &[T] {
        &self.b_eq
    }

    /// Objective value `c'z + c0` at `z`.
    pub fn evaluate(&self, z: &[T]) -> T {
        dot(&self.objective, z) + self.offset.clone()
    }

    /// Largest constraint violation at `z` (zero when feasible).
    pub fn max_violation(&self, z: &[T]) -> T {
        let mut worst = T::zero();
        for (i, b) in self.b_ineq.iter().enumerate() {
            worst = T::max_of(worst, dot(self.a_ineq.row(i), z) - b.clone());
        }
        for (i, b) in self.b_eq.iter().enumerate() {
            worst = T::max_of(worst, (dot(self.a_eq.row(i), z) - b.clone()).abs());
        }
        worst
    }
}

/// Incremental construction of a [`LinearProgram`] row by row.
#[derive(Debug, Clone)]
pub struct LpBuilder<T> {
    n_vars: usize,
    objective: Vec<T>,
    offset: T,
    ineq: Vec<T>,
    b_ineq: Vec<T>,
    eq: Vec<T>,
    b_eq: Vec<T>,
}

impl<T: Scalar> LpBuilder<T> {
    pub fn new(n_vars: usize) -> Self {
        Self {
            n_vars,
            objective: vec![T::zero(); n_vars],
            offset: T::zero(),
            ineq: Vec::new(),
            b_ineq: Vec::new(),
            eq: Vec::new(),
            b_eq: Vec::new(),
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn objective(&mut self, coeffs: Vec<T>, offset: T) -> &mut Self {
        assert_eq!(coeffs.len(), self.n_vars, "objective length");
        self.objective = coeffs;
        self.offset = offset;
        self
    }

    /// Adds `row . z <= rhs`.
    pub fn le(&mut self, row: Vec<T>, rhs: T) -> &mut Self {
        assert_eq!(row.len(), self.n_vars, "constraint length");
        self.ineq.extend(row);
        self.b_ineq.push(rhs);
        self
    }

    /// Adds `row . z = rhs`.
    pub fn eq(&mut self, row: Vec<T>, rhs: T) -> &mut Self {
        assert_eq!(row.len(), self.n_vars, "constraint length");
        self.eq.extend(row);
        self.b_eq.push(rhs);
        self
    }

    pub fn build(&self) -> Result<LinearProgram<T>> {
        let n = self.n_vars;
        let a_ineq = Matrix::new(self.b_ineq.len(), n, self.ineq.clone())?;
        let a_eq = Matrix::new(self.b_eq.len(), n, self.eq.clone())?;
        Ok(LinearProgram::new(self.objective.clone(), a_ineq, self.b_ineq.clone(), a_eq, self.b_eq.clone())?
            .with_offset(self.offset.clone()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpOutcome<T> {
    pub status: LpStatus,
    /// Optimal value, present iff `status == Optimal`.
    pub value: Option<T>,
    /// Optimizer, present iff `status == Optimal`.
    pub witness: Option<Vec<T>>,
    pub pivots: usize,
}

impl<T> LpOutcome<T> {
    fn without_solution(status: LpStatus, pivots: usize) -> Self {
        Self {
            status,
            value: None,
            witness: None,
            pivots,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverOptions<T> {
    pub feas_tol: T,
    /// Consecutive degenerate pivots tolerated before switching to Bland's rule.
    pub bland_after: usize,
    /// Pivot budget; `None` means `10_000 * max(n_vars, 1)`.
    pub max_pivots: Option<usize>,
}

impl<T: Scalar> Default for SolverOptions<T> {
    fn default() -> Self {
        Self {
            feas_tol: T::feas_tol(),
            bland_after: 50,
            max_pivots: None,
        }
    }
}

pub fn solve<T: Scalar>(lp: &LinearProgram<T>) -> Result<LpOutcome<T>> {
    solve_with(lp, &SolverOptions::default())
}

pub fn solve_with<T: Scalar>(lp: &LinearProgram<T>, opts: &SolverOptions<T>) -> Result<LpOutcome<T>> {
    let n = lp.n_vars();
    let budget = opts.max_pivots.unwrap_or(10_000 * n.max(1));

    // Rows of A u <= b over the split variables u = [z+; z-].
    let mut rows: Vec<(Vec<T>, T)> = Vec::with_capacity(lp.b_ineq.len() + 2 * lp.b_eq.len());
    for (i, b) in lp.b_ineq.iter().enumerate() {
        rows.push((lp.a_ineq.row(i).to_vec(), b.clone()));
    }
    for (i, b) in lp.b_eq.iter().enumerate() {
        let r = lp.a_eq.row(i);
        rows.push((r.to_vec(), b.clone()));
        rows.push((r.iter().map(|x| -x.clone()).collect(), -b.clone()));
    }

    let mut tab = Tableau::new(n, &rows, opts.feas_tol.clone());
    let mut pivots = 0usize;

    // Phase I: maximize minus the sum of artificials.
    if tab.n_art > 0 {
        let mut cost = vec![T::zero(); tab.ncols];
        for j in tab.art_start..tab.ncols {
            cost[j] = -T::one();
        }
        tab.set_cost(&cost);
        match tab.run(opts, budget, &mut pivots)? {
            Phase::Optimal => {}
            // The phase I objective is bounded above by zero.
            Phase::Unbounded => unreachable!("phase I objective is bounded"),
        }
        if tab.value() < -opts.feas_tol.clone() {
            return Ok(LpOutcome::without_solution(LpStatus::Infeasible, pivots));
        }
        tab.expel_artificials();
        for j in tab.art_start..tab.ncols {
            tab.allowed[j] = false;
        }
    }

    // Phase II.
    let mut cost = vec![T::zero(); tab.ncols];
    for j in 0..n {
        cost[j] = lp.objective[j].clone();
        cost[n + j] = -lp.objective[j].clone();
    }
    tab.set_cost(&cost);
    if let Phase::Unbounded = tab.run(opts, budget, &mut pivots)? {
        return Ok(LpOutcome::without_solution(LpStatus::Unbounded, pivots));
    }

    let u = tab.primal();
    let z: Vec<T> = (0..n).map(|j| u[j].clone() - u[n + j].clone()).collect();
    let residual = lp.max_violation(&z);
    if residual > opts.feas_tol {
        return Err(Error::NumericalFailure {
            residual: residual.to_f64_lossy(),
        });
    }
    let value = lp.evaluate(&z);
    Ok(LpOutcome {
        status: LpStatus::Optimal,
        value: Some(value),
        witness: Some(z),
        pivots,
    })
}

enum Phase {
    Optimal,
    Unbounded,
}

struct Tableau<T> {
    /// Constraint rows, each `ncols + 1` long with the rhs last.
    t: Vec<Vec<T>>,
    /// Reduced-cost row; the last entry holds minus the objective value.
    obj: Vec<T>,
    basis: Vec<usize>,
    allowed: Vec<bool>,
    ncols: usize,
    art_start: usize,
    n_art: usize,
    tol: T,
}

impl<T: Scalar> Tableau<T> {
    fn new(n: usize, rows: &[(Vec<T>, T)], tol: T) -> Self {
        let m = rows.len();
        let n_art = rows.iter().filter(|(_, b)| *b < T::zero()).count();
        let art_start = 2 * n + m;
        let ncols = art_start + n_art;
        let mut t = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut next_art = art_start;
        for (i, (a, b)) in rows.iter().enumerate() {
            let mut row = vec![T::zero(); ncols + 1];
            let flip = *b < T::zero();
            for (j, x) in a.iter().enumerate() {
                let x = if flip { -x.clone() } else { x.clone() };
                row[n + j] = -x.clone();
                row[j] = x;
            }
            row[2 * n + i] = if flip { -T::one() } else { T::one() };
            row[ncols] = if flip { -b.clone() } else { b.clone() };
            if flip {
                row[next_art] = T::one();
                basis.push(next_art);
                next_art += 1;
            } else {
                basis.push(2 * n + i);
            }
            t.push(row);
        }
        Self {
            t,
            obj: vec![T::zero(); ncols + 1],
            basis,
            allowed: vec![true; ncols],
            ncols,
            art_start,
            n_art,
            tol,
        }
    }

    fn value(&self) -> T {
        -self.obj[self.ncols].clone()
    }

    /// Installs a new cost vector and prices out the current basis.
    fn set_cost(&mut self, cost: &[T]) {
        let mut obj: Vec<T> = cost.iter().cloned().chain(std::iter::once(T::zero())).collect();
        for (i, &bj) in self.basis.iter().enumerate() {
            let cb = cost[bj].clone();
            if cb.is_zero() {
                continue;
            }
            for (o, t) in obj.iter_mut().zip(&self.t[i]) {
                *o = o.clone() - cb.clone() * t.clone();
            }
        }
        self.obj = obj;
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[r][c].clone();
        for x in self.t[r].iter_mut() {
            *x = x.clone() / p.clone();
        }
        self.t[r][c] = T::one();
        let pivot_row = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c].clone();
            if f.is_zero() {
                continue;
            }
            for (x, pr) in row.iter_mut().zip(&pivot_row) {
                *x = x.clone() - f.clone() * pr.clone();
            }
            row[c] = T::zero();
            clamp_rhs(&mut row[self.ncols], &self.tol);
        }
        let f = self.obj[c].clone();
        if !f.is_zero() {
            for (x, pr) in self.obj.iter_mut().zip(&pivot_row) {
                *x = x.clone() - f.clone() * pr.clone();
            }
            self.obj[c] = T::zero();
        }
        self.basis[r] = c;
    }

    fn entering(&self, bland: bool) -> Option<usize> {
        let mut best: Option<usize> = None;
        for j in 0..self.ncols {
            if !self.allowed[j] || self.obj[j] <= self.tol {
                continue;
            }
            if bland {
                return Some(j);
            }
            match best {
                Some(b) if self.obj[j] <= self.obj[b] => {}
                _ => best = Some(j),
            }
        }
        best
    }

    /// Minimum-ratio row for entering column `c`, or `None` if the column is
    /// unbounded.
    fn leaving(&self, c: usize, bland: bool) -> Option<usize> {
        let rhs = self.ncols;
        let mut best: Option<(usize, T)> = None;
        for (i, row) in self.t.iter().enumerate() {
            let a = &row[c];
            if *a <= self.tol {
                continue;
            }
            let ratio = row[rhs].clone() / a.clone();
            best = match best {
                None => Some((i, ratio)),
                Some((b, br)) => {
                    if ratio < br {
                        Some((i, ratio))
                    } else if ratio == br {
                        let take = if bland {
                            self.basis[i] < self.basis[b]
                        } else {
                            *a > self.t[b][c]
                        };
                        if take {
                            Some((i, ratio))
                        } else {
                            Some((b, br))
                        }
                    } else {
                        Some((b, br))
                    }
                }
            };
        }
        best.map(|(i, _)| i)
    }

    fn run(&mut self, opts: &SolverOptions<T>, budget: usize, pivots: &mut usize) -> Result<Phase> {
        let mut degenerate_run = 0usize;
        loop {
            let bland = degenerate_run >= opts.bland_after;
            let Some(c) = self.entering(bland) else {
                return Ok(Phase::Optimal);
            };
            let Some(r) = self.leaving(c, bland) else {
                return Ok(Phase::Unbounded);
            };
            if *pivots >= budget {
                return Err(Error::SolverStalled { iterations: *pivots });
            }
            let step = self.t[r][self.ncols].clone() / self.t[r][c].clone();
            if step <= self.tol {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.pivot(r, c);
            *pivots += 1;
        }
    }

    /// Pivots zero-level artificials out of the basis after phase I; rows
    /// where that is impossible are linearly dependent and get dropped.
    fn expel_artificials(&mut self) {
        let mut i = 0;
        while i < self.t.len() {
            if self.basis[i] < self.art_start {
                i += 1;
                continue;
            }
            let col = (0..self.art_start)
                .filter(|&j| self.allowed[j])
                .max_by(|&a, &b| {
                    self.t[i][a]
                        .abs()
                        .partial_cmp(&self.t[i][b].abs())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .filter(|&j| self.t[i][j].abs() > self.tol);
            match col {
                Some(j) => {
                    self.pivot(i, j);
                    i += 1;
                }
                None => {
                    self.t.remove(i);
                    self.basis.remove(i);
                }
            }
        }
    }

    fn primal(&self) -> Vec<T> {
        let mut u = vec![T::zero(); self.ncols];
        for (i, &bj) in self.basis.iter().enumerate() {
            u[bj] = self.t[i][self.ncols].clone();
        }
        u
    }
}

fn clamp_rhs<T: Scalar>(x: &mut T, tol: &T) {
    if *x < T::zero() && *x >= -tol.clone() {
        *x = T::zero();
    }
}
