//! Series interconnection of systems and the extendability check for
//! one-step constraint triples.

use std::collections::HashMap;
use std::hash::{DefaultHasher, Hasher};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Shape};
use crate::linalg::Matrix;
use crate::lp::LpBuilder;
use crate::model::{InitialSet, System};
use crate::scalar::Scalar;
use crate::verify::{max_over_rows, Bound};

/// Row budget for Fourier-Motzkin elimination.
pub const FM_ROW_LIMIT: usize = 10_000;

/// Feeds the output of `s1` into the input of `s2`. The composite has state
/// `[x1; x2]`, input `d1` and output `y2`.
pub fn cascade_systems<T: Scalar>(s1: &System<T>, s2: &System<T>) -> Result<System<T>> {
    if s1.n_y() != s2.n_d() {
        return Err(Error::dim(
            "cascade interconnection (n_y of first vs n_d of second)",
            Shape(s2.n_d(), 1),
            Shape(s1.n_y(), 1),
        ));
    }
    let (n1, n2) = (s1.n_x(), s2.n_x());
    let b2c1 = s2.b().matmul(s1.c())?;
    let a = s1
        .a()
        .hstack(&Matrix::zeros(n1, n2))?
        .vstack(&b2c1.hstack(s2.a())?)?;
    let b = s1.b().vstack(&s2.b().matmul(s1.d())?)?;
    let c = s2.d().matmul(s1.c())?.hstack(s2.c())?;
    let d = s2.d().matmul(s1.d())?;

    let b2v1 = s2.b().matvec(s1.v())?;
    let mut w = s1.w().to_vec();
    w.extend(b2v1.into_iter().zip(s2.w()).map(|(a, b)| a + b.clone()));
    let d2v1 = s2.d().matvec(s1.v())?;
    let v = d2v1.into_iter().zip(s2.v()).map(|(a, b)| a + b.clone()).collect();

    // s2's initial constraint sees d2(0) = C1 x1(0) + D1 d(0) + v1.
    let i1 = s1.initial_set();
    let i2 = s2.initial_set();
    let fx = i1
        .fx()
        .hstack(&Matrix::zeros(i1.n_rows(), n2))?
        .vstack(&i2.fd().matmul(s1.c())?.hstack(i2.fx())?)?;
    let fd = i1.fd().vstack(&i2.fd().matmul(s1.d())?)?;
    let fd2v1 = i2.fd().matvec(s1.v())?;
    let mut f = i1.f().to_vec();
    f.extend(i2.f().iter().zip(fd2v1).map(|(a, b)| a.clone() - b));
    let initial = InitialSet::new(fx, fd, f)?;

    System::new(a, b, c, d, Some(w), Some(v), initial)
}

/// Inequality system `a z <= b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyhedron<T> {
    pub a: Matrix<T>,
    pub b: Vec<T>,
}

fn normalized<T: Scalar>(row: &[T], rhs: &T) -> Option<(Vec<T>, T)> {
    let scale = row.iter().fold(T::zero(), |m, x| T::max_of(m, x.abs()));
    if scale.is_zero() {
        return None;
    }
    Some((row.iter().map(|x| x.clone() / scale.clone()).collect(), rhs.clone() / scale))
}

struct RowSet<T> {
    rows: Vec<(Vec<T>, T)>,
    index: HashMap<u64, Vec<usize>>,
}

impl<T: Scalar> RowSet<T> {
    fn new() -> Self {
        Self {
            rows: Vec::new(),
            index: HashMap::new(),
        }
    }

    fn insert(&mut self, row: Vec<T>, rhs: T) {
        let mut h = DefaultHasher::new();
        for x in row.iter().chain(std::iter::once(&rhs)) {
            x.hash_into(&mut h);
        }
        let bucket = self.index.entry(h.finish()).or_default();
        if bucket.iter().any(|&i| self.rows[i].0 == row && self.rows[i].1 == rhs) {
            return;
        }
        bucket.push(self.rows.len());
        self.rows.push((row, rhs));
    }

    fn len(&self) -> usize {
        self.rows.len()
    }
}

/// Projects `{z : a z <= b}` onto the trailing columns by eliminating the
/// first `k` variables. Rows are scaled to unit max-norm and exact
/// duplicates dropped; no further redundancy removal is attempted.
/// Rows that reduce to `0 <= c` are dropped when `c >= -feas_tol` and kept
/// (as a certificate of emptiness) otherwise.
pub fn eliminate<T: Scalar>(a: &Matrix<T>, b: &[T], k: usize) -> Result<Polyhedron<T>> {
    if b.len() != a.rows() {
        return Err(Error::dim("elimination rhs", Shape(a.rows(), 1), Shape(b.len(), 1)));
    }
    if k > a.cols() {
        return Err(Error::InvalidParameter(format!(
            "cannot eliminate {k} of {} variables",
            a.cols()
        )));
    }
    let n = a.cols();
    let tol = T::feas_tol();
    let mut contradiction: Option<T> = None;
    let mut current = RowSet::new();
    let push = |set: &mut RowSet<T>, row: Vec<T>, rhs: T, contradiction: &mut Option<T>| {
        match normalized(&row, &rhs) {
            Some((r, q)) => set.insert(r, q),
            None => {
                if rhs < -tol.clone() {
                    let worse = contradiction.as_ref().is_none_or(|c| rhs < *c);
                    if worse {
                        *contradiction = Some(rhs);
                    }
                }
            }
        }
    };
    for i in 0..a.rows() {
        push(&mut current, a.row(i).to_vec(), b[i].clone(), &mut contradiction);
    }
    for j in 0..k {
        let mut next = RowSet::new();
        let (mut pos, mut neg) = (Vec::new(), Vec::new());
        for (row, rhs) in current.rows {
            if row[j].is_zero() {
                next.insert(row, rhs);
            } else if row[j].is_positive() {
                pos.push((row, rhs));
            } else {
                neg.push((row, rhs));
            }
        }
        let projected = next.len() + pos.len() * neg.len();
        if projected > FM_ROW_LIMIT {
            return Err(Error::EliminationBlowup {
                rows: projected,
                limit: FM_ROW_LIMIT,
            });
        }
        for (rp, bp) in &pos {
            for (rn, bn) in &neg {
                // rp[j] > 0 > rn[j]: combine with weights -rn[j] and rp[j].
                let (sp, sn) = (-rn[j].clone(), rp[j].clone());
                let mut row: Vec<T> = rp
                    .iter()
                    .zip(rn)
                    .map(|(x, y)| sp.clone() * x.clone() + sn.clone() * y.clone())
                    .collect();
                row[j] = T::zero();
                let rhs = sp.clone() * bp.clone() + sn.clone() * bn.clone();
                push(&mut next, row, rhs, &mut contradiction);
            }
        }
        current = next;
    }
    let mut rows: Vec<Vec<T>> = Vec::with_capacity(current.len() + 1);
    let mut rhs = Vec::with_capacity(current.len() + 1);
    for (r, q) in current.rows {
        rows.push(r[k..].to_vec());
        rhs.push(q);
    }
    if let Some(c) = contradiction {
        rows.push(vec![T::zero(); n - k]);
        rhs.push(c);
    }
    Ok(Polyhedron {
        a: Matrix::from_rows(n - k, &rows)?,
        b: rhs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtendabilityReport<T> {
    pub extendable: bool,
    /// Largest violation of the projected next-step condition over the
    /// feasible pairs.
    pub worst: Bound<T>,
    pub projected_rows: usize,
    pub diagnostics: Vec<String>,
}

/// Decides whether every pair `(u0, u1)` with `V1 u1 + V0 u0 <= v0` admits
/// some `u2` with `V1 u2 + V0 u1 <= v0`.
pub fn check_extendable<T: Scalar>(v1: &Matrix<T>, v0: &Matrix<T>, rhs: &[T]) -> Result<ExtendabilityReport<T>> {
    check_extendable_with_tolerance(v1, v0, rhs, T::lit(crate::DEFAULT_TOLERANCE))
}

pub fn check_extendable_with_tolerance<T: Scalar>(
    v1: &Matrix<T>,
    v0: &Matrix<T>,
    rhs: &[T],
    tolerance: T,
) -> Result<ExtendabilityReport<T>> {
    if v0.shape() != v1.shape() {
        return Err(Error::dim("extendability V0", v1.shape(), v0.shape()));
    }
    if rhs.len() != v1.rows() {
        return Err(Error::dim("extendability rhs", Shape(v1.rows(), 1), Shape(rhs.len(), 1)));
    }
    let n = v1.cols();
    // Columns [u2, u1]; eliminate u2.
    let projected = eliminate(&v1.hstack(v0)?, rhs, n)?;

    // Variables [u0, u1].
    let mut base = LpBuilder::new(2 * n);
    for i in 0..v1.rows() {
        let mut row = v0.row(i).to_vec();
        row.extend_from_slice(v1.row(i));
        base.le(row, rhs[i].clone());
    }
    let objectives = (0..projected.a.rows()).map(|j| {
        let mut c = vec![T::zero(); n];
        c.extend_from_slice(projected.a.row(j));
        (c, -projected.b[j].clone())
    });
    let (worst, _) = max_over_rows(&base, objectives)?;
    let mut diagnostics = Vec::new();
    let extendable = match &worst {
        Bound::Infeasible => {
            diagnostics.push("constraint set is empty; extendable vacuously".to_string());
            true
        }
        b => b.certifies(&tolerance),
    };
    if worst == Bound::Vacuous {
        // No projected rows means the infeasible check above never ran.
        let probe = {
            let mut p = base.clone();
            p.objective(vec![T::zero(); 2 * n], T::zero());
            crate::lp::solve(&p.build()?)?
        };
        if probe.status == crate::lp::LpStatus::Infeasible {
            diagnostics.push("constraint set is empty; extendable vacuously".to_string());
        }
    }
    Ok(ExtendabilityReport {
        extendable,
        worst,
        projected_rows: projected.a.rows(),
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(x: f64) -> Matrix<f64> {
        Matrix::from_f64_rows(&[&[x]])
    }

    #[test]
    fn integrators_in_series() {
        let integ = System::new(scalar(1.0), scalar(1.0), scalar(1.0), scalar(0.0), None, None, InitialSet::origin(1, 1))
            .unwrap();
        let both = cascade_systems(&integ, &integ).unwrap();
        assert_eq!(both.a(), &Matrix::from_f64_rows(&[&[1.0, 0.0], &[1.0, 1.0]]));
        assert_eq!(both.b(), &Matrix::from_f64_rows(&[&[1.0], &[0.0]]));
        assert_eq!(both.c(), &Matrix::from_f64_rows(&[&[0.0, 1.0]]));
        assert_eq!(both.obs_index(), 2);
        assert_eq!(both.initial_set().n_rows(), 4);
    }

    #[test]
    fn offsets_compose() {
        let s1 = System::new(
            scalar(0.5),
            scalar(1.0),
            scalar(2.0),
            scalar(3.0),
            Some(vec![0.1]),
            Some(vec![0.2]),
            InitialSet::unconstrained(1, 1),
        )
        .unwrap();
        let s2 = System::new(
            scalar(0.0),
            scalar(4.0),
            scalar(1.0),
            scalar(5.0),
            Some(vec![0.3]),
            Some(vec![0.4]),
            InitialSet::new(scalar(1.0), scalar(1.0), vec![1.0]).unwrap(),
        )
        .unwrap();
        let s = cascade_systems(&s1, &s2).unwrap();
        assert!((s.w()[1] - (4.0 * 0.2 + 0.3)).abs() < 1e-15);
        assert!((s.v()[0] - (5.0 * 0.2 + 0.4)).abs() < 1e-15);
        assert_eq!(s.d(), &scalar(15.0));
        // x2 + (2 x1 + 3 d + 0.2) <= 1
        let init = s.initial_set();
        assert_eq!(init.fx().row(0), &[2.0, 1.0]);
        assert_eq!(init.fd().row(0), &[3.0]);
        assert!((init.f()[0] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn mismatched_interconnection() {
        let s1 = System::<f64>::static_gain(Matrix::identity(2));
        let s2 = System::<f64>::static_gain(Matrix::identity(3));
        assert!(matches!(cascade_systems(&s1, &s2), Err(Error::Dimension { .. })));
    }

    #[test]
    fn eliminate_interval() {
        // z0 - z1 <= 0, -z0 <= -1 (z0 >= 1), z0 <= 3  =>  z1 >= 1
        let a = Matrix::from_f64_rows(&[&[1.0, -1.0], &[-1.0, 0.0], &[1.0, 0.0]]);
        let p = eliminate(&a, &[0.0, -1.0, 3.0], 1).unwrap();
        assert_eq!(p.a.cols(), 1);
        assert!(p.a.rows() == 1);
        assert_eq!(p.a.row(0), &[-1.0]);
        assert_eq!(p.b, vec![-1.0]);
    }

    #[test]
    fn eliminate_detects_contradiction() {
        let a = Matrix::from_f64_rows(&[&[1.0, 0.0], &[-1.0, 0.0]]);
        let p = eliminate(&a, &[0.0, -1.0], 1).unwrap();
        assert_eq!(p.a.rows(), 1);
        assert_eq!(p.b, vec![-1.0]);
    }

    #[test]
    fn bounded_steps_extend() {
        let r = check_extendable(&Matrix::identity(2), &Matrix::identity(2).scale(&-1.0), &[1.0, 1.0]).unwrap();
        assert!(r.extendable);
    }

    #[test]
    fn forced_contradiction_does_not_extend() {
        // u1 >= u0 + 1, u1 <= 5
        let v1 = Matrix::from_f64_rows(&[&[-1.0], &[1.0]]);
        let v0 = Matrix::from_f64_rows(&[&[1.0], &[0.0]]);
        let r = check_extendable(&v1, &v0, &[-1.0, 5.0]).unwrap();
        assert!(!r.extendable);
        assert!(r.worst.value().unwrap() > &0.0);
    }

    #[test]
    fn empty_constraints_extend_vacuously() {
        let v1 = Matrix::from_f64_rows(&[&[1.0], &[-1.0]]);
        let v0 = Matrix::zeros(2, 1);
        let r = check_extendable(&v1, &v0, &[0.0, -1.0]).unwrap();
        assert!(r.extendable);
        assert!(!r.diagnostics.is_empty());
    }

    #[test]
    fn blowup_guard() {
        // 4 variables, 60 rows each with mixed signs in every column.
        let n = 4;
        let mut rows = Vec::new();
        for i in 0..60 {
            let s = |b: usize| if (i >> b) & 1 == 1 { 1.0 } else { -1.0 };
            rows.push((0..n).map(|j| s(j) * (1.0 + (i * (j + 1)) as f64 / 7.0)).collect::<Vec<_>>());
        }
        let a = Matrix::from_rows(n, &rows).unwrap();
        let b = vec![1.0; rows.len()];
        assert!(matches!(eliminate(&a, &b, 3), Err(Error::EliminationBlowup { limit: FM_ROW_LIMIT, .. })));
    }
}
