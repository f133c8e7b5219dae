//! Systems, contracts and initial-condition sets.
//!
//! Everything is validated on construction, so downstream code (LP assembly,
//! simulation) can index blocks without re-checking shapes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Shape};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

fn check_shape<T: Scalar>(name: &str, m: &Matrix<T>, rows: usize, cols: usize) -> Result<()> {
    if m.rows() != rows || m.cols() != cols {
        return Err(Error::dim(name, Shape(rows, cols), m.shape()));
    }
    Ok(())
}

fn check_len<T>(name: &str, v: &[T], len: usize) -> Result<()> {
    if v.len() != len {
        return Err(Error::dim(name, Shape(len, 1), Shape(v.len(), 1)));
    }
    Ok(())
}

fn check_finite<T: Scalar>(name: &str, v: &[T]) -> Result<()> {
    if v.iter().all(Scalar::is_finite) {
        Ok(())
    } else {
        Err(Error::NonFinite { context: name.into() })
    }
}

/// Polyhedral set of admissible initial states, possibly coupled to the
/// first input sample: `Fx x(0) + Fd d(0) <= f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialSet<T> {
    fx: Matrix<T>,
    fd: Matrix<T>,
    f: Vec<T>,
}

impl<T: Scalar> InitialSet<T> {
    pub fn new(fx: Matrix<T>, fd: Matrix<T>, f: Vec<T>) -> Result<Self> {
        let m = f.len();
        check_finite("initial set f", &f)?;
        if fx.rows() != m {
            return Err(Error::dim("initial set Fx", Shape(m, fx.cols()), fx.shape()));
        }
        if fd.rows() != m {
            return Err(Error::dim("initial set Fd", Shape(m, fd.cols()), fd.shape()));
        }
        Ok(Self { fx, fd, f })
    }

    /// No restriction on the initial state.
    pub fn unconstrained(n_x: usize, n_d: usize) -> Self {
        Self {
            fx: Matrix::zeros(0, n_x),
            fd: Matrix::zeros(0, n_d),
            f: Vec::new(),
        }
    }

    /// `x(0) = 0`, written as the pair `x <= 0`, `-x <= 0`.
    pub fn origin(n_x: usize, n_d: usize) -> Self {
        let eye = Matrix::identity(n_x);
        Self {
            fx: eye.vstack(&eye.scale(&-T::one())).expect("same width"),
            fd: Matrix::zeros(2 * n_x, n_d),
            f: vec![T::zero(); 2 * n_x],
        }
    }

    pub fn fx(&self) -> &Matrix<T> {
        &self.fx
    }

    pub fn fd(&self) -> &Matrix<T> {
        &self.fd
    }

    pub fn f(&self) -> &[T] {
        &self.f
    }

    pub fn n_rows(&self) -> usize {
        self.f.len()
    }

    /// Largest violation of the initial-set rows at `(x0, d0)`.
    pub fn violation(&self, x0: &[T], d0: &[T]) -> Result<T> {
        let a = self.fx.matvec(x0)?;
        let b = self.fd.matvec(d0)?;
        Ok((0..self.f.len())
            .map(|i| a[i].clone() + b[i].clone() - self.f[i].clone())
            .fold(T::zero(), T::max_of))
    }
}

/// Affine discrete-time LTI system
/// `x(k+1) = A x(k) + B d(k) + w`, `y(k) = C x(k) + D d(k) + v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct System<T> {
    a: Matrix<T>,
    b: Matrix<T>,
    c: Matrix<T>,
    d: Matrix<T>,
    w: Vec<T>,
    v: Vec<T>,
    initial: InitialSet<T>,
    obs_index: usize,
}

impl<T: Scalar> System<T> {
    /// Validates the matrices and computes the observability index.
    /// Omitted offsets default to zero. The state dimension must be at
    /// least one; static gains use a single frozen state.
    pub fn new(
        a: Matrix<T>,
        b: Matrix<T>,
        c: Matrix<T>,
        d: Matrix<T>,
        w: Option<Vec<T>>,
        v: Option<Vec<T>>,
        initial: InitialSet<T>,
    ) -> Result<Self> {
        let n_x = a.rows();
        if n_x == 0 {
            return Err(Error::InvalidParameter("state dimension must be at least 1".into()));
        }
        let n_d = b.cols();
        let n_y = c.rows();
        check_shape("A", &a, n_x, n_x)?;
        check_shape("B", &b, n_x, n_d)?;
        check_shape("C", &c, n_y, n_x)?;
        check_shape("D", &d, n_y, n_d)?;
        let w = w.unwrap_or_else(|| vec![T::zero(); n_x]);
        let v = v.unwrap_or_else(|| vec![T::zero(); n_y]);
        check_len("w", &w, n_x)?;
        check_len("v", &v, n_y)?;
        check_finite("w", &w)?;
        check_finite("v", &v)?;
        check_shape("initial set Fx", initial.fx(), initial.n_rows(), n_x)?;
        check_shape("initial set Fd", initial.fd(), initial.n_rows(), n_d)?;
        let obs_index = observability_index(&a, &c)?;
        Ok(Self {
            a,
            b,
            c,
            d,
            w,
            v,
            initial,
            obs_index,
        })
    }

    /// Static gain `y(k) = K d(k)` with a single frozen state fixed at zero.
    pub fn static_gain(k: Matrix<T>) -> Self {
        let (n_y, n_d) = (k.rows(), k.cols());
        Self::new(
            Matrix::zeros(1, 1),
            Matrix::zeros(1, n_d),
            Matrix::zeros(n_y, 1),
            k,
            None,
            None,
            InitialSet::origin(1, n_d),
        )
        .expect("static gain shapes are consistent")
    }

    pub fn a(&self) -> &Matrix<T> {
        &self.a
    }
    pub fn b(&self) -> &Matrix<T> {
        &self.b
    }
    pub fn c(&self) -> &Matrix<T> {
        &self.c
    }
    pub fn d(&self) -> &Matrix<T> {
        &self.d
    }
    pub fn w(&self) -> &[T] {
        &self.w
    }
    pub fn v(&self) -> &[T] {
        &self.v
    }
    pub fn initial_set(&self) -> &InitialSet<T> {
        &self.initial
    }
    pub fn n_x(&self) -> usize {
        self.a.rows()
    }
    pub fn n_d(&self) -> usize {
        self.b.cols()
    }
    pub fn n_y(&self) -> usize {
        self.c.rows()
    }
    pub fn obs_index(&self) -> usize {
        self.obs_index
    }

    /// One step of the state recursion.
    pub fn step(&self, x: &[T], d: &[T]) -> Result<Vec<T>> {
        let ax = self.a.matvec(x)?;
        let bd = self.b.matvec(d)?;
        Ok((0..self.n_x())
            .map(|i| ax[i].clone() + bd[i].clone() + self.w[i].clone())
            .collect())
    }

    pub fn output(&self, x: &[T], d: &[T]) -> Result<Vec<T>> {
        let cx = self.c.matvec(x)?;
        let dd = self.d.matvec(d)?;
        Ok((0..self.n_y())
            .map(|i| cx[i].clone() + dd[i].clone() + self.v[i].clone())
            .collect())
    }
}

/// Observability index: the least `m >= 1` with
/// `rank O_{m-1} == rank O_m`, where `O_k` stacks `C, CA, ..., CA^k`.
/// The search stops at `n_x`.
pub fn observability_index<T: Scalar>(a: &Matrix<T>, c: &Matrix<T>) -> Result<usize> {
    let n_x = a.rows();
    check_shape("A", a, n_x, n_x)?;
    if c.cols() != n_x {
        return Err(Error::dim("C", Shape(c.rows(), n_x), c.shape()));
    }
    let mut stacked = c.clone();
    let mut block = c.clone();
    let mut prev_rank = stacked.rank_default();
    for m in 1..=n_x {
        block = block.matmul(a)?;
        stacked = stacked.vstack(&block)?;
        let rank = stacked.rank_default();
        if rank == prev_rank {
            return Ok(m);
        }
        prev_rank = rank;
    }
    Ok(n_x.max(1))
}

/// One-step input assumptions `A1 d(k+1) + A0 d(k) <= a0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assumptions<T> {
    a1: Matrix<T>,
    a0: Matrix<T>,
    rhs: Vec<T>,
}

impl<T: Scalar> Assumptions<T> {
    pub fn new(a1: Matrix<T>, a0: Matrix<T>, rhs: Vec<T>) -> Result<Self> {
        check_finite("assumption a0", &rhs)?;
        let m = rhs.len();
        check_shape("assumption A1", &a1, m, a1.cols())?;
        check_shape("assumption A0", &a0, m, a1.cols())?;
        Ok(Self { a1, a0, rhs })
    }

    pub fn a1(&self) -> &Matrix<T> {
        &self.a1
    }
    pub fn a0(&self) -> &Matrix<T> {
        &self.a0
    }
    pub fn rhs(&self) -> &[T] {
        &self.rhs
    }
    pub fn n_rows(&self) -> usize {
        self.rhs.len()
    }
    pub fn n_d(&self) -> usize {
        self.a1.cols()
    }

    /// Per-row residual `A1 d1 + A0 d0 - a0`.
    pub fn residual(&self, d0: &[T], d1: &[T]) -> Result<Vec<T>> {
        one_step_residual(&self.a1, &self.a0, &self.rhs, d0, d1)
    }
}

/// One-step guarantees `G1 [d(k+1); y(k+1)] + G0 [d(k); y(k)] <= g0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Guarantees<T> {
    g1: Matrix<T>,
    g0: Matrix<T>,
    rhs: Vec<T>,
}

impl<T: Scalar> Guarantees<T> {
    pub fn new(g1: Matrix<T>, g0: Matrix<T>, rhs: Vec<T>) -> Result<Self> {
        check_finite("guarantee g0", &rhs)?;
        let m = rhs.len();
        check_shape("guarantee G1", &g1, m, g1.cols())?;
        check_shape("guarantee G0", &g0, m, g1.cols())?;
        Ok(Self { g1, g0, rhs })
    }

    /// Guarantee with no rows over `width = n_d + n_y` columns.
    pub fn empty(width: usize) -> Self {
        Self {
            g1: Matrix::zeros(0, width),
            g0: Matrix::zeros(0, width),
            rhs: Vec::new(),
        }
    }

    pub fn g1(&self) -> &Matrix<T> {
        &self.g1
    }
    pub fn g0(&self) -> &Matrix<T> {
        &self.g0
    }
    pub fn rhs(&self) -> &[T] {
        &self.rhs
    }
    pub fn n_rows(&self) -> usize {
        self.rhs.len()
    }
    /// Column count, `n_d + n_y` of the paired system.
    pub fn width(&self) -> usize {
        self.g1.cols()
    }

    /// Per-row residual at the stacked samples `u0 = [d(k); y(k)]`,
    /// `u1 = [d(k+1); y(k+1)]`.
    pub fn residual(&self, u0: &[T], u1: &[T]) -> Result<Vec<T>> {
        one_step_residual(&self.g1, &self.g0, &self.rhs, u0, u1)
    }
}

fn one_step_residual<T: Scalar>(m1: &Matrix<T>, m0: &Matrix<T>, rhs: &[T], u0: &[T], u1: &[T]) -> Result<Vec<T>> {
    let a = m1.matvec(u1)?;
    let b = m0.matvec(u0)?;
    Ok((0..rhs.len())
        .map(|i| a[i].clone() + b[i].clone() - rhs[i].clone())
        .collect())
}

/// Assume/guarantee contract with linear one-step assumptions and guarantees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contract<T> {
    assumptions: Assumptions<T>,
    guarantees: Guarantees<T>,
}

impl<T: Scalar> Contract<T> {
    pub fn new(assumptions: Assumptions<T>, guarantees: Guarantees<T>) -> Result<Self> {
        if guarantees.width() < assumptions.n_d() {
            return Err(Error::dim(
                "guarantee width (n_d + n_y)",
                Shape(guarantees.n_rows(), assumptions.n_d()),
                Shape(guarantees.n_rows(), guarantees.width()),
            ));
        }
        Ok(Self {
            assumptions,
            guarantees,
        })
    }

    pub fn assumptions(&self) -> &Assumptions<T> {
        &self.assumptions
    }
    pub fn guarantees(&self) -> &Guarantees<T> {
        &self.guarantees
    }
    pub fn n_d(&self) -> usize {
        self.assumptions.n_d()
    }
    pub fn n_y(&self) -> usize {
        self.guarantees.width() - self.assumptions.n_d()
    }

    /// Checks that the contract talks about the same signals as `sys`.
    pub fn check_compatible(&self, sys: &System<T>) -> Result<()> {
        if self.n_d() != sys.n_d() {
            return Err(Error::dim(
                "contract input dimension",
                Shape(sys.n_d(), 1),
                Shape(self.n_d(), 1),
            ));
        }
        if self.guarantees.width() != sys.n_d() + sys.n_y() {
            return Err(Error::dim(
                "guarantee width (n_d + n_y)",
                Shape(self.guarantees.n_rows(), sys.n_d() + sys.n_y()),
                Shape(self.guarantees.n_rows(), self.guarantees.width()),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn m(rows: &[&[f64]]) -> Matrix<f64> {
        Matrix::from_f64_rows(rows)
    }

    #[test]
    fn follower_is_index_one() {
        let a = m(&[&[1.0, 0.1], &[-0.5, -0.05]]);
        assert_eq!(observability_index(&a, &Matrix::identity(2)).unwrap(), 1);
    }

    #[test]
    fn zero_scalar_system_is_index_one() {
        assert_eq!(observability_index(&m(&[&[0.0]]), &m(&[&[0.0]])).unwrap(), 1);
    }

    #[test]
    fn shift_chain_is_index_two() {
        let a = m(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let c = m(&[&[1.0, 0.0]]);
        // rank sequence by hand: O0 = [1 0] -> 1, O1 = [1 0; 0 1] -> 2, O2 adds [0 0] -> 2
        assert_eq!(c.rank_default(), 1);
        assert_eq!(c.vstack(&c.matmul(&a).unwrap()).unwrap().rank_default(), 2);
        assert_eq!(observability_index(&a, &c).unwrap(), 2);
    }

    #[test]
    fn index_is_capped_at_state_dimension() {
        // Three-step shift observed at the end: rank grows 1, 2, 3.
        let a = m(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], &[0.0, 0.0, 0.0]]);
        let c = m(&[&[1.0, 0.0, 0.0]]);
        assert_eq!(observability_index(&a, &c).unwrap(), 3);
    }

    #[test]
    fn observability_rejects_bad_shapes() {
        assert!(observability_index(&m(&[&[1.0, 2.0]]), &m(&[&[1.0, 0.0]])).is_err());
        assert!(observability_index(&Matrix::identity(2), &m(&[&[1.0]])).is_err());
    }

    #[test]
    fn exact_observability_index() {
        let a: Matrix<Rational> = Matrix::from_f64_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let c: Matrix<Rational> = Matrix::from_f64_rows(&[&[1.0, 0.0]]);
        assert_eq!(observability_index(&a, &c).unwrap(), 2);
    }

    #[test]
    fn system_validation_names_the_field() {
        let err = System::new(
            Matrix::<f64>::identity(2),
            Matrix::zeros(3, 1),
            Matrix::identity(2),
            Matrix::zeros(2, 1),
            None,
            None,
            InitialSet::unconstrained(2, 1),
        )
        .unwrap_err();
        assert!(err.to_string().contains("B"), "{err}");
    }

    #[test]
    fn static_gain_is_index_one_with_zero_offsets() {
        let s = System::<f64>::static_gain(Matrix::identity(2));
        assert_eq!((s.n_x(), s.n_d(), s.n_y(), s.obs_index()), (1, 2, 2, 1));
        assert_eq!(s.output(&[0.0], &[3.0, -4.0]).unwrap(), vec![3.0, -4.0]);
        assert!(System::<f64>::new(
            Matrix::zeros(0, 0),
            Matrix::zeros(0, 1),
            Matrix::zeros(1, 0),
            Matrix::identity(1),
            None,
            None,
            InitialSet::unconstrained(0, 1)
        )
        .is_err());
    }

    #[test]
    fn assumption_and_guarantee_validation() {
        let a1 = m(&[&[1.0, 0.0], &[-1.0, 0.0], &[0.0, 1.0], &[0.0, -1.0]]);
        let a0 = m(&[&[-1.0, -0.1], &[1.0, 0.1], &[0.0, -1.0], &[0.0, 1.0]]);
        assert!(Assumptions::new(a1.clone(), a0.clone(), vec![0.0, 0.0, 0.98, 0.98]).is_ok());
        assert!(Assumptions::new(a1, a0, vec![0.0, 0.98]).is_err());
        let g = Guarantees::<f64>::empty(4);
        assert_eq!(g.n_rows(), 0);
        assert!(Guarantees::new(m(&[&[0.0, 0.0]]), m(&[&[1.0, 0.0, 0.0]]), vec![0.0]).is_err());
        assert!(InitialSet::new(m(&[&[1.0]]), m(&[&[1.0], &[2.0]]), vec![0.0]).is_err());
    }
}
