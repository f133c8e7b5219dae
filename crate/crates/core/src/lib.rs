//! Assume/guarantee contracts for discrete-time affine LTI systems.
//!
//! A contract pairs one-step linear assumptions on the input signal,
//! `A1 d(k+1) + A0 d(k) <= a0`, with one-step linear guarantees on the
//! input/output pair, `G1 [d(k+1); y(k+1)] + G0 [d(k); y(k)] <= g0`.
//! Satisfaction is decided by a k-induction argument whose window length is
//! the observability index of the system; each induction step is a linear
//! program solved by the embedded simplex solver in [`lp`].
//!
//! The numerical core is generic over [`Scalar`], so the same code runs in
//! `f64`, `f32`, or exact [`Rational`] arithmetic. The type aliases below
//! name the common instantiations.

pub mod compose;
pub mod error;
pub mod linalg;
pub mod lp;
pub mod model;
pub mod refine;
pub mod scalar;
pub mod scenario;
pub mod sim;
pub mod verify;

pub use error::{Error, Result, Shape};
pub use linalg::Matrix;
pub use lp::{LinearProgram, LpOutcome, LpStatus};
pub use model::{Assumptions, Contract, Guarantees, InitialSet, System};
pub use refine::{check_refinement, psi_d, psi_omega, PsiValue, RefinementReport};
pub use scalar::{Rational, Scalar};
pub use verify::{compute_theta, verify_contract, Bound, ThetaValue, VerificationReport};

/// Verdict tolerance applied to theta and psi values.
pub const DEFAULT_TOLERANCE: f64 = 5e-9;

pub type Matrix64 = Matrix<f64>;
pub type LinearProgram64 = LinearProgram<f64>;
pub type System64 = System<f64>;
pub type Contract64 = Contract<f64>;
pub type VerificationReport64 = VerificationReport<f64>;
pub type RefinementReport64 = RefinementReport<f64>;

pub type MatrixQ = Matrix<Rational>;
pub type SystemQ = System<Rational>;
pub type ContractQ = Contract<Rational>;
