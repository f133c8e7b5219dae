//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! All matrix, LP and verification code is written against [`Scalar`], which
//! is implemented for `f32`, `f64` and exact rationals ([`Rational`]). Floating
//! types carry a nonzero feasibility tolerance; the rational type uses exact
//! comparisons throughout.

use std::fmt::{Debug, Display};
use std::hash::{Hash, Hasher};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational number.
pub type Rational = BigRational;

/// Ordered field element usable by the linear algebra and simplex code.
pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialOrd
    + Num
    + Signed
    + FromPrimitive
    + ToPrimitive
    + Send
    + Sync
    + 'static
{
    /// Unit roundoff. Zero for exact types.
    fn epsilon() -> Self;

    /// Absolute tolerance used for feasibility checks and pivot classification.
    fn feas_tol() -> Self;

    fn is_finite(&self) -> bool;

    /// Feeds a canonical representation into `state`. Values that compare
    /// equal must hash equal.
    fn hash_into<H: Hasher>(&self, state: &mut H);

    /// Converts a finite `f64` literal. Panics on NaN or infinity.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).unwrap_or_else(|| panic!("non-finite scalar literal {x}"))
    }

    /// Exact ratio `num / den` of two integers.
    fn ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num).expect("integer conversion") / Self::from_i64(den).expect("integer conversion")
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }
}

impl Scalar for f64 {
    fn epsilon() -> Self {
        f64::EPSILON
    }

    fn feas_tol() -> Self {
        1e-9
    }

    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }

    fn hash_into<H: Hasher>(&self, state: &mut H) {
        // -0.0 == 0.0
        let v = if *self == 0.0 { 0.0f64 } else { *self };
        v.to_bits().hash(state);
    }
}

impl Scalar for f32 {
    fn epsilon() -> Self {
        f32::EPSILON
    }

    fn feas_tol() -> Self {
        1e-4
    }

    fn is_finite(&self) -> bool {
        f32::is_finite(*self)
    }

    fn hash_into<H: Hasher>(&self, state: &mut H) {
        let v = if *self == 0.0 { 0.0f32 } else { *self };
        v.to_bits().hash(state);
    }
}

impl Scalar for BigRational {
    fn epsilon() -> Self {
        Self::zero()
    }

    fn feas_tol() -> Self {
        Self::zero()
    }

    fn is_finite(&self) -> bool {
        true
    }

    fn hash_into<H: Hasher>(&self, state: &mut H) {
        // Ratio is always stored reduced with a positive denominator.
        self.hash(state);
    }

    fn ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
}
