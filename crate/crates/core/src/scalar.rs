//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real floating-point scalar the operator algebra is generic over.
///
/// Tolerances scale with the precision of the type: `f64` uses the tight
/// structural/algebraic tolerances, `f32` relaxes them to what single
/// precision can actually resolve on 2^6-dimensional operators.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Default
    + Debug
    + Display
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Tolerance for structural invariants (trace preservation, positivity).
    fn structural_tol() -> Self;
    /// Tolerance for exact algebraic identities (Hermiticity, unit trace).
    fn exact_tol() -> Self;

    /// Lossless-enough conversion from an `f64` literal.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn of_usize(x: usize) -> Self {
        Self::from_usize(x).expect("integer representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar representable as f64")
    }
}

impl Real for f64 {
    fn structural_tol() -> Self {
        1e-9
    }
    fn exact_tol() -> Self {
        1e-10
    }
}

impl Real for f32 {
    fn structural_tol() -> Self {
        1e-4
    }
    fn exact_tol() -> Self {
        1e-5
    }
}

/// Complex scalar over a [`Real`].
pub type Cx<T> = Complex<T>;

#[inline]
pub(crate) fn cx<T: Real>(re: T, im: T) -> Cx<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn re<T: Real>(x: T) -> Cx<T> {
    Complex::new(x, T::zero())
}
