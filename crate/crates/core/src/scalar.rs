//! Numeric field abstraction for the metric engine.

use std::fmt::{Debug, Display};

use num_traits::{Num, NumAssign, Signed, ToPrimitive};

use crate::rational::Rational;

/// An ordered field the Kantorovich solver and fixed-point iterations run over.
///
/// Exact instantiations pivot on exact sign tests; floating ones use a small
/// tolerance so rounding noise does not trigger spurious pivots.
pub trait Scalar: Clone + Debug + Display + PartialOrd + Num + NumAssign + Signed + Send + Sync + 'static {
    /// Whether arithmetic is exact (no rounding).
    const EXACT: bool;

    fn from_rational(r: &Rational) -> Self;

    fn to_f64(&self) -> f64;

    /// Reduced costs below `-pivot_tolerance()` trigger a pivot.
    fn pivot_tolerance() -> Self;

    fn max_of(a: Self, b: Self) -> Self {
        if a >= b {
            a
        } else {
            b
        }
    }

    fn min_of(a: Self, b: Self) -> Self {
        if a <= b {
            a
        } else {
            b
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_rational(r: &Rational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn pivot_tolerance() -> Self {
        1e-12
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;

    fn from_rational(r: &Rational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN) as f32
    }

    fn to_f64(&self) -> f64 {
        *self as f64
    }

    fn pivot_tolerance() -> Self {
        1e-6
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn to_f64(&self) -> f64 {
        crate::rational::to_f64(self)
    }

    fn pivot_tolerance() -> Self {
        num_traits::Zero::zero()
    }
}
