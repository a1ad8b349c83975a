//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar the estimators and generators are written against.
///
/// Implemented for `f32` and `f64`. Probability-distribution tail areas are
/// evaluated in `f64` and converted back, so `f32` callers get `f32`-rounded
/// p-values from `f64`-accurate special functions.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Convergence threshold on the score vector for Newton-Raphson fits.
    fn score_tolerance() -> Self;

    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    /// Rounding noise expected when evaluating a sum of magnitude `self`;
    /// likelihood comparisons within it are treated as ties.
    #[inline]
    fn rounding_slack(self) -> Self {
        Self::epsilon() * Self::lit(256.0) * (Self::one() + self.abs())
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite conversion to f64")
    }
}

impl Real for f64 {
    fn score_tolerance() -> Self {
        1e-8
    }
}

impl Real for f32 {
    fn score_tolerance() -> Self {
        1e-3
    }
}

/// Floor of `x` clamped into `[lo, hi]`, as an integer category.
pub fn floor_clamp<T: Real>(x: T, lo: u16, hi: u16) -> u16 {
    let f = x.floor();
    if !(f >= T::from_u16(lo).unwrap()) {
        // NaN lands here as well.
        lo
    } else if f >= T::from_u16(hi).unwrap() {
        hi
    } else {
        f.to_u16().unwrap_or(lo)
    }
}
