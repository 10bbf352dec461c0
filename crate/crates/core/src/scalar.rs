//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point type the numeric code is generic over.
///
/// Implemented for `f32` and `f64`. Code that needs a literal should go
/// through [`Scalar::lit`] rather than `from_f64(..).unwrap()` sprinkled
/// around call sites.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal into `Self`, rounding if needed.
    fn lit(x: f64) -> Self;

    /// Converts a count into `Self`.
    fn from_count(n: usize) -> Self {
        Self::lit(n as f64)
    }

    /// Lossy conversion to `f64` for reporting.
    fn as_f64(self) -> f64;

    /// Loose tolerance scaled to the precision of the type.
    fn tolerance() -> Self;
}

impl Scalar for f32 {
    fn lit(x: f64) -> Self {
        x as f32
    }

    fn as_f64(self) -> f64 {
        self as f64
    }

    fn tolerance() -> Self {
        1e-5
    }
}

impl Scalar for f64 {
    fn lit(x: f64) -> Self {
        x
    }

    fn as_f64(self) -> f64 {
        self
    }

    fn tolerance() -> Self {
        1e-10
    }
}
