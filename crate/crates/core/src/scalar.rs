use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point type the evaluation engine is generic over.
///
/// Implemented for `f32` and `f64`. Every tolerance the engine uses is
/// expressed through [`Scalar::tolerance`] so that the same checks run at
/// either precision.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Absolute tolerance for equality and inequality comparisons of values.
    fn tolerance() -> Self;

    fn from_count(c: u64) -> Self {
        Self::from_u64(c).expect("count representable as float")
    }

    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn half() -> Self {
        Self::from_f64_lossy(0.5)
    }

    fn two() -> Self {
        Self::one() + Self::one()
    }
}

impl Scalar for f32 {
    fn tolerance() -> Self {
        1e-5
    }
}

impl Scalar for f64 {
    fn tolerance() -> Self {
        1e-12
    }
}
