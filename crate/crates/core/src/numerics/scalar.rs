use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar used by every numeric routine in the crate: f32 or f64.
///
/// The library is exercised and validated in 64-bit; the 32-bit instantiation
/// exists for memory-bound inference and is not gradient-checked.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an f64 literal; exact for f64, rounded for f32.
    fn lit(x: f64) -> Self;

    /// Widening conversion used by I/O and reporting.
    fn as_f64(self) -> f64;

    /// Clipping constant applied before taking logarithms of probabilities.
    ///
    /// 1e-12 in 64-bit; widened to the type's epsilon where 1 - 1e-12 would
    /// round to 1.
    fn log_clip() -> Self {
        Self::lit(1e-12).max(Self::epsilon())
    }
}

impl Real for f64 {
    #[inline]
    fn lit(x: f64) -> Self {
        x
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self
    }
}

impl Real for f32 {
    #[inline]
    fn lit(x: f64) -> Self {
        x as f32
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self as f64
    }
}
