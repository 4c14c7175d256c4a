//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar the computations are generic over: `f32` or `f64`.
///
/// Literals and tolerances are written as `f64` and brought in with
/// [`Scalar::lit`]; diagnostics and file output go back through
/// [`Scalar::as_f64`].
pub trait Scalar: RealField + Copy + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static {
    /// Converts an `f64` literal, rounding to the nearest representable value.
    #[inline]
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn is_finite_value(self) -> bool {
        self.as_f64().is_finite()
    }

    /// Machine epsilon as `f64`.
    fn epsilon_f64() -> f64;
}

impl Scalar for f32 {
    fn epsilon_f64() -> f64 {
        f32::EPSILON as f64
    }
}

impl Scalar for f64 {
    fn epsilon_f64() -> f64 {
        f64::EPSILON
    }
}

/// Largest absolute entry of a slice (zero for an empty slice).
pub(crate) fn max_abs<T: Scalar>(values: impl IntoIterator<Item = T>) -> T {
    values.into_iter().fold(T::zero(), |acc, v| if v.abs() > acc { v.abs() } else { acc })
}
