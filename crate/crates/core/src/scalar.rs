//! Scalar abstraction shared by every geometric and numeric routine.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point type the reconstruction is generic over: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Absolute slack used by feasibility and incidence predicates.
    const TOLERANCE: f64;

    /// Converts an `f64` literal. Every literal used by the crate is representable.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(v: usize) -> Self {
        Self::from_usize(v).expect("usize representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Geometric tolerance as a value of this type.
    #[inline]
    fn tol() -> Self {
        Self::lit(Self::TOLERANCE)
    }
}

impl Real for f32 {
    const TOLERANCE: f64 = 1e-4;
}

impl Real for f64 {
    const TOLERANCE: f64 = 1e-7;
}

/// Total order for floats that never sees NaN in this crate.
#[inline]
pub(crate) fn cmp_real<T: Real>(a: &T, b: &T) -> std::cmp::Ordering {
    a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal)
}
