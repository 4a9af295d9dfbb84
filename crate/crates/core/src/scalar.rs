//! Scalar abstraction for the numerical kernels.
//!
//! Everything numeric in this crate is generic over [`Real`], which is any
//! floating-point type nalgebra can factorize and num-traits can convert.
//! The on-disk formats and the pipeline are pinned to `f64` (see the type
//! aliases at the crate root); `f32` instantiations exist for callers that
//! want cheap single-precision experiments.

use num_traits::{FromPrimitive, ToPrimitive};

/// Floating-point scalar usable by every solver in this crate.
pub trait Real:
    nalgebra::RealField + Copy + FromPrimitive + ToPrimitive + std::fmt::LowerExp + Send + Sync
{
    /// Lift an `f64` constant into the scalar type.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant not representable")
    }

    /// Lossy view as `f64`, used for reporting and cross-type comparisons.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar not convertible to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}
