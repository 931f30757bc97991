//! Scalar abstraction over the floating-point type.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar for opinions, fusion, and training.
///
/// Implemented for `f32` and `f64`; the crate-root aliases pick `f64`.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` constant into this scalar type.
    fn num(x: f64) -> Self {
        Self::from_f64(x).expect("constant must be representable")
    }

    /// Views this scalar as `f64`, for error reporting and output.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `n` as a scalar (exact for the small counts used here).
    fn count(n: usize) -> Self {
        Self::from_usize(n).expect("count must be representable")
    }

    /// Absolute tolerance for invariant checks.
    fn invariant_tol() -> Self;

    /// Constructors renormalize additivity residuals below this bound and
    /// reject anything larger.
    fn renorm_tol() -> Self;

    /// Residuals below this are working-precision noise; constructors keep
    /// such values bit-exact instead of rescaling them, which makes
    /// renormalization idempotent (and JSON round trips lossless).
    fn renorm_skip(k: usize) -> Self {
        Self::epsilon() * Self::count(k.max(32))
    }
}

impl Real for f32 {
    fn invariant_tol() -> Self {
        1e-4
    }

    fn renorm_tol() -> Self {
        1e-5
    }
}

impl Real for f64 {
    fn invariant_tol() -> Self {
        1e-9
    }

    fn renorm_tol() -> Self {
        1e-12
    }
}
