//! Scalar abstraction shared by the deterministic numerics.
//!
//! Geometry, meshing and the finite-element eigensolver are written against
//! [`Real`], so they run in `f32` or `f64`. The Monte Carlo layer and the
//! experiment drivers use `f64` throughout.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar usable by the geometry, mesh and spectral modules.
pub trait Real:
    Float
    + FloatConst
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
    /// Converts an `f64` literal. Panics only for non-representable values,
    /// which never happens for the constants used in this crate.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Absolute geometric tolerance at coordinate magnitude `scale`:
    /// `1e-12` relative in `f64`, a few ulps in narrower types.
    #[inline]
    fn geom_tol(scale: Self) -> Self {
        let floor = Self::lit(1e-12).max(Self::epsilon() * Self::lit(64.0));
        floor * scale.max(Self::one())
    }
}

impl Real for f32 {}
impl Real for f64 {}
