//! Scalar abstraction shared by the pointwise math (constitutive laws,
//! manufactured fields, quadrature rules, bound constants).
//!
//! Sparse assembly and the direct solver work in `f64` only; everything that
//! is evaluated point by point is written against [`Scalar`] so it can be
//! instantiated in `f32` for cheap sampling or `f64` for the solver.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating point type usable by the generic parts of the crate.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("literal representable in scalar type")
    }

    /// Conversion from a count.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
