//! Scalar abstraction so the numerics run at f32 or f64.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign};

/// Floating-point scalar used throughout the crate.
///
/// Everything downstream (gamma evaluation, eigensolver, samplers,
/// optimizers) is written against this trait; `f64` is the precision the
/// tolerances in the test suite are stated for, `f32` compiles and runs but
/// loosens them.
pub trait Scalar:
    Float + FromPrimitive + NumAssign + Sum + Debug + Display + Send + Sync + 'static
{
    /// Lossless-enough conversion from an `f64` constant.
    fn from_f64_c(value: f64) -> Self {
        Self::from_f64(value).expect("f64 constant must convert into scalar type")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
