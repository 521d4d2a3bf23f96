//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + NumAssign + Default + Debug + Display + Send + Sync + 'static
{
    /// Condition number beyond which a kernel matrix is treated as singular.
    const SINGULAR_CONDITION: f64;

    /// Converts an `f64` literal. Lossy for `f32`, never fails.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal is representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_f64(n as f64).expect("usize fits in a float")
    }
}

impl Real for f64 {
    const SINGULAR_CONDITION: f64 = 1e14;
}

impl Real for f32 {
    const SINGULAR_CONDITION: f64 = 1e6;
}

/// Complex number over a [`Real`] scalar.
pub type Cx<T> = Complex<T>;

#[inline]
pub(crate) fn cx<T: Real>(re: T, im: T) -> Cx<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn i_unit<T: Real>() -> Cx<T> {
    Complex::new(T::zero(), T::one())
}

#[inline]
pub(crate) fn real<T: Real>(re: T) -> Cx<T> {
    Complex::new(re, T::zero())
}

#[inline]
pub(crate) fn is_finite_cx<T: Real>(z: Cx<T>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Casts a complex value between scalar types.
#[inline]
pub fn cast_cx<S: Real, T: Real>(z: Cx<S>) -> Cx<T> {
    Complex::new(T::lit(z.re.as_f64()), T::lit(z.im.as_f64()))
}
