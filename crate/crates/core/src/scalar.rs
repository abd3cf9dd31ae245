//! Scalar abstraction for the floating-point kernels.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar accepted by the numeric kernels (`f32` or `f64`).
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Sum + Send + Sync + 'static
{
    /// Lossy conversion from `f64`; constants in the kernels are written as `f64`.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 constant representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite conversion")
    }
}

impl<T> Real for T where
    T: Float + FromPrimitive + ToPrimitive + Debug + Display + Sum + Send + Sync + 'static
{
}

pub fn l1_norm<F: Real>(v: &[F]) -> F {
    v.iter().map(|x| x.abs()).sum()
}

pub fn l2_norm<F: Real>(v: &[F]) -> F {
    v.iter().map(|&x| x * x).sum::<F>().sqrt()
}

pub fn linf_norm<F: Real>(v: &[F]) -> F {
    v.iter().fold(F::zero(), |m, x| m.max(x.abs()))
}

pub fn dot<F: Real>(a: &[F], b: &[F]) -> F {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Fractional part in `[0, 1)`. Guards the rounding case where `x - floor(x)`
/// evaluates to exactly one for tiny negative `x`.
pub fn frac<F: Real>(x: F) -> F {
    let f = x - x.floor();
    if f >= F::one() {
        F::zero()
    } else {
        f
    }
}
