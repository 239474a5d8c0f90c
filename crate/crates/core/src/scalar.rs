//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real-valued scalar the simulation and estimation code is generic over.
///
/// Implemented for `f32` and `f64`. Random draws and distribution quantiles
/// are computed in `f64` and narrowed, so both widths consume identical
/// random streams.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + LowerExp + Send + Sync + 'static
{
    /// Relative pivot threshold below which a design column is treated as
    /// linearly dependent on the preceding ones.
    fn rank_tolerance() -> Self;
}

impl Real for f64 {
    fn rank_tolerance() -> Self {
        1e-12
    }
}

impl Real for f32 {
    fn rank_tolerance() -> Self {
        1e-5
    }
}

/// Converts an `f64` literal or draw into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 is representable in every Real")
}

/// Widens `x` to `f64`.
#[inline]
pub fn widen<T: Real>(x: T) -> f64 {
    x.to_f64().expect("Real widens to f64")
}

/// Logistic link `1 / (1 + exp(-eta))`.
#[inline]
pub fn logistic<T: Real>(eta: T) -> T {
    T::one() / (T::one() + (-eta).exp())
}

/// Arithmetic mean; `None` for an empty slice.
pub fn mean<T: Real>(xs: &[T]) -> Option<T> {
    if xs.is_empty() {
        return None;
    }
    Some(xs.iter().copied().sum::<T>() / lit(xs.len() as f64))
}

/// Sample variance with `n - 1` denominator; zero for fewer than two values.
pub fn sample_variance<T: Real>(xs: &[T]) -> T {
    if xs.len() < 2 {
        return T::zero();
    }
    let m = mean(xs).unwrap();
    let ss: T = xs.iter().map(|&x| (x - m) * (x - m)).sum();
    ss / lit((xs.len() - 1) as f64)
}
