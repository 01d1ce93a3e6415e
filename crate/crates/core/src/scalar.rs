use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Coordinate and filtration-value type: `f32` or `f64`.
///
/// Distances, filtration values, and diagram coordinates are all carried in
/// this type. Everything probabilistic (samplers, bounds, Monte Carlo) works
/// in `f64` and converts at the boundary.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + FromStr + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from `f64`. Panics only if the target cannot represent
    /// the value at all, which no finite `f64` triggers for `f32`/`f64`.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("scalar conversion from f64")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar conversion to f64")
    }
}

impl<T> Scalar for T where
    T: Float + FromPrimitive + ToPrimitive + FromStr + Debug + Display + Default + Send + Sync + 'static
{
}

/// Total order on non-NaN scalars. Point clouds reject NaN at construction,
/// so every distance and filtration value reaching this is comparable.
pub(crate) fn cmp_scalar<T: Scalar>(a: T, b: T) -> std::cmp::Ordering {
    a.partial_cmp(&b).expect("NaN filtration value")
}
