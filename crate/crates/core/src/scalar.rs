//! Scalar abstraction shared by the numeric modules.
//!
//! The boosting engine, ranking metrics and the small statistics helpers are
//! written against [`Scalar`] so they run in `f32` or `f64`. Corpus-level
//! bookkeeping (relevance ledgers, feature rows) stays in `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + FromStr + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 literal representable")
    }

    fn from_usize_lossy(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("usize representable")
    }

    fn to_f64_lossy(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Summary statistics of a sample, population deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary<T> {
    pub sum: T,
    pub max: T,
    pub min: T,
    pub mean: T,
    pub median: T,
    pub deviation: T,
}

impl<T: Scalar> Summary<T> {
    /// All-zero summary, used for empty samples.
    pub fn zero() -> Self {
        let z = T::zero();
        Summary {
            sum: z,
            max: z,
            min: z,
            mean: z,
            median: z,
            deviation: z,
        }
    }

    /// Summarise `values`. An empty slice yields [`Summary::zero`].
    pub fn of(values: &[T]) -> Self {
        if values.is_empty() {
            return Self::zero();
        }
        let n = T::from_usize_lossy(values.len());
        let sum: T = values.iter().copied().sum();
        let mean = sum / n;
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
        let mid = sorted.len() / 2;
        let median = if sorted.len() % 2 == 1 {
            sorted[mid]
        } else {
            (sorted[mid - 1] + sorted[mid]) / T::lit(2.0)
        };
        let var = values
            .iter()
            .map(|&v| (v - mean) * (v - mean))
            .sum::<T>()
            / n;
        // mean of identical values can land one ulp outside [min, max]
        let min = sorted[0];
        let max = sorted[sorted.len() - 1];
        Summary {
            sum,
            max,
            min,
            mean: mean.max(min).min(max),
            median,
            deviation: var.sqrt(),
        }
    }

    /// Values in feature order: sum, max, min, avg, med, dev.
    pub fn to_array(self) -> [T; 6] {
        [
            self.sum,
            self.max,
            self.min,
            self.mean,
            self.median,
            self.deviation,
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_of_four() {
        let s = Summary::of(&[1.0_f64, 2.0, 3.0, 4.0]);
        assert_eq!(s.sum, 10.0);
        assert_eq!(s.max, 4.0);
        assert_eq!(s.min, 1.0);
        assert_eq!(s.mean, 2.5);
        assert_eq!(s.median, 2.5);
        // population deviation: sqrt(((1.5^2 + 0.5^2) * 2) / 4) = sqrt(1.25)
        assert!((s.deviation - 1.25_f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn summary_odd_and_empty() {
        let s = Summary::of(&[5.0_f32, 1.0, 3.0]);
        assert_eq!(s.median, 3.0);
        assert_eq!(Summary::<f64>::of(&[]), Summary::zero());
        let one = Summary::of(&[7.0_f64]);
        assert_eq!(one.deviation, 0.0);
        assert_eq!(one.median, 7.0);
    }
}
