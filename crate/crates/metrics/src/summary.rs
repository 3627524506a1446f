//! Quartile and mean / standard-error summaries.

use num_traits::{Float, FromPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::MetricError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuartileSummary<T> {
    pub median: T,
    pub q1: T,
    pub q3: T,
    pub iqr: T,
    pub n: usize,
}

/// Median and quartiles by linear interpolation between order statistics
/// (the common "type 7" rule: for quantile q over n sorted points, take
/// position h = (n-1)q and interpolate between floor(h) and ceil(h)).
pub fn quartiles<T: Float + FromPrimitive>(values: &[T]) -> Result<QuartileSummary<T>, MetricError> {
    if values.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite metric values"));
    let q = |frac: f64| -> T {
        let h = (sorted.len() - 1) as f64 * frac;
        let lo = h.floor() as usize;
        let hi = h.ceil() as usize;
        let w = T::from_f64(h - lo as f64).expect("fraction fits scalar");
        sorted[lo] + w * (sorted[hi] - sorted[lo])
    };
    let q1 = q(0.25);
    let median = q(0.5);
    let q3 = q(0.75);
    Ok(QuartileSummary { median, q1, q3, iqr: q3 - q1, n: sorted.len() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSe<T> {
    pub mean: T,
    /// Sample standard deviation (n-1 denominator) divided by sqrt(n).
    pub se: T,
    pub n: usize,
}

/// Mean and standard error of the mean. Needs at least two values for the
/// standard error to be defined.
pub fn mean_se<T: Float + FromPrimitive>(values: &[T]) -> Result<MeanSe<T>, MetricError> {
    if values.len() < 2 {
        return Err(MetricError::TooFewValues { needed: 2, got: values.len() });
    }
    let n = T::from_usize(values.len()).expect("count fits scalar");
    let mean = values.iter().fold(T::zero(), |acc, &v| acc + v) / n;
    let ss = values.iter().fold(T::zero(), |acc, &v| acc + (v - mean) * (v - mean));
    let sd = (ss / (n - T::one())).sqrt();
    Ok(MeanSe { mean, se: sd / n.sqrt(), n: values.len() })
}
