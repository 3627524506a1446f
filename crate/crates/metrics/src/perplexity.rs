//! Perplexity from per-token log probabilities.

use num_traits::Float;

use crate::error::MetricError;

/// `exp(-mean(log_probs))` over natural-log token probabilities.
///
/// The whole text is scored in one window; inputs must be valid log
/// probabilities (each ≤ 0), which pins the result to ≥ 1.
pub fn perplexity<T: Float>(log_probs: &[T]) -> Result<T, MetricError> {
    if log_probs.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    let mut sum = T::zero();
    for &lp in log_probs {
        if lp > T::zero() {
            return Err(MetricError::PositiveLogProb {
                value: lp.to_f64().unwrap_or(f64::NAN),
            });
        }
        sum = sum + lp;
    }
    let n = T::from(log_probs.len()).expect("length fits scalar");
    Ok((-(sum / n)).exp())
}
