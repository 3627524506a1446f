//! Unit-vector helpers and cosine similarity.

use num_traits::Float;

use crate::error::MetricError;

pub fn l2_norm<T: Float>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt()
}

/// Normalize in place; zero vectors are left untouched.
pub fn l2_normalize<T: Float>(v: &mut [T]) {
    let norm = l2_norm(v);
    if norm > T::zero() {
        for x in v.iter_mut() {
            *x = *x / norm;
        }
    }
}

/// Cosine similarity of two unit vectors: their dot product. Inputs are
/// assumed normalized (the gateway normalizes every embedding it returns).
pub fn cosine<T: Float>(u: &[T], v: &[T]) -> Result<T, MetricError> {
    if u.len() != v.len() {
        return Err(MetricError::DimensionMismatch { left: u.len(), right: v.len() });
    }
    Ok(u.iter().zip(v).fold(T::zero(), |acc, (&a, &b)| acc + a * b))
}
