//! Binned Jensen-Shannon distance between two rating pools.
//!
//! Convention used throughout the project: the *distance* form (square
//! root of the divergence) with natural-log KL terms, so values live in
//! `[0, sqrt(ln 2)]`. Report headers state this convention so readers can
//! rescale to other bases.

use num_traits::{Float, FromPrimitive};

use crate::error::MetricError;

/// Two rating pools over a shared ordered category set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgreementInput {
    pub ratings_a: Vec<i64>,
    pub ratings_b: Vec<i64>,
    /// Ordered category list; every rating must be one of these.
    pub bins: Vec<i64>,
}

impl AgreementInput {
    pub fn new(ratings_a: Vec<i64>, ratings_b: Vec<i64>, bins: Vec<i64>) -> Self {
        AgreementInput { ratings_a, ratings_b, bins }
    }
}

/// Upper bound of the distance: `sqrt(ln 2)`.
pub fn jsd_max<T: Float>() -> T {
    (T::one() + T::one()).ln().sqrt()
}

/// Jensen-Shannon distance between the binned histograms of the two pools.
pub fn binned_jsd<T: Float + FromPrimitive>(input: &AgreementInput) -> Result<T, MetricError> {
    if input.ratings_a.is_empty() || input.ratings_b.is_empty() || input.bins.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    let p = histogram::<T>(&input.ratings_a, &input.bins)?;
    let q = histogram::<T>(&input.ratings_b, &input.bins)?;

    let half = T::from_f64(0.5).expect("constant fits scalar");
    let mut divergence = T::zero();
    for (&pi, &qi) in p.iter().zip(q.iter()) {
        let mi = half * (pi + qi);
        if pi > T::zero() {
            divergence = divergence + half * pi * (pi / mi).ln();
        }
        if qi > T::zero() {
            divergence = divergence + half * qi * (qi / mi).ln();
        }
    }
    // Tiny negative values can appear from cancellation when P == Q.
    Ok(divergence.max(T::zero()).sqrt())
}

fn histogram<T: Float + FromPrimitive>(ratings: &[i64], bins: &[i64]) -> Result<Vec<T>, MetricError> {
    let mut counts = vec![0usize; bins.len()];
    for &r in ratings {
        let idx = bins
            .iter()
            .position(|&b| b == r)
            .ok_or(MetricError::RatingOutsideBins { value: r })?;
        counts[idx] += 1;
    }
    let total = T::from_usize(ratings.len()).expect("count fits scalar");
    Ok(counts
        .into_iter()
        .map(|c| T::from_usize(c).expect("count fits scalar") / total)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute-force oracle: explicit KL(P‖M) and KL(Q‖M) sums from scratch.
    fn oracle_jsd(p: &[f64], q: &[f64]) -> f64 {
        let kl = |a: &[f64], b: &[f64]| -> f64 {
            a.iter()
                .zip(b)
                .map(|(&x, &y)| if x == 0.0 { 0.0 } else { x * (x / y).ln() })
                .sum()
        };
        let m: Vec<f64> = p.iter().zip(q).map(|(&x, &y)| 0.5 * (x + y)).collect();
        (0.5 * (kl(p, &m) + kl(q, &m))).max(0.0).sqrt()
    }

    #[test]
    fn identical_pools_give_zero() {
        let input = AgreementInput::new(vec![1, 2, 2, 5], vec![2, 1, 5, 2], vec![1, 2, 3, 4, 5]);
        let d: f64 = binned_jsd(&input).unwrap();
        assert!(d.abs() < 1e-12);
    }

    #[test]
    fn disjoint_pools_hit_the_bound() {
        let input = AgreementInput::new(vec![1, 1, 2], vec![4, 5, 5], vec![1, 2, 3, 4, 5]);
        let d: f64 = binned_jsd(&input).unwrap();
        assert!((d - 2.0f64.ln().sqrt()).abs() < 1e-12);
        assert!((jsd_max::<f64>() - 0.832554611).abs() < 1e-9);
    }

    #[test]
    fn matches_hand_oracle_on_point_vs_even() {
        // P = (1, 0), Q = (0.5, 0.5).
        let input = AgreementInput::new(vec![1, 1], vec![1, 2], vec![1, 2]);
        let d: f64 = binned_jsd(&input).unwrap();
        let expected = oracle_jsd(&[1.0, 0.0], &[0.5, 0.5]);
        assert!((d - expected).abs() < 1e-12);
        // Same value written out from the definition:
        // sqrt((ln(4/3) + 0.5 ln(2/3) + 0.5 ln 2) / 2).
        let by_hand = ((4f64 / 3.0).ln() * 0.5 + 0.25 * (2f64 / 3.0).ln() + 0.25 * 2f64.ln()).sqrt();
        assert!((d - by_hand).abs() < 1e-12);
    }

    #[test]
    fn symmetric_and_bounded_on_random_pools() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let bins = vec![1, 2, 3, 4, 5];
        for _ in 0..500 {
            let a: Vec<i64> = (0..rng.gen_range(1..30)).map(|_| rng.gen_range(1..=5)).collect();
            let b: Vec<i64> = (0..rng.gen_range(1..30)).map(|_| rng.gen_range(1..=5)).collect();
            let ab: f64 =
                binned_jsd(&AgreementInput::new(a.clone(), b.clone(), bins.clone())).unwrap();
            let ba: f64 = binned_jsd(&AgreementInput::new(b, a, bins.clone())).unwrap();
            assert!((ab - ba).abs() < 1e-12);
            assert!(ab >= 0.0 && ab <= jsd_max::<f64>() + 1e-12);
        }
    }

    #[test]
    fn rejects_empty_and_unknown_ratings() {
        let empty = AgreementInput::new(vec![], vec![1], vec![1, 2]);
        assert_eq!(binned_jsd::<f64>(&empty).unwrap_err(), MetricError::EmptyInput);
        let outside = AgreementInput::new(vec![9], vec![1], vec![1, 2]);
        assert_eq!(
            binned_jsd::<f64>(&outside).unwrap_err(),
            MetricError::RatingOutsideBins { value: 9 }
        );
    }
}
