//! Confusion tables and macro-averaged precision/recall/F1 over the
//! three-way label scheme.

use claimdrift_core::ConsolidatedLabel;
use num_traits::{Float, FromPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::MetricError;

/// 3x3 count matrix indexed `(gold, predicted)` in the fixed label order
/// True, Half True, False.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionTable {
    pub counts: [[u64; 3]; 3],
}

impl ConfusionTable {
    pub fn new() -> Self {
        ConfusionTable::default()
    }

    pub fn from_counts(counts: [[u64; 3]; 3]) -> Self {
        ConfusionTable { counts }
    }

    pub fn record(&mut self, gold: ConsolidatedLabel, predicted: ConsolidatedLabel) {
        self.counts[gold.index()][predicted.index()] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn true_positives(&self, class: usize) -> u64 {
        self.counts[class][class]
    }

    pub fn false_positives(&self, class: usize) -> u64 {
        (0..3).filter(|&g| g != class).map(|g| self.counts[g][class]).sum()
    }

    pub fn false_negatives(&self, class: usize) -> u64 {
        (0..3).filter(|&p| p != class).map(|p| self.counts[class][p]).sum()
    }
}

/// Macro-averaged scores with per-class breakdown.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MacroScores<T> {
    pub precision: T,
    pub recall: T,
    pub f1: T,
    pub per_class_precision: [T; 3],
    pub per_class_recall: [T; 3],
    pub per_class_f1: [T; 3],
}

/// Macro precision/recall/F1 with the 0/0 := 0 convention for classes that
/// are never predicted or never appear in gold.
pub fn macro_prf<T: Float + FromPrimitive>(
    table: &ConfusionTable,
) -> Result<MacroScores<T>, MetricError> {
    if table.total() == 0 {
        return Err(MetricError::EmptyTable);
    }
    macro_prf_with_extra_fn(table, [0, 0, 0])
}

/// Same as [`macro_prf`] but with extra per-class false negatives folded
/// into recall. Used to score abstentions (rows where a classifier failed
/// to answer) as wrong for the gold class.
pub fn macro_prf_with_extra_fn<T: Float + FromPrimitive>(
    table: &ConfusionTable,
    extra_fn: [u64; 3],
) -> Result<MacroScores<T>, MetricError> {
    if table.total() == 0 && extra_fn.iter().all(|&n| n == 0) {
        return Err(MetricError::EmptyTable);
    }
    let ratio = |num: u64, den: u64| -> T {
        if den == 0 {
            T::zero()
        } else {
            T::from_u64(num).expect("count fits scalar") / T::from_u64(den).expect("count fits scalar")
        }
    };
    let mut precision = [T::zero(); 3];
    let mut recall = [T::zero(); 3];
    let mut f1 = [T::zero(); 3];
    for class in 0..3 {
        let tp = table.true_positives(class);
        let fp = table.false_positives(class);
        let fn_ = table.false_negatives(class) + extra_fn[class];
        precision[class] = ratio(tp, tp + fp);
        recall[class] = ratio(tp, tp + fn_);
        let denom = precision[class] + recall[class];
        f1[class] = if denom > T::zero() {
            let two = T::one() + T::one();
            two * precision[class] * recall[class] / denom
        } else {
            T::zero()
        };
    }
    let three = T::from_u64(3).expect("constant fits scalar");
    let mean = |xs: &[T; 3]| (xs[0] + xs[1] + xs[2]) / three;
    Ok(MacroScores {
        precision: mean(&precision),
        recall: mean(&recall),
        f1: mean(&f1),
        per_class_precision: precision,
        per_class_recall: recall,
        per_class_f1: f1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_table_is_perfect() {
        let table = ConfusionTable::from_counts([[4, 0, 0], [0, 9, 0], [0, 0, 2]]);
        let scores: MacroScores<f64> = macro_prf(&table).unwrap();
        assert!((scores.precision - 1.0).abs() < 1e-12);
        assert!((scores.recall - 1.0).abs() < 1e-12);
        assert!((scores.f1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn absent_class_pulls_macro_down_a_third() {
        // Half True never predicted and never gold; the other two classes
        // are perfect.
        let table = ConfusionTable::from_counts([[5, 0, 0], [0, 0, 0], [0, 0, 5]]);
        let scores: MacroScores<f64> = macro_prf(&table).unwrap();
        assert!((scores.f1 - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(scores.per_class_f1[1], 0.0);
    }

    #[test]
    fn hand_computed_mixed_table() {
        // Gold rows x predicted columns.
        let table = ConfusionTable::from_counts([[5, 2, 0], [1, 6, 1], [0, 2, 4]]);
        let scores: MacroScores<f64> = macro_prf(&table).unwrap();
        // Per-class arithmetic done by hand:
        //   class 0: P = 5/6, R = 5/7, F = 10/13
        //   class 1: P = 6/10, R = 6/8, F = 2/3
        //   class 2: P = 4/5, R = 4/6, F = 8/11
        let expected_p = (5.0 / 6.0 + 6.0 / 10.0 + 4.0 / 5.0) / 3.0;
        let expected_r = (5.0 / 7.0 + 6.0 / 8.0 + 4.0 / 6.0) / 3.0;
        let expected_f = (10.0 / 13.0 + 2.0 / 3.0 + 8.0 / 11.0) / 3.0;
        assert!((scores.precision - expected_p).abs() < 1e-12);
        assert!((scores.recall - expected_r).abs() < 1e-12);
        assert!((scores.f1 - expected_f).abs() < 1e-12);
    }

    #[test]
    fn empty_table_is_an_error() {
        assert_eq!(
            macro_prf::<f64>(&ConfusionTable::new()).unwrap_err(),
            MetricError::EmptyTable
        );
    }

    #[test]
    fn abstentions_lower_recall_only() {
        let table = ConfusionTable::from_counts([[5, 0, 0], [0, 5, 0], [0, 0, 5]]);
        let clean: MacroScores<f64> = macro_prf_with_extra_fn(&table, [0, 0, 0]).unwrap();
        let with_abstain: MacroScores<f64> = macro_prf_with_extra_fn(&table, [5, 0, 0]).unwrap();
        assert!((clean.f1 - 1.0).abs() < 1e-12);
        assert!((with_abstain.precision - 1.0).abs() < 1e-12);
        assert!((with_abstain.per_class_recall[0] - 0.5).abs() < 1e-12);
        assert!(with_abstain.f1 < clean.f1);
    }
}
