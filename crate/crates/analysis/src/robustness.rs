//! Classifier-robustness scoring: macro P/R/F1 per (model, claim group)
//! plus the per-model degradation from original claims to the worst
//! generated round.

use std::collections::BTreeMap;

use claimdrift_core::ConsolidatedLabel;
use claimdrift_metrics::{macro_prf_with_extra_fn, ConfusionTable, Scalar, Scores};
use serde::{Deserialize, Serialize};

use crate::error::AnalysisError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ClaimGroup {
    Original,
    Round1,
    Round2,
    Round3,
}

impl ClaimGroup {
    pub const ALL: [ClaimGroup; 4] =
        [ClaimGroup::Original, ClaimGroup::Round1, ClaimGroup::Round2, ClaimGroup::Round3];

    pub fn from_round(round: u8) -> ClaimGroup {
        match round {
            0 => ClaimGroup::Original,
            1 => ClaimGroup::Round1,
            2 => ClaimGroup::Round2,
            _ => ClaimGroup::Round3,
        }
    }

    pub fn display_name(&self) -> &'static str {
        match self {
            ClaimGroup::Original => "Original",
            ClaimGroup::Round1 => "Round 1",
            ClaimGroup::Round2 => "Round 2",
            ClaimGroup::Round3 => "Round 3",
        }
    }
}

/// One prediction-file row. `label: None` records an abstention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub node_id: String,
    pub label: Option<ConsolidatedLabel>,
    pub model_tag: String,
    pub strategy_tag: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessCell {
    pub model_tag: String,
    pub group: ClaimGroup,
    pub scores: Scores,
    pub n: usize,
    pub abstentions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegradationRow {
    pub model_tag: String,
    pub original_f1: Scalar,
    pub min_round_f1: Scalar,
    /// F1 drop in percentage points.
    pub drop_points: Scalar,
    /// Relative drop as a percentage of the original F1.
    pub drop_percent: Scalar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub cells: Vec<RobustnessCell>,
    pub degradation: Vec<DegradationRow>,
    /// (model_tag, group) combinations with no predictions at all.
    pub missing_groups: Vec<(String, ClaimGroup)>,
}

/// Score predictions against gold `(group, label)` assignments. Cells come
/// back sorted by (model_tag, group), independent of row order.
pub fn robustness_report(
    gold: &BTreeMap<String, (ClaimGroup, ConsolidatedLabel)>,
    predictions: &[PredictionRow],
) -> Result<RobustnessReport, AnalysisError> {
    if predictions.is_empty() {
        return Err(AnalysisError::EmptyInput);
    }

    let mut tables: BTreeMap<(String, ClaimGroup), (ConfusionTable, [u64; 3], usize)> =
        BTreeMap::new();
    for row in predictions {
        let Some(&(group, gold_label)) = gold.get(&row.node_id) else {
            return Err(AnalysisError::UnresolvedNode(row.node_id.clone()));
        };
        let entry = tables.entry((row.model_tag.clone(), group)).or_default();
        match row.label {
            Some(predicted) => entry.0.record(gold_label, predicted),
            None => {
                entry.1[gold_label.index()] += 1;
                entry.2 += 1;
            }
        }
    }

    let mut cells = Vec::new();
    let mut by_model: BTreeMap<String, BTreeMap<ClaimGroup, Scalar>> = BTreeMap::new();
    for ((model_tag, group), (table, extra_fn, abstentions)) in &tables {
        let scores = macro_prf_with_extra_fn::<Scalar>(table, *extra_fn)?;
        let n = table.total() as usize + abstentions;
        by_model.entry(model_tag.clone()).or_default().insert(*group, scores.f1);
        cells.push(RobustnessCell {
            model_tag: model_tag.clone(),
            group: *group,
            scores,
            n,
            abstentions: *abstentions,
        });
    }

    let mut missing_groups = Vec::new();
    for model_tag in by_model.keys() {
        for group in ClaimGroup::ALL {
            if !tables.contains_key(&(model_tag.clone(), group)) {
                missing_groups.push((model_tag.clone(), group));
            }
        }
    }

    let degradation = degradation_rows(&by_model);
    Ok(RobustnessReport { cells, degradation, missing_groups })
}

/// Per-model degradation = F1(Original) minus the minimum round F1,
/// reported both in percentage points and relative to the original.
pub fn degradation_rows(
    f1_by_model: &BTreeMap<String, BTreeMap<ClaimGroup, Scalar>>,
) -> Vec<DegradationRow> {
    let mut rows = Vec::new();
    for (model_tag, groups) in f1_by_model {
        let Some(&original_f1) = groups.get(&ClaimGroup::Original) else { continue };
        let min_round_f1 = [ClaimGroup::Round1, ClaimGroup::Round2, ClaimGroup::Round3]
            .iter()
            .filter_map(|g| groups.get(g))
            .copied()
            .fold(Scalar::INFINITY, Scalar::min);
        if !min_round_f1.is_finite() {
            continue;
        }
        let drop = original_f1 - min_round_f1;
        rows.push(DegradationRow {
            model_tag: model_tag.clone(),
            original_f1,
            min_round_f1,
            drop_points: drop * 100.0,
            drop_percent: if original_f1 > 0.0 { 100.0 * drop / original_f1 } else { 0.0 },
        });
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gold_map(n_per_group: usize) -> BTreeMap<String, (ClaimGroup, ConsolidatedLabel)> {
        let mut gold = BTreeMap::new();
        for group in ClaimGroup::ALL {
            for i in 0..n_per_group {
                let label = ConsolidatedLabel::ALL[i % 3];
                gold.insert(format!("{group:?}-{i}"), (group, label));
            }
        }
        gold
    }

    #[test]
    fn perfect_predictions_have_zero_degradation() {
        let gold = gold_map(9);
        let predictions: Vec<PredictionRow> = gold
            .iter()
            .map(|(node_id, &(_, label))| PredictionRow {
                node_id: node_id.clone(),
                label: Some(label),
                model_tag: "modelA".into(),
                strategy_tag: "fine-tuned".into(),
            })
            .collect();
        let report = robustness_report(&gold, &predictions).unwrap();
        assert_eq!(report.cells.len(), 4);
        for cell in &report.cells {
            assert!((cell.scores.f1 - 1.0).abs() < 1e-12);
            assert_eq!(cell.abstentions, 0);
        }
        assert_eq!(report.degradation.len(), 1);
        assert!(report.degradation[0].drop_points.abs() < 1e-9);
        assert!(report.missing_groups.is_empty());
    }

    #[test]
    fn encoder_fixture_reproduces_reported_degradation() {
        // F1 0.717 on originals, minimum round F1 0.361: a drop of 35.6
        // points, 49.7% of the original score.
        let mut by_model = BTreeMap::new();
        let mut groups = BTreeMap::new();
        groups.insert(ClaimGroup::Original, 0.717);
        groups.insert(ClaimGroup::Round1, 0.361);
        groups.insert(ClaimGroup::Round2, 0.375);
        groups.insert(ClaimGroup::Round3, 0.378);
        by_model.insert("encoder-large".to_string(), groups);
        let rows = degradation_rows(&by_model);
        assert_eq!(rows.len(), 1);
        assert!((rows[0].drop_points - 35.6).abs() < 0.1, "{}", rows[0].drop_points);
        assert!((rows[0].drop_percent - 49.7).abs() < 0.1, "{}", rows[0].drop_percent);
    }

    #[test]
    fn row_order_does_not_matter() {
        let gold = gold_map(6);
        let mut predictions: Vec<PredictionRow> = gold
            .iter()
            .enumerate()
            .map(|(i, (node_id, &(_, label)))| PredictionRow {
                node_id: node_id.clone(),
                label: if i % 5 == 0 { None } else { Some(label) },
                model_tag: "m".into(),
                strategy_tag: "s".into(),
            })
            .collect();
        let forward = robustness_report(&gold, &predictions).unwrap();
        predictions.reverse();
        let backward = robustness_report(&gold, &predictions).unwrap();
        assert_eq!(forward, backward);
    }

    #[test]
    fn unresolved_node_is_an_error() {
        let gold = gold_map(3);
        let predictions = vec![PredictionRow {
            node_id: "nowhere".into(),
            label: Some(ConsolidatedLabel::True),
            model_tag: "m".into(),
            strategy_tag: "s".into(),
        }];
        assert!(matches!(
            robustness_report(&gold, &predictions).unwrap_err(),
            AnalysisError::UnresolvedNode(_)
        ));
    }

    #[test]
    fn missing_group_is_reported_not_fatal() {
        let gold = gold_map(3);
        let predictions: Vec<PredictionRow> = gold
            .iter()
            .filter(|(_, &(group, _))| group != ClaimGroup::Round2)
            .map(|(node_id, &(_, label))| PredictionRow {
                node_id: node_id.clone(),
                label: Some(label),
                model_tag: "m".into(),
                strategy_tag: "s".into(),
            })
            .collect();
        let report = robustness_report(&gold, &predictions).unwrap();
        assert_eq!(report.missing_groups, vec![("m".to_string(), ClaimGroup::Round2)]);
    }

    #[test]
    fn abstentions_count_and_lower_f1() {
        let gold = gold_map(9);
        let with_abstentions: Vec<PredictionRow> = gold
            .iter()
            .enumerate()
            .map(|(i, (node_id, &(_, label)))| PredictionRow {
                node_id: node_id.clone(),
                label: if i % 3 == 0 { None } else { Some(label) },
                model_tag: "m".into(),
                strategy_tag: "s".into(),
            })
            .collect();
        let report = robustness_report(&gold, &with_abstentions).unwrap();
        for cell in &report.cells {
            assert!(cell.abstentions > 0);
            assert!(cell.scores.f1 < 1.0);
            assert_eq!(cell.n, 9);
        }
    }
}
