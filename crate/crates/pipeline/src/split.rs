//! Class balancing and the train/dev/test split.
//!
//! Every class is sampled down (seeded, uniform) to a common size (the
//! smallest class unless a lower cap is given), then partitioned by the
//! ratios with floor rounding for dev and test and the remainder going to
//! train. The result is deterministic in (records, spec) and invariant to
//! input order.

use std::collections::BTreeMap;

use claimdrift_core::ConsolidatedLabel;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::PipelineError;

/// Classes smaller than this make a split degenerate.
const CLASS_FLOOR: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    /// (train, dev, test) fractions; must be positive and sum to 1.
    pub ratios: (f64, f64, f64),
    /// Per-class sample cap; None means the smallest class size.
    pub per_class_cap: Option<usize>,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(seed: u64) -> SplitSpec {
        SplitSpec { ratios: (0.8, 0.1, 0.1), per_class_cap: None, seed }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusSplit {
    pub train: Vec<String>,
    pub dev: Vec<String>,
    pub test: Vec<String>,
    /// split name -> label -> count
    pub class_counts: BTreeMap<String, BTreeMap<ConsolidatedLabel, usize>>,
}

impl CorpusSplit {
    pub fn totals(&self) -> (usize, usize, usize) {
        (self.train.len(), self.dev.len(), self.test.len())
    }
}

/// Balance classes and split. `records` pairs each article id with its
/// consolidated label.
pub fn balance_and_split(
    records: &[(String, ConsolidatedLabel)],
    spec: &SplitSpec,
) -> Result<CorpusSplit, PipelineError> {
    let (r_train, r_dev, r_test) = spec.ratios;
    if r_train <= 0.0 || r_dev <= 0.0 || r_test <= 0.0 {
        return Err(PipelineError::InvalidRatios("ratios must be positive".into()));
    }
    if (r_train + r_dev + r_test - 1.0).abs() > 1e-9 {
        return Err(PipelineError::InvalidRatios(format!(
            "ratios sum to {}, expected 1",
            r_train + r_dev + r_test
        )));
    }

    let mut per_class: BTreeMap<ConsolidatedLabel, Vec<String>> = BTreeMap::new();
    for (id, label) in records {
        per_class.entry(*label).or_default().push(id.clone());
    }
    for label in ConsolidatedLabel::ALL {
        let count = per_class.get(&label).map(|v| v.len()).unwrap_or(0);
        if count < CLASS_FLOOR {
            return Err(PipelineError::InsufficientClass { label, count, floor: CLASS_FLOOR });
        }
    }

    let smallest = per_class.values().map(|v| v.len()).min().expect("three classes");
    let kept_per_class = spec.per_class_cap.map_or(smallest, |cap| cap.min(smallest));
    let n_dev = (kept_per_class as f64 * r_dev).floor() as usize;
    let n_test = (kept_per_class as f64 * r_test).floor() as usize;
    let n_train = kept_per_class - n_dev - n_test;

    let mut split = CorpusSplit {
        train: Vec::new(),
        dev: Vec::new(),
        test: Vec::new(),
        class_counts: BTreeMap::new(),
    };
    for (class_index, label) in ConsolidatedLabel::ALL.iter().enumerate() {
        let mut ids = per_class.remove(label).expect("class present");
        // Sort before shuffling so input order never matters.
        ids.sort_unstable();
        let mut rng = ChaCha8Rng::seed_from_u64(
            spec.seed ^ (class_index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
        );
        ids.shuffle(&mut rng);
        ids.truncate(kept_per_class);

        split.train.extend_from_slice(&ids[..n_train]);
        split.dev.extend_from_slice(&ids[n_train..n_train + n_dev]);
        split.test.extend_from_slice(&ids[n_train + n_dev..]);
        for (name, count) in [("train", n_train), ("dev", n_dev), ("test", n_test)] {
            *split
                .class_counts
                .entry(name.to_string())
                .or_default()
                .entry(*label)
                .or_default() += count;
        }
    }
    split.train.sort_unstable();
    split.dev.sort_unstable();
    split.test.sort_unstable();
    Ok(split)
}
