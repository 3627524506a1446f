//! Measurement functions for claim analysis: readability, perplexity,
//! binned Jensen-Shannon distance, macro precision/recall/F1, cosine
//! drift, and quartile / standard-error aggregation.
//!
//! Every kernel is generic over the scalar type through [`num_traits`], so
//! the same code runs in `f32` or `f64`. The pipeline instantiates
//! everything at [`Scalar`] (`f64`); the aliases at the crate root are the
//! concrete types the rest of the workspace uses.

mod confusion;
mod divergence;
mod drift;
mod error;
mod perplexity;
mod readability;
mod summary;
mod text;
mod vector;

pub use confusion::{macro_prf, macro_prf_with_extra_fn, ConfusionTable, MacroScores};
pub use divergence::{binned_jsd, jsd_max, AgreementInput};
pub use drift::{drift_pair_counts, drift_summary, DriftPair, DriftRow};
pub use error::MetricError;
pub use perplexity::perplexity;
pub use readability::{fkgl, fkgl_stats, TextStats};
pub use summary::{mean_se, quartiles, MeanSe, QuartileSummary};
pub use text::{count_syllables, split_sentences, syllables_in_word};
pub use vector::{cosine, l2_normalize, l2_norm};

/// Scalar type the pipeline runs at.
pub type Scalar = f64;
/// An embedding vector at pipeline precision.
pub type Embedding = Vec<Scalar>;
/// Quartile summary at pipeline precision.
pub type Quartiles = QuartileSummary<Scalar>;
/// Macro precision/recall/F1 at pipeline precision.
pub type Scores = MacroScores<Scalar>;
