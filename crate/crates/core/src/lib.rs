//! Domain model shared by every stage of the claim-evolution pipeline.
//!
//! Everything here is an immutable value record: articles scraped from a
//! fact-checking site, curated source/evidence bundles, personas, claim
//! nodes produced round by round, human/model ratings, and the run
//! manifest. Records serialize as one JSON object per line (snake_case
//! field names) and are safe to share across threads.

mod article;
mod error;
mod label;
mod manifest;
mod node;
mod persona;
mod rating;
mod store;
mod validate;

pub use article::{ArticleRecord, CuratedRecord, QaCategory};
pub use error::CoreError;
pub use label::{consolidate_label, ConsolidatedLabel, RawLabel};
pub use manifest::{config_digest, RunManifest};
pub use node::{node_id_digest, word_count, ClaimNode, WORD_LIMIT};
pub use persona::{PersonaRegistry, PersonaSpec};
pub use rating::{RaterKind, RatingRecord};
pub use store::{JsonlRejects, Store};
pub use validate::{validate_node, Violation};
