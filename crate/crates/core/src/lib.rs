//! Culture-level word embeddings, gender-bias metrics and their correlation
//! with gender-gap statistics.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`corpus`]: clean region-tagged posts and cap each region's corpus;
//! 2. [`embedding`]: train one embedding model per region (skip-gram, CBOW,
//!    GloVe or subword skip-gram);
//! 3. [`bias`]: build a female/male axis per model and score themed word sets;
//! 4. [`analysis`]: correlate per-region scores with gap statistics.
//!
//! [`synth`] generates worlds with known ground truth for end-to-end checks.

pub mod analysis;
pub mod bias;
pub mod corpus;
pub mod embedding;
pub mod error;
pub mod kv;
pub mod seed;
pub mod synth;

pub use error::{Error, Result};
