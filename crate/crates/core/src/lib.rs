//! Rare-class active learning over skewed comment corpora: nearest-neighbor
//! sampling in comment and user embedding space, a linear max-margin
//! classifier with calibrated probabilities, lexicon induction by label
//! propagation and descriptive corpus analytics.

pub mod corpus;
pub mod embeddings;
pub mod classifier;
pub mod nnindex;
pub mod util;
pub mod analytics;
pub mod harness;
pub mod lexicon;
pub mod sampling;
pub mod pipeline;
pub mod synth;
