//! Label smoothing, two-stage label smoothing and weakly supervised label
//! smoothing for pointwise neural rankers, with the BM25 negative sampling
//! that feeds them and the sampled-recall evaluation used to compare them.
//!
//! The pipeline, end to end:
//!
//! 1. [`corpus`] loads documents, queries and qrels;
//! 2. [`retrieval`] indexes the corpus and samples negatives, recording a
//!    min-max normalized sampler score per candidate;
//! 3. [`smoothing`] turns (label, score, epsilon) into a soft target;
//! 4. [`trainer`] fits a [`ranker`] under a constant or two-stage schedule;
//! 5. [`evaluation`] computes `R_n@K`, aggregates seeds and runs t-tests.

pub mod corpus;
pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod par;
pub mod ranker;
pub mod retrieval;
pub mod seed;
pub mod smoothing;
pub mod synthetic;
pub mod trainer;

pub use dataset::{Dataset, FeaturizedList, IndexedCorpus};
pub use error::{Error, Result};
pub use par::Execution;
