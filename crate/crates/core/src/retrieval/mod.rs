//! Lexical retrieval: tokenization, a BM25 inverted index, negative
//! samplers and statistics over the sampler scores they produce.

mod index;
mod sampling;
mod stats;

pub use index::{Bm25Params, InvertedIndex, Posting};
pub use sampling::{
    sample_negatives_bm25, sample_negatives_random, NegativeSampling, SampledNegatives, Sampler,
    ScoredCandidate,
};
pub use stats::{ns_score_stats, HistogramBin, ScoreStats, HISTOGRAM_BINS};

use crate::error::{Error, Result};

/// Lowercases and splits on every non-alphanumeric character. No stemming,
/// no stopwords.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Query terms in first-occurrence order with duplicates removed.
pub(crate) fn unique_terms<S: AsRef<str>>(terms: &[S]) -> Vec<&str> {
    let mut seen = std::collections::HashSet::with_capacity(terms.len());
    terms
        .iter()
        .map(AsRef::as_ref)
        .filter(|t| seen.insert(*t))
        .collect()
}

/// Min-max scaling to `[0, 1]`. A constant input maps to 0.5 everywhere.
pub fn minmax_normalize(raw_scores: &[f64]) -> Result<Vec<f64>> {
    if raw_scores.is_empty() {
        return Err(Error::InvalidArgument("cannot normalize an empty score list".into()));
    }
    let (min, max) = raw_scores
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &s| (lo.min(s), hi.max(s)));
    if max == min {
        return Ok(vec![0.5; raw_scores.len()]);
    }
    let range = max - min;
    Ok(raw_scores
        .iter()
        .map(|&s| ((s - min) / range).clamp(0.0, 1.0))
        .collect())
}
