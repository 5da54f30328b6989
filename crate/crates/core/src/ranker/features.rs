use std::collections::HashSet;

use crate::retrieval::{tokenize, unique_terms, InvertedIndex};

pub const HASH_BINS: usize = 256;
pub const SCALAR_FEATURES: usize = 6;
pub const FEATURE_DIM: usize = HASH_BINS + SCALAR_FEATURES;

/// Fixed-length input to the ranker.
///
/// Layout: 256 hashed query/document interaction dims, then six scalars
/// `[bm25, unique overlap, idf-weighted overlap, query length, doc length,
/// doc length / average length]`, each passed through `ln(1 + x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(pub Vec<f64>);

impl FeatureVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn hashed(&self) -> &[f64] {
        &self.0[..HASH_BINS]
    }

    pub fn scalars(&self) -> &[f64] {
        &self.0[HASH_BINS..]
    }
}

/// 64-bit FNV-1a.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    bytes
        .iter()
        .fold(OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(PRIME))
}

fn hashed_unit_vector<S: AsRef<str>>(tokens: &[S]) -> [f64; HASH_BINS] {
    let mut v = [0.0; HASH_BINS];
    for t in tokens {
        v[(fnv1a(t.as_ref().as_bytes()) % HASH_BINS as u64) as usize] += 1.0;
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    v
}

pub fn extract_features(query_text: &str, doc_text: &str, index: &InvertedIndex) -> FeatureVector {
    extract_features_tokens(&tokenize(query_text), &tokenize(doc_text), index)
}

pub fn extract_features_tokens<S: AsRef<str>, T: AsRef<str>>(
    query_tokens: &[S],
    doc_tokens: &[T],
    index: &InvertedIndex,
) -> FeatureVector {
    let q = hashed_unit_vector(query_tokens);
    let d = hashed_unit_vector(doc_tokens);
    let mut values = Vec::with_capacity(FEATURE_DIM);
    values.extend(q.iter().zip(&d).map(|(a, b)| a * b));

    let doc_terms: HashSet<&str> = doc_tokens.iter().map(AsRef::as_ref).collect();
    let shared: Vec<&str> = unique_terms(query_tokens)
        .into_iter()
        .filter(|t| doc_terms.contains(t))
        .collect();
    let idf_overlap: f64 = shared.iter().map(|t| index.idf(t)).sum();
    let scalars = [
        index.bm25_tokens(query_tokens, doc_tokens),
        shared.len() as f64,
        idf_overlap,
        query_tokens.len() as f64,
        doc_tokens.len() as f64,
        doc_tokens.len() as f64 / index.avg_doc_length(),
    ];
    values.extend(scalars.iter().map(|x| x.ln_1p()));
    FeatureVector(values)
}
