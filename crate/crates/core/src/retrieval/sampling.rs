use std::collections::{BTreeSet, HashSet};

use rand::seq::SliceRandom;

use super::{minmax_normalize, InvertedIndex};
use crate::corpus::Query;
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng};

/// Score assigned to randomly sampled negatives, and to every candidate
/// when the retrieval scores carry no spread.
pub const UNINFORMATIVE_SCORE: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredCandidate {
    pub doc_id: String,
    pub raw_score: f64,
    pub normalized_score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NegativeSampling {
    Bm25,
    Random,
}

impl std::str::FromStr for NegativeSampling {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bm25" => Ok(Self::Bm25),
            "random" => Ok(Self::Random),
            other => Err(Error::InvalidArgument(format!("unknown negative sampler `{other}`"))),
        }
    }
}

/// Negatives for one query plus the normalized scores the sampler assigned
/// to relevant documents it happened to retrieve.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledNegatives {
    pub negatives: Vec<ScoredCandidate>,
    relevant_scores: Vec<(String, f64)>,
    fallback: f64,
}

impl SampledNegatives {
    /// Score recorded for a relevant document. Documents the sampler did
    /// not retrieve sit at the bottom of the list (0), unless nothing was
    /// retrieved at all (0.5).
    pub fn relevant_score(&self, doc_id: &str) -> f64 {
        self.relevant_scores
            .iter()
            .find(|(d, _)| d == doc_id)
            .map_or(self.fallback, |&(_, s)| s)
    }
}

fn non_relevant_pool<'a>(
    doc_ids: &'a [String],
    relevant: &BTreeSet<String>,
    exclude: &HashSet<&str>,
) -> Vec<&'a String> {
    doc_ids
        .iter()
        .filter(|d| !relevant.contains(*d) && !exclude.contains(d.as_str()))
        .collect()
}

fn check_supply(doc_ids: &[String], relevant: &BTreeSet<String>, m: usize) -> Result<()> {
    let available = doc_ids.iter().filter(|d| !relevant.contains(*d)).count();
    if available < m {
        return Err(Error::InsufficientDocuments { needed: m, available });
    }
    Ok(())
}

fn bm25_sample(
    index: &InvertedIndex,
    query: &Query,
    relevant: &BTreeSet<String>,
    m: usize,
    seed: u64,
) -> Result<SampledNegatives> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    check_supply(index.doc_ids(), relevant, m)?;

    let retrieved = index.retrieve_top_k(&query.text, m + relevant.len());
    let raw: Vec<f64> = retrieved.iter().map(|(_, s)| *s).collect();
    let normalized = if raw.is_empty() {
        Vec::new()
    } else {
        minmax_normalize(&raw)?
    };

    let mut negatives = Vec::with_capacity(m);
    let mut relevant_scores = Vec::new();
    for ((doc_id, raw_score), normalized_score) in retrieved.into_iter().zip(normalized) {
        if relevant.contains(&doc_id) {
            relevant_scores.push((doc_id, normalized_score));
        } else if negatives.len() < m {
            negatives.push(ScoredCandidate {
                doc_id,
                raw_score,
                normalized_score,
            });
        }
    }

    let fallback = if raw.is_empty() { UNINFORMATIVE_SCORE } else { 0.0 };
    if negatives.len() < m {
        let taken: HashSet<&str> = negatives.iter().map(|c| c.doc_id.as_str()).collect();
        let mut pool = non_relevant_pool(index.doc_ids(), relevant, &taken);
        let missing = m - negatives.len();
        let (fill, _) = pool.partial_shuffle(&mut rng(seed), missing);
        let fill: Vec<String> = fill.iter().map(|d| (*d).clone()).collect();
        negatives.extend(fill.into_iter().map(|doc_id| ScoredCandidate {
            doc_id,
            raw_score: 0.0,
            normalized_score: fallback,
        }));
    }

    Ok(SampledNegatives {
        negatives,
        relevant_scores,
        fallback,
    })
}

/// The top `m` non-relevant BM25 results for `query`.
///
/// Scores are min-max scaled over the full retrieved list (top
/// `m + |relevant|`, relevant documents included) before the relevant ones
/// are dropped. If fewer than `m` non-relevant documents match, the list is
/// padded with seeded uniform draws that get raw score 0.
pub fn sample_negatives_bm25(
    index: &InvertedIndex,
    query: &Query,
    relevant: &BTreeSet<String>,
    m: usize,
    seed: u64,
) -> Result<Vec<ScoredCandidate>> {
    bm25_sample(index, query, relevant, m, seed).map(|s| s.negatives)
}

/// `m` distinct non-relevant documents drawn uniformly without replacement.
pub fn sample_negatives_random(
    doc_ids: &[String],
    relevant: &BTreeSet<String>,
    m: usize,
    seed: u64,
) -> Result<Vec<ScoredCandidate>> {
    check_supply(doc_ids, relevant, m)?;
    let mut pool = non_relevant_pool(doc_ids, relevant, &HashSet::new());
    let (picked, _) = pool.partial_shuffle(&mut rng(seed), m);
    Ok(picked
        .iter()
        .map(|d| ScoredCandidate {
            doc_id: (*d).clone(),
            raw_score: 0.0,
            normalized_score: UNINFORMATIVE_SCORE,
        })
        .collect())
}

/// A negative sampler bound to an index. Each query gets its own generator
/// derived from the base seed and the query's position, so results do not
/// depend on the order queries are processed in.
#[derive(Debug, Clone, Copy)]
pub struct Sampler<'a> {
    pub kind: NegativeSampling,
    index: &'a InvertedIndex,
    seed: u64,
}

impl<'a> Sampler<'a> {
    pub fn new(kind: NegativeSampling, index: &'a InvertedIndex, seed: u64) -> Self {
        Self { kind, index, seed }
    }

    pub fn bm25(index: &'a InvertedIndex, seed: u64) -> Self {
        Self::new(NegativeSampling::Bm25, index, seed)
    }

    pub fn random(index: &'a InvertedIndex, seed: u64) -> Self {
        Self::new(NegativeSampling::Random, index, seed)
    }

    pub fn corpus_size(&self) -> usize {
        self.index.doc_count()
    }

    pub fn sample(
        &self,
        query: &Query,
        ordinal: u64,
        relevant: &BTreeSet<String>,
        m: usize,
    ) -> Result<SampledNegatives> {
        let seed = derive_seed(self.seed, ordinal);
        match self.kind {
            NegativeSampling::Bm25 => bm25_sample(self.index, query, relevant, m, seed),
            NegativeSampling::Random => Ok(SampledNegatives {
                negatives: sample_negatives_random(self.index.doc_ids(), relevant, m, seed)?,
                relevant_scores: Vec::new(),
                fallback: UNINFORMATIVE_SCORE,
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Collection, Corpus, Document};

    fn corpus(texts: &[&str]) -> Corpus {
        Collection::new(
            texts
                .iter()
                .enumerate()
                .map(|(i, t)| Document { id: format!("d{i}"), text: (*t).into() })
                .collect(),
        )
        .unwrap()
    }

    fn query(text: &str) -> Query {
        Query { id: "q".into(), text: text.into() }
    }

    fn rel(ids: &[&str]) -> BTreeSet<String> {
        ids.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn bm25_negatives_exclude_relevant() {
        let c = corpus(&[
            "cat cat cat", "cat dog", "cat", "dog", "cat fish", "bird", "cat cat", "cat mouse",
            "cat hat", "cat bat", "cat rat", "zebra",
        ]);
        let ix = InvertedIndex::build(&c).unwrap();
        let negs = sample_negatives_bm25(&ix, &query("cat"), &rel(&["d0"]), 9, 3).unwrap();
        assert_eq!(negs.len(), 9);
        assert!(negs.iter().all(|n| n.doc_id != "d0"));
        let unique: HashSet<_> = negs.iter().map(|n| &n.doc_id).collect();
        assert_eq!(unique.len(), 9);
        assert!(negs.iter().all(|n| (0.0..=1.0).contains(&n.normalized_score)));
    }

    #[test]
    fn normalization_includes_relevant_document() {
        // d0 is the best match; excluded from negatives but still the max.
        let c = corpus(&["cat cat cat", "cat dog", "cat bird fish", "dog"]);
        let ix = InvertedIndex::build(&c).unwrap();
        let negs = sample_negatives_bm25(&ix, &query("cat"), &rel(&["d0"]), 2, 0).unwrap();
        assert!(negs.iter().all(|n| n.normalized_score < 1.0));
        assert_eq!(negs[1].normalized_score, 0.0);
    }

    #[test]
    fn no_match_gives_uninformative_random_padding() {
        let c = corpus(&["a", "b", "c", "d", "e"]);
        let ix = InvertedIndex::build(&c).unwrap();
        let negs = sample_negatives_bm25(&ix, &query("zzz"), &rel(&["d0"]), 3, 9).unwrap();
        assert_eq!(negs.len(), 3);
        assert!(negs.iter().all(|n| n.normalized_score == 0.5 && n.raw_score == 0.0));
        assert!(negs.iter().all(|n| n.doc_id != "d0"));
    }

    #[test]
    fn partial_match_pads_at_bottom() {
        let c = corpus(&["cat", "cat dog", "x", "y", "z"]);
        let ix = InvertedIndex::build(&c).unwrap();
        let negs = sample_negatives_bm25(&ix, &query("cat"), &rel(&["d0"]), 3, 1).unwrap();
        assert_eq!(negs[0].doc_id, "d1");
        assert_eq!(negs[1].raw_score, 0.0);
        assert_eq!(negs[1].normalized_score, 0.0);
        assert_eq!(negs[2].normalized_score, 0.0);
    }

    #[test]
    fn too_small_corpus_errors() {
        let c = corpus(&["a", "b"]);
        let ix = InvertedIndex::build(&c).unwrap();
        assert!(matches!(
            sample_negatives_bm25(&ix, &query("a"), &rel(&["d0"]), 2, 0),
            Err(Error::InsufficientDocuments { needed: 2, available: 1 })
        ));
        assert!(sample_negatives_random(ix.doc_ids(), &rel(&["d0"]), 2, 0).is_err());
    }

    #[test]
    fn random_exhausts_pool_and_is_seeded() {
        let c = corpus(&["a", "b", "c", "d"]);
        let ix = InvertedIndex::build(&c).unwrap();
        let a = sample_negatives_random(ix.doc_ids(), &rel(&["d1"]), 3, 42).unwrap();
        let b = sample_negatives_random(ix.doc_ids(), &rel(&["d1"]), 3, 42).unwrap();
        assert_eq!(a, b);
        let mut ids: Vec<_> = a.iter().map(|c| c.doc_id.clone()).collect();
        ids.sort();
        assert_eq!(ids, ["d0", "d2", "d3"]);
        assert!(a.iter().all(|c| c.normalized_score == 0.5));
    }

    #[test]
    fn random_draws_are_uniform() {
        let ids: Vec<String> = (0..10).map(|i| format!("d{i}")).collect();
        let mut counts = [0usize; 10];
        for seed in 0..10_000u64 {
            let pick = sample_negatives_random(&ids, &BTreeSet::new(), 1, seed).unwrap();
            let k: usize = pick[0].doc_id[1..].parse().unwrap();
            counts[k] += 1;
        }
        for c in counts {
            assert!((800..=1200).contains(&c), "{counts:?}");
        }
    }

    #[test]
    fn relevant_score_lookup() {
        let c = corpus(&["cat cat", "cat", "dog"]);
        let ix = InvertedIndex::build(&c).unwrap();
        let s = Sampler::bm25(&ix, 0).sample(&query("cat"), 0, &rel(&["d0"]), 2).unwrap();
        assert_eq!(s.relevant_score("d0"), 1.0);
        let s = Sampler::bm25(&ix, 0).sample(&query("dog"), 0, &rel(&["d0"]), 2).unwrap();
        assert_eq!(s.relevant_score("d0"), 0.0);
        let s = Sampler::random(&ix, 0).sample(&query("cat"), 0, &rel(&["d0"]), 2).unwrap();
        assert_eq!(s.relevant_score("d0"), 0.5);
    }
}
