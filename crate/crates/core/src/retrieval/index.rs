use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::{tokenize, unique_terms};
use crate::corpus::Corpus;
use crate::error::{Error, Result};

/// Okapi BM25 parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Self { k1: 1.2, b: 0.75 }
    }
}

impl Bm25Params {
    /// Nonnegative (Lucene) idf: `ln(1 + (N - df + 0.5) / (df + 0.5))`.
    pub fn idf(&self, doc_count: usize, df: usize) -> f64 {
        let n = doc_count as f64;
        let df = df as f64;
        (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
    }

    pub fn term_weight(&self, idf: f64, tf: u32, doc_len: u32, avg_doc_len: f64) -> f64 {
        let tf = f64::from(tf);
        let norm = 1.0 - self.b + self.b * f64::from(doc_len) / avg_doc_len;
        idf * tf * (self.k1 + 1.0) / (tf + self.k1 * norm)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Posting {
    pub doc: u32,
    pub tf: u32,
}

#[derive(Serialize, Deserialize)]
struct IndexRepr {
    params: Bm25Params,
    doc_ids: Vec<String>,
    doc_lengths: Vec<u32>,
    postings: BTreeMap<String, Vec<Posting>>,
}

/// Term to postings map over a fixed corpus. Documents are addressed
/// internally by their position in the corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "IndexRepr", into = "IndexRepr")]
pub struct InvertedIndex {
    params: Bm25Params,
    doc_ids: Vec<String>,
    positions: HashMap<String, u32>,
    doc_lengths: Vec<u32>,
    avg_doc_length: f64,
    postings: BTreeMap<String, Vec<Posting>>,
}

impl From<InvertedIndex> for IndexRepr {
    fn from(ix: InvertedIndex) -> Self {
        IndexRepr {
            params: ix.params,
            doc_ids: ix.doc_ids,
            doc_lengths: ix.doc_lengths,
            postings: ix.postings,
        }
    }
}

impl TryFrom<IndexRepr> for InvertedIndex {
    type Error = Error;

    fn try_from(repr: IndexRepr) -> Result<Self> {
        if repr.doc_ids.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        if repr.doc_ids.len() != repr.doc_lengths.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} doc ids but {} doc lengths",
                repr.doc_ids.len(),
                repr.doc_lengths.len()
            )));
        }
        let n = repr.doc_ids.len() as u32;
        for (term, list) in &repr.postings {
            if list.iter().any(|p| p.doc >= n) || list.windows(2).any(|w| w[0].doc >= w[1].doc) {
                return Err(Error::ShapeMismatch(format!("bad postings for term `{term}`")));
            }
        }
        let mut positions = HashMap::with_capacity(repr.doc_ids.len());
        for (i, id) in repr.doc_ids.iter().enumerate() {
            if positions.insert(id.clone(), i as u32).is_some() {
                return Err(Error::DuplicateId(id.clone()));
            }
        }
        Ok(Self {
            params: repr.params,
            avg_doc_length: mean_length(&repr.doc_lengths),
            doc_ids: repr.doc_ids,
            positions,
            doc_lengths: repr.doc_lengths,
            postings: repr.postings,
        })
    }
}

fn mean_length(lengths: &[u32]) -> f64 {
    let total: u64 = lengths.iter().map(|&l| u64::from(l)).sum();
    total as f64 / lengths.len() as f64
}

impl InvertedIndex {
    pub fn build(corpus: &Corpus) -> Result<Self> {
        Self::build_with(corpus, Bm25Params::default())
    }

    pub fn build_with(corpus: &Corpus, params: Bm25Params) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut postings: BTreeMap<String, Vec<Posting>> = BTreeMap::new();
        let mut doc_ids = Vec::with_capacity(corpus.len());
        let mut doc_lengths = Vec::with_capacity(corpus.len());
        let mut positions = HashMap::with_capacity(corpus.len());
        for (i, doc) in corpus.iter().enumerate() {
            let tokens = tokenize(&doc.text);
            let mut counts: BTreeMap<String, u32> = BTreeMap::new();
            for t in &tokens {
                *counts.entry(t.clone()).or_default() += 1;
            }
            for (term, tf) in counts {
                postings.entry(term).or_default().push(Posting { doc: i as u32, tf });
            }
            doc_ids.push(doc.id.clone());
            positions.insert(doc.id.clone(), i as u32);
            doc_lengths.push(tokens.len() as u32);
        }
        Ok(Self {
            params,
            avg_doc_length: mean_length(&doc_lengths),
            doc_ids,
            positions,
            doc_lengths,
            postings,
        })
    }

    pub fn params(&self) -> Bm25Params {
        self.params
    }

    pub fn doc_count(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn avg_doc_length(&self) -> f64 {
        self.avg_doc_length
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn doc_length(&self, doc_id: &str) -> Option<u32> {
        self.position(doc_id).map(|i| self.doc_lengths[i as usize])
    }

    pub fn position(&self, doc_id: &str) -> Option<u32> {
        self.positions.get(doc_id).copied()
    }

    pub fn postings(&self, term: &str) -> &[Posting] {
        self.postings.get(term).map_or(&[], Vec::as_slice)
    }

    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.postings.keys().map(String::as_str)
    }

    pub fn document_frequency(&self, term: &str) -> usize {
        self.postings(term).len()
    }

    pub fn idf(&self, term: &str) -> f64 {
        self.params.idf(self.doc_count(), self.document_frequency(term))
    }

    /// BM25 of one indexed document, summing over the unique query terms.
    pub fn bm25_score<S: AsRef<str>>(&self, query_terms: &[S], doc_id: &str) -> Result<f64> {
        let doc = self
            .position(doc_id)
            .ok_or_else(|| Error::UnknownDocument(doc_id.to_owned()))?;
        let len = self.doc_lengths[doc as usize];
        let mut score = 0.0;
        for term in unique_terms(query_terms) {
            let list = self.postings(term);
            if let Ok(i) = list.binary_search_by_key(&doc, |p| p.doc) {
                let idf = self.params.idf(self.doc_count(), list.len());
                score += self.params.term_weight(idf, list[i].tf, len, self.avg_doc_length);
            }
        }
        Ok(score)
    }

    /// BM25 of arbitrary tokenized text against this index's collection
    /// statistics. Agrees with [`InvertedIndex::bm25_score`] for indexed documents.
    pub fn bm25_tokens<S: AsRef<str>, T: AsRef<str>>(&self, query_terms: &[S], doc_tokens: &[T]) -> f64 {
        let len = doc_tokens.len() as u32;
        let mut score = 0.0;
        for term in unique_terms(query_terms) {
            let tf = doc_tokens.iter().filter(|t| t.as_ref() == term).count() as u32;
            if tf > 0 {
                let idf = self.idf(term);
                score += self.params.term_weight(idf, tf, len, self.avg_doc_length);
            }
        }
        score
    }

    /// Scores of every document, accumulated term-at-a-time over postings.
    pub fn score_all<S: AsRef<str>>(&self, query_terms: &[S]) -> Vec<f64> {
        let mut acc = vec![0.0; self.doc_count()];
        for term in unique_terms(query_terms) {
            let list = self.postings(term);
            if list.is_empty() {
                continue;
            }
            let idf = self.params.idf(self.doc_count(), list.len());
            for p in list {
                let len = self.doc_lengths[p.doc as usize];
                acc[p.doc as usize] += self.params.term_weight(idf, p.tf, len, self.avg_doc_length);
            }
        }
        acc
    }

    /// Top `k` documents with a positive score, by descending score and then
    /// ascending doc id.
    pub fn retrieve_top_k(&self, query_text: &str, k: usize) -> Vec<(String, f64)> {
        let terms = tokenize(query_text);
        let scores = self.score_all(&terms);
        let mut hits: Vec<(u32, f64)> = scores
            .iter()
            .enumerate()
            .filter(|(_, &s)| s > 0.0)
            .map(|(i, &s)| (i as u32, s))
            .collect();
        hits.sort_by(|a, b| {
            b.1.total_cmp(&a.1)
                .then_with(|| self.doc_ids[a.0 as usize].cmp(&self.doc_ids[b.0 as usize]))
        });
        hits.truncate(k);
        hits.into_iter()
            .map(|(i, s)| (self.doc_ids[i as usize].clone(), s))
            .collect()
    }
}
