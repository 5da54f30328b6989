//! Exhaustive BM25 over every document, written without an index.
#![allow(dead_code)]

use std::collections::HashSet;
use std::path::PathBuf;

use smoothrank::corpus::{load_documents, load_queries, Corpus, QuerySet};

const K1: f64 = 1.2;
const B: f64 = 0.75;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn load() -> (Corpus, QuerySet) {
    (
        load_documents(fixture("bm25_docs.jsonl")).unwrap(),
        load_queries(fixture("bm25_queries.jsonl")).unwrap(),
    )
}

pub fn words(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in text.chars() {
        if c.is_alphanumeric() {
            cur.extend(c.to_lowercase());
        } else if !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Loops over every document for every term; no postings, no caching.
pub fn brute_force(corpus: &Corpus, query: &str) -> Vec<(String, f64)> {
    let docs: Vec<Vec<String>> = corpus.iter().map(|d| words(&d.text)).collect();
    let n = docs.len() as f64;
    let avgdl = docs.iter().map(|d| d.len() as f64).sum::<f64>() / n;
    let mut seen = HashSet::new();
    let terms: Vec<String> = words(query).into_iter().filter(|t| seen.insert(t.clone())).collect();
    let mut scores = vec![0.0f64; docs.len()];
    for t in &terms {
        let df = docs.iter().filter(|d| d.contains(t)).count() as f64;
        let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
        for (d, s) in docs.iter().zip(scores.iter_mut()) {
            let tf = d.iter().filter(|w| *w == t).count() as f64;
            if tf > 0.0 {
                let norm = 1.0 - B + B * d.len() as f64 / avgdl;
                *s += idf * tf * (K1 + 1.0) / (tf + K1 * norm);
            }
        }
    }
    let mut ranked: Vec<(String, f64)> = corpus
        .iter()
        .zip(scores)
        .filter(|(_, s)| *s > 0.0)
        .map(|(d, s)| (d.id.clone(), s))
        .collect();
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    ranked
}
