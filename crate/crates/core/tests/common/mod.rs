#![allow(dead_code)]

pub mod bm25;
pub mod gradients;
pub mod rescoring;

use smoothrank::corpus::{build_candidate_lists, CandidateList, Qrels, QuerySet};
use smoothrank::retrieval::{NegativeSampling, Sampler};
use smoothrank::synthetic::{generate, SyntheticCollection, SyntheticConfig};
use smoothrank::{Dataset, Execution, FeaturizedList};

pub const DATA_SEED: u64 = 2024;
pub const SAMPLE_SEED: u64 = 17;
pub const TRAIN_QUERIES: usize = 160;

pub struct Experiment {
    pub collection: SyntheticCollection,
    pub dataset: Dataset,
    pub train_lists: Vec<CandidateList>,
    pub test_lists: Vec<CandidateList>,
    pub train: Vec<FeaturizedList>,
    pub test: Vec<FeaturizedList>,
}

fn subset(queries: &QuerySet, qrels: &Qrels, range: std::ops::Range<usize>) -> (QuerySet, Qrels) {
    let qs: Vec<_> = queries.as_slice()[range].to_vec();
    let mut sub = Qrels::default();
    for q in &qs {
        for d in qrels.relevant(&q.id).unwrap() {
            sub.insert(q.id.clone(), d.clone());
        }
    }
    (QuerySet::new(qs).unwrap(), sub)
}

/// The default 1000-document / 200-query collection with BM25 candidate
/// lists of length `n`; the first 160 queries train, the rest test.
pub fn experiment(n: usize, ns: NegativeSampling) -> Experiment {
    let collection = generate(&SyntheticConfig::default(), DATA_SEED).unwrap();
    let dataset = Dataset::new(collection.corpus.clone(), collection.queries.clone()).unwrap();
    let sampler = Sampler::new(ns, &dataset.index, SAMPLE_SEED);
    let total = collection.queries.len();
    let (train_q, train_r) = subset(&collection.queries, &collection.qrels, 0..TRAIN_QUERIES);
    let (test_q, test_r) = subset(&collection.queries, &collection.qrels, TRAIN_QUERIES..total);
    let train_lists = build_candidate_lists(&train_q, &train_r, &sampler, n).unwrap();
    let test_lists = build_candidate_lists(&test_q, &test_r, &sampler, n).unwrap();
    let train = dataset.featurize(&train_lists, Execution::default()).unwrap();
    let test = dataset.featurize(&test_lists, Execution::default()).unwrap();
    Experiment { collection, dataset, train_lists, test_lists, train, test }
}
