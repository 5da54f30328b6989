use serde::{Deserialize, Serialize};

use crate::corpus::{CandidateList, Corpus, QuerySet};
use crate::error::{Error, Result};
use crate::par::Execution;
use crate::ranker::{extract_features_tokens, FeatureVector};
use crate::retrieval::{tokenize, InvertedIndex};

/// Corpus plus its BM25 index; what the `index` command persists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexedCorpus {
    pub documents: Vec<crate::corpus::Document>,
    pub index: InvertedIndex,
}

impl IndexedCorpus {
    pub fn build(corpus: &Corpus) -> Result<Self> {
        Ok(Self {
            documents: corpus.as_slice().to_vec(),
            index: InvertedIndex::build(corpus)?,
        })
    }

    pub fn corpus(&self) -> Result<Corpus> {
        Corpus::new(self.documents.clone())
    }
}

/// Everything needed to turn (query id, doc id) pairs into features.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub corpus: Corpus,
    pub queries: QuerySet,
    pub index: InvertedIndex,
}

/// A candidate list with the feature vector of every candidate, in order.
#[derive(Debug, Clone)]
pub struct FeaturizedList {
    pub list: CandidateList,
    pub features: Vec<FeatureVector>,
}

impl Dataset {
    pub fn new(corpus: Corpus, queries: QuerySet) -> Result<Self> {
        let index = InvertedIndex::build(&corpus)?;
        Ok(Self {
            corpus,
            queries,
            index,
        })
    }

    pub fn with_index(corpus: Corpus, queries: QuerySet, index: InvertedIndex) -> Self {
        Self {
            corpus,
            queries,
            index,
        }
    }

    pub fn features(&self, query_id: &str, doc_id: &str) -> Result<FeatureVector> {
        let query = self
            .queries
            .text_of(query_id)
            .ok_or_else(|| Error::UnknownQuery(query_id.to_owned()))?;
        let doc = self
            .corpus
            .text_of(doc_id)
            .ok_or_else(|| Error::UnknownDocument(doc_id.to_owned()))?;
        Ok(extract_features_tokens(&tokenize(query), &tokenize(doc), &self.index))
    }

    pub fn featurize(&self, lists: &[CandidateList], exec: Execution) -> Result<Vec<FeaturizedList>> {
        exec.try_map(lists, |list| {
            let query = self
                .queries
                .text_of(&list.query_id)
                .ok_or_else(|| Error::UnknownQuery(list.query_id.clone()))?;
            let q_tokens = tokenize(query);
            let features = list
                .candidates
                .iter()
                .map(|c| {
                    let doc = self
                        .corpus
                        .text_of(&c.doc_id)
                        .ok_or_else(|| Error::UnknownDocument(c.doc_id.clone()))?;
                    Ok(extract_features_tokens(&q_tokens, &tokenize(doc), &self.index))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(FeaturizedList {
                list: list.clone(),
                features,
            })
        })
    }
}
