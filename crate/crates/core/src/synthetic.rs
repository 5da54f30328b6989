//! Seeded toy collection with topical structure.
//!
//! Every query is three key words from one topic. Its relevant document
//! contains each key exactly once, surrounded by other words of the topic.
//! Hard distractors repeat two of the three keys and lack the third, so BM25
//! ranks them next to (and often above) the relevant document; what
//! separates them is coverage of the query, not term frequency. Filler
//! documents share only the topic vocabulary.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::corpus::{Corpus, Document, Qrels, Query, QuerySet};
use crate::error::{Error, Result};
use crate::seed::rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticConfig {
    pub documents: usize,
    pub queries: usize,
    pub topics: usize,
    pub words_per_topic: usize,
    pub background_words: usize,
    pub distractors_per_query: usize,
    pub doc_length: usize,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            documents: 1000,
            queries: 200,
            topics: 40,
            words_per_topic: 40,
            background_words: 300,
            distractors_per_query: 3,
            doc_length: 24,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCollection {
    pub corpus: Corpus,
    pub queries: QuerySet,
    pub qrels: Qrels,
}

fn topic_word(topic: usize, i: usize) -> String {
    format!("t{topic}w{i}")
}

pub fn generate(config: &SyntheticConfig, seed: u64) -> Result<SyntheticCollection> {
    let c = config;
    let needed = c.queries * (1 + c.distractors_per_query);
    if c.documents < needed || c.topics == 0 || c.words_per_topic < 4 || c.background_words == 0 {
        return Err(Error::InvalidArgument(format!(
            "synthetic config cannot host {} queries in {} documents",
            c.queries, c.documents
        )));
    }
    let mut rng = rng(seed);

    // Shuffled ids so that the relevant document is not systematically
    // first in id order.
    let width = c.documents.to_string().len();
    let mut ids: Vec<String> = (0..c.documents).map(|i| format!("d{i:0width$}")).collect();
    ids.shuffle(&mut rng);
    let mut ids = ids.into_iter();

    // Pads `words` to the document length with topic and background words,
    // never adding one of `keys`.
    let filler = |rng: &mut rand_chacha::ChaCha8Rng, topic: usize, keys: &[String], words: &mut Vec<String>| {
        while words.len() < c.doc_length {
            if rng.gen_bool(0.6) {
                let w = topic_word(topic, rng.gen_range(0..c.words_per_topic));
                if !keys.contains(&w) {
                    words.push(w);
                }
            } else {
                words.push(format!("bg{}", rng.gen_range(0..c.background_words)));
            }
        }
        words.shuffle(rng);
        words.join(" ")
    };

    let mut docs = Vec::with_capacity(c.documents);
    let mut queries = Vec::with_capacity(c.queries);
    let mut qrels = Qrels::default();
    for q in 0..c.queries {
        let topic = q % c.topics;
        let mut pool: Vec<usize> = (0..c.words_per_topic).collect();
        pool.shuffle(&mut rng);
        let keys: Vec<String> = pool[..3].iter().map(|&i| topic_word(topic, i)).collect();
        let qid = format!("q{q:03}");
        queries.push(Query {
            id: qid.clone(),
            text: keys.join(" "),
        });

        let rel_id = ids.next().expect("enough ids");
        let mut words = keys.clone();
        docs.push(Document {
            id: rel_id.clone(),
            text: filler(&mut rng, topic, &keys, &mut words),
        });
        qrels.insert(qid, rel_id);

        for _ in 0..c.distractors_per_query {
            let mut words = Vec::new();
            let mut chosen = keys.clone();
            chosen.shuffle(&mut rng);
            for k in &chosen[..2] {
                let reps = rng.gen_range(2..=3);
                words.extend(std::iter::repeat_n(k.clone(), reps));
            }
            docs.push(Document {
                id: ids.next().expect("enough ids"),
                text: filler(&mut rng, topic, &keys, &mut words),
            });
        }
    }
    for id in ids {
        let topic = rng.gen_range(0..c.topics);
        let mut words = Vec::new();
        docs.push(Document {
            id,
            text: filler(&mut rng, topic, &[], &mut words),
        });
    }
    docs.sort_by(|a, b| a.id.cmp(&b.id));

    Ok(SyntheticCollection {
        corpus: Corpus::new(docs)?,
        queries: QuerySet::new(queries)?,
        qrels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::retrieval::tokenize;

    #[test]
    fn shape_and_determinism() {
        let cfg = SyntheticConfig::default();
        let a = generate(&cfg, 5).unwrap();
        assert_eq!(a.corpus.len(), 1000);
        assert_eq!(a.queries.len(), 200);
        assert_eq!(a.qrels.len(), 200);
        a.qrels.validate(&a.corpus, &a.queries).unwrap();
        let b = generate(&cfg, 5).unwrap();
        assert_eq!(a.corpus, b.corpus);
        assert_eq!(a.queries, b.queries);
    }

    #[test]
    fn relevant_contains_every_key() {
        let s = generate(&SyntheticConfig::default(), 1).unwrap();
        for q in s.queries.iter() {
            let rel = s.qrels.primary_relevant(&q.id).unwrap();
            let doc = tokenize(s.corpus.text_of(rel).unwrap());
            assert!(tokenize(&q.text).iter().all(|k| doc.contains(k)));
        }
    }

    #[test]
    fn rejects_impossible_config() {
        let cfg = SyntheticConfig { documents: 10, ..Default::default() };
        assert!(generate(&cfg, 1).is_err());
    }
}
