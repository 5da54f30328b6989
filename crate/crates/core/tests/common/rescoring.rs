//! Independent re-scoring of candidate lists with plain loops.
#![allow(dead_code, clippy::needless_range_loop)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use smoothrank::corpus::{Candidate, CandidateList};
use smoothrank::ranker::{FeatureVector, ModelParams};
use smoothrank::FeaturizedList;

fn relevance_logit_margin(p: &ModelParams, x: &[f64]) -> f64 {
    let (d, h) = (p.input_dim(), p.hidden_dim());
    let mut z = [p.b2[0], p.b2[1]];
    for j in 0..h {
        let mut a = p.b1[j];
        for i in 0..d {
            a += x[i] * p.w1[i * h + j];
        }
        let a = a.max(0.0);
        z[0] += a * p.w2[2 * j];
        z[1] += a * p.w2[2 * j + 1];
    }
    z[1] - z[0]
}

pub fn oracle(p: &ModelParams, lists: &[FeaturizedList], k: usize) -> (f64, Vec<u8>) {
    let mut hits = Vec::new();
    for l in lists {
        let mut scored: Vec<(f64, &str, u8)> = l
            .list
            .candidates
            .iter()
            .zip(&l.features)
            .map(|(c, f)| (relevance_logit_margin(p, &f.0), c.doc_id.as_str(), c.label))
            .collect();
        scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(b.1)));
        hits.push(u8::from(scored[..k].iter().any(|s| s.2 == 1)));
    }
    let mean = hits.iter().map(|&h| h as f64).sum::<f64>() / hits.len() as f64;
    (mean, hits)
}

pub fn random_lists(rng: &mut ChaCha8Rng, queries: usize, n: usize, d: usize) -> Vec<FeaturizedList> {
    (0..queries)
        .map(|q| {
            let rel = rng.gen_range(0..n);
            FeaturizedList {
                list: CandidateList {
                    query_id: format!("q{q}"),
                    candidates: (0..n)
                        .map(|i| Candidate {
                            doc_id: format!("d{:02}", rng.gen_range(0..100) * 100 + i),
                            label: u8::from(i == rel),
                            ns_score: rng.gen(),
                        })
                        .collect(),
                },
                features: (0..n)
                    .map(|_| FeatureVector((0..d).map(|_| rng.gen_range(-2.0..2.0)).collect()))
                    .collect(),
            }
        })
        .collect()
}
