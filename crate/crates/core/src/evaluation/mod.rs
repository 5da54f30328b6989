//! Sampled re-ranking evaluation (`R_n@K`), aggregation over seeds, and
//! significance testing.

pub mod stats;
mod sweep;

pub use stats::{bonferroni, paired_t_test, student_t_quantile, TTest};
pub use sweep::{
    config_id, epsilon_sweep, significance_report, CellResult, SweepOutcome, SweepRow, SweepSpec,
    RESULTS_HEADER, SWEEP_HEADER,
};

use serde::{Deserialize, Serialize};

use crate::corpus::CandidateList;
use crate::dataset::{Dataset, FeaturizedList};
use crate::error::{Error, Result};
use crate::par::Execution;
use crate::ranker::{forward, FeatureVector, ModelParams};
use crate::smoothing::softmax;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub config_id: String,
    pub seed: u64,
    pub metric_name: String,
    pub value: f64,
    pub per_query: Vec<(String, u8)>,
}

pub fn metric_name(n: usize, k: usize) -> String {
    format!("R{n}@{k}")
}

/// Probability of the relevant class for one feature vector.
pub fn relevance_probability(params: &ModelParams, features: &FeatureVector) -> Result<f64> {
    let (logits, _) = forward(params, features.values())?;
    Ok(softmax(logits)[1])
}

/// Candidate doc ids ordered by descending relevance probability, ties by
/// ascending doc id.
pub fn rank_featurized(params: &ModelParams, list: &FeaturizedList) -> Result<Vec<String>> {
    let mut scored = list
        .list
        .candidates
        .iter()
        .zip(&list.features)
        .map(|(c, f)| Ok((relevance_probability(params, f)?, c.doc_id.as_str())))
        .collect::<Result<Vec<_>>>()?;
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
    Ok(scored.into_iter().map(|(_, d)| d.to_owned()).collect())
}

pub fn rank_candidates(params: &ModelParams, dataset: &Dataset, list: &CandidateList) -> Result<Vec<String>> {
    let featurized = dataset.featurize(std::slice::from_ref(list), Execution::Sequential)?;
    rank_featurized(params, &featurized[0])
}

/// 1 when `relevant_id` is among the first `k` entries of `ranking`.
pub fn recall_at_k(ranking: &[String], relevant_id: &str, k: usize) -> Result<u8> {
    if k == 0 || k > ranking.len() {
        return Err(Error::InvalidArgument(format!(
            "K = {k} must lie in 1..={}",
            ranking.len()
        )));
    }
    let pos = ranking
        .iter()
        .position(|d| d == relevant_id)
        .ok_or_else(|| Error::UnknownDocument(relevant_id.to_owned()))?;
    Ok(u8::from(pos < k))
}

/// Mean `R_n@K` over lists. `n` is taken from the first list.
pub fn evaluate(
    params: &ModelParams,
    lists: &[FeaturizedList],
    k: usize,
    exec: Execution,
) -> Result<RunResult> {
    let first = lists
        .first()
        .ok_or_else(|| Error::InvalidArgument("nothing to evaluate".into()))?;
    let per_query = exec.try_map(lists, |l| {
        let relevant = l
            .list
            .relevant()
            .ok_or_else(|| Error::NoRelevant(l.list.query_id.clone()))?;
        let ranking = rank_featurized(params, l)?;
        Ok::<_, Error>((l.list.query_id.clone(), recall_at_k(&ranking, &relevant.doc_id, k)?))
    })?;
    let hits: f64 = per_query.iter().map(|(_, v)| f64::from(*v)).sum();
    Ok(RunResult {
        config_id: String::new(),
        seed: 0,
        metric_name: metric_name(first.list.n(), k),
        value: hits / per_query.len() as f64,
        per_query,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean: f64,
    pub std: f64,
    pub ci95_half_width: f64,
    pub runs: usize,
}

pub fn aggregate_values(values: &[f64]) -> Result<Aggregate> {
    if values.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "aggregation needs at least 2 runs, got {}",
            values.len()
        )));
    }
    let n = values.len();
    let std = stats::sample_std(values);
    let t = student_t_quantile(0.975, (n - 1) as f64);
    Ok(Aggregate {
        mean: stats::mean(values),
        std,
        ci95_half_width: t * std / (n as f64).sqrt(),
        runs: n,
    })
}

/// Mean, sample std and 95% Student-t interval over runs of one config.
pub fn aggregate_runs(results: &[RunResult]) -> Result<Aggregate> {
    if let Some(first) = results.first() {
        if results
            .iter()
            .any(|r| r.config_id != first.config_id || r.metric_name != first.metric_name)
        {
            return Err(Error::InvalidArgument(
                "runs to aggregate must share config and metric".into(),
            ));
        }
    }
    let values: Vec<f64> = results.iter().map(|r| r.value).collect();
    aggregate_values(&values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Candidate;
    use crate::ranker::FEATURE_DIM;

    fn ids(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    fn list(query: &str, docs: &[(&str, u8)], feature: impl Fn(usize) -> f64) -> FeaturizedList {
        FeaturizedList {
            list: CandidateList {
                query_id: query.into(),
                candidates: docs
                    .iter()
                    .map(|(d, l)| Candidate { doc_id: (*d).into(), label: *l, ns_score: 0.5 })
                    .collect(),
            },
            features: (0..docs.len())
                .map(|i| {
                    let mut v = vec![0.0; FEATURE_DIM];
                    v[0] = feature(i);
                    FeatureVector(v)
                })
                .collect(),
        }
    }

    #[test]
    fn recall_examples() {
        let r = ids(&["a", "b", "c"]);
        assert_eq!(recall_at_k(&r, "a", 1).unwrap(), 1);
        assert_eq!(recall_at_k(&r, "b", 1).unwrap(), 0);
        assert_eq!(recall_at_k(&r, "c", 3).unwrap(), 1);
        assert!(recall_at_k(&r, "z", 1).is_err());
        assert!(recall_at_k(&r, "a", 4).is_err());
        assert!(recall_at_k(&r, "a", 0).is_err());
    }

    #[test]
    fn zero_model_ranks_by_doc_id() {
        let p = ModelParams::zeros(FEATURE_DIM, 3);
        let l = list("q", &[("c", 0), ("a", 1), ("b", 0)], |i| i as f64);
        assert_eq!(rank_featurized(&p, &l).unwrap(), ids(&["a", "b", "c"]));
        let r = evaluate(&p, &[l], 1, Execution::Sequential).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.metric_name, "R3@1");
    }

    #[test]
    fn higher_logit_first() {
        // Only the relevance logit's bias path: w2 routes hidden[0] to class 1.
        let mut p = ModelParams::zeros(FEATURE_DIM, 1);
        p.w1[0] = 1.0;
        p.w2[1] = 1.0;
        let l = list("q", &[("a", 0), ("b", 1)], |i| i as f64 * 3.0);
        assert_eq!(rank_featurized(&p, &l).unwrap(), ids(&["b", "a"]));
        let r = evaluate(&p, &[l.clone(), l], 1, Execution::Parallel).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.per_query.len(), 2);
    }

    #[test]
    fn aggregate_examples() {
        let a = aggregate_values(&[0.5, 0.5, 0.5]).unwrap();
        assert_eq!((a.mean, a.std, a.ci95_half_width), (0.5, 0.0, 0.0));
        let a = aggregate_values(&[0.0, 1.0]).unwrap();
        assert_eq!(a.mean, 0.5);
        assert!((a.std - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(aggregate_values(&[0.3]).is_err());
    }

    #[test]
    fn aggregate_runs_requires_matching_config() {
        let r = |c: &str, v: f64| RunResult {
            config_id: c.into(),
            seed: 1,
            metric_name: "R10@1".into(),
            value: v,
            per_query: vec![],
        };
        assert!(aggregate_runs(&[r("a", 0.1), r("b", 0.2)]).is_err());
        assert_eq!(aggregate_runs(&[r("a", 0.1), r("a", 0.3)]).unwrap().runs, 2);
    }

    #[test]
    fn ci_shrinks_when_repeating_a_value() {
        let mut xs = vec![0.2, 0.4, 0.3, 0.5];
        let before = aggregate_values(&xs).unwrap();
        let m = before.mean;
        xs.push(m);
        let after = aggregate_values(&xs).unwrap();
        assert!(after.ci95_half_width < before.ci95_half_width);
    }
}
