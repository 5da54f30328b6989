//! The training loop. Instances are visited in a seeded order, each gets
//! its target under the epsilon in force at its global index, and gradients
//! are averaged per minibatch before one Adam step.
//!
//! The loop is single-threaded so that a seed fully determines the result.

use std::fmt::Write as _;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::corpus::CandidateList;
use crate::dataset::{Dataset, FeaturizedList};
use crate::error::{Error, Result};
use crate::par::Execution;
use crate::ranker::{
    adam_step, forward, init_params, AdamConfig, AdamState, ModelParams, DEFAULT_HIDDEN, FEATURE_DIM,
};
use crate::ranker::{accumulate_gradients, Gradients};
use crate::seed::{derive_seed, rng};
use crate::smoothing::{cross_entropy, epsilon_at, Method, Schedule, SmoothingPolicy, TrainInstance};

const INIT_STREAM: u64 = 0x1417;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub policy: SmoothingPolicy,
    pub schedule: Schedule,
    pub batch_size: usize,
    pub total_instances: u64,
    pub adam: AdamConfig,
    pub seed: u64,
    pub n: usize,
    pub hidden: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            policy: SmoothingPolicy::hard(),
            schedule: Schedule::Constant,
            batch_size: 32,
            total_instances: 50_000,
            adam: AdamConfig::default(),
            seed: 1,
            n: 10,
            hidden: DEFAULT_HIDDEN,
        }
    }
}

impl TrainConfig {
    /// Applies a method (`hard`, `t-wsls`, ...) at `epsilon`. Two-stage
    /// methods switch at `switch_at`, or half the budget when `None`.
    pub fn with_method(mut self, method: Method, epsilon: f64, switch_at: Option<u64>) -> Result<Self> {
        let switch_at = switch_at.or(Some((self.total_instances / 2).max(1)));
        let (policy, schedule) = method.configure(epsilon, switch_at)?;
        self.policy = policy;
        self.schedule = schedule;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::InvalidArgument("batch size must be at least 1".into()));
        }
        if self.total_instances == 0 {
            return Err(Error::InvalidArgument("instance budget must be at least 1".into()));
        }
        if self.hidden == 0 {
            return Err(Error::InvalidArgument("hidden width must be at least 1".into()));
        }
        if let Schedule::TwoStage { switch_at } = self.schedule {
            if switch_at == 0 || switch_at > self.total_instances {
                return Err(Error::InvalidArgument(format!(
                    "switch point {switch_at} must lie in 1..={}",
                    self.total_instances
                )));
            }
        }
        Ok(())
    }

    /// Parameters before the first update.
    pub fn initial_params(&self) -> Result<ModelParams> {
        init_params(derive_seed(self.seed, INIT_STREAM), FEATURE_DIM, self.hidden)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogEntry {
    /// Instances consumed once this batch was applied.
    pub instances_seen: u64,
    /// Epsilon of the batch's last instance.
    pub epsilon: f64,
    pub loss: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainLog {
    pub entries: Vec<LogEntry>,
    pub checkpoint: Option<PathBuf>,
}

impl TrainLog {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("instances_seen,epsilon,loss\n");
        for e in &self.entries {
            let _ = writeln!(out, "{},{},{:.6}", e.instances_seen, e.epsilon, e.loss);
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: ModelParams,
    pub state: AdamState,
    pub log: TrainLog,
}

/// Visit order over `pairs` items: seeded permutations, reshuffled each pass
/// with seed `seed + pass`, until `total` indices are produced.
pub fn instance_order(pairs: usize, total: u64, seed: u64) -> Result<Vec<usize>> {
    if pairs == 0 {
        return Err(Error::InvalidArgument("no training instances".into()));
    }
    let total = total as usize;
    let mut order = Vec::with_capacity(total);
    let mut pass = 0u64;
    while order.len() < total {
        let mut perm: Vec<usize> = (0..pairs).collect();
        perm.shuffle(&mut rng(seed.wrapping_add(pass)));
        let take = (total - order.len()).min(pairs);
        order.extend_from_slice(&perm[..take]);
        pass += 1;
    }
    Ok(order)
}

fn flatten(lists: &[CandidateList]) -> Vec<TrainInstance> {
    lists
        .iter()
        .flat_map(|l| {
            l.candidates.iter().map(move |c| TrainInstance {
                query_id: l.query_id.clone(),
                doc_id: c.doc_id.clone(),
                label: c.label,
                ns_score: c.ns_score,
            })
        })
        .collect()
}

/// Every (query, candidate) pair, in seeded visiting order, `total` long.
pub fn make_instance_stream(lists: &[CandidateList], total: u64, seed: u64) -> Result<Vec<TrainInstance>> {
    let pairs = flatten(lists);
    let order = instance_order(pairs.len(), total, seed)?;
    Ok(order.into_iter().map(|i| pairs[i].clone()).collect())
}

pub fn train(config: &TrainConfig, dataset: &Dataset, lists: &[CandidateList]) -> Result<TrainOutcome> {
    let featurized = dataset.featurize(lists, Execution::default())?;
    train_featurized(config, &featurized)
}

/// Trains on lists whose features were already extracted.
pub fn train_featurized(config: &TrainConfig, lists: &[FeaturizedList]) -> Result<TrainOutcome> {
    config.validate()?;
    let plain: Vec<CandidateList> = lists.iter().map(|f| f.list.clone()).collect();
    let instances = flatten(&plain);
    let features: Vec<&[f64]> = lists
        .iter()
        .flat_map(|f| f.features.iter().map(|v| v.values()))
        .collect();
    let order = instance_order(instances.len(), config.total_instances, config.seed)?;

    let mut params = config.initial_params()?;
    let mut state = AdamState::new(&params);
    let mut grads = Gradients::zeros(params.input_dim(), params.hidden_dim());
    let mut log = TrainLog::default();

    for (b, batch) in order.chunks(config.batch_size).enumerate() {
        let start = (b * config.batch_size) as u64;
        let scale = 1.0 / batch.len() as f64;
        grads.fill(0.0);
        let mut loss = 0.0;
        for (offset, &pair) in batch.iter().enumerate() {
            let eps = epsilon_at(config.schedule, &config.policy, start + offset as u64);
            let target = config.policy.target(&instances[pair], eps)?;
            let (logits, hidden) = forward(&params, features[pair])?;
            loss += cross_entropy(&target, logits)?;
            accumulate_gradients(&params, features[pair], &hidden, logits, &target, scale, &mut grads);
        }
        adam_step(&mut params, &grads, &mut state, &config.adam)?;
        let seen = start + batch.len() as u64;
        let mean_loss = loss * scale;
        if !mean_loss.is_finite() {
            return Err(Error::InvalidArgument(format!("loss diverged at instance {seen}")));
        }
        log.entries.push(LogEntry {
            instances_seen: seen,
            epsilon: epsilon_at(config.schedule, &config.policy, seen - 1),
            loss: mean_loss,
        });
    }
    Ok(TrainOutcome { params, state, log })
}
