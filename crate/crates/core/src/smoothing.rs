//! Training targets for the two-class relevance problem and the
//! cross-entropy loss over them.
//!
//! Class 0 is "not relevant", class 1 is "relevant". A smoothed target mixes
//! the one-hot label with an auxiliary distribution `w`:
//!
//! ```text
//! q'(k | x) = (1 - eps) * [k == y] + eps * w(k | x)
//! ```
//!
//! Plain label smoothing uses `w = (1/2, 1/2)`. The weakly supervised variant
//! uses `w = (1 - s, s)` for sampled negatives, where `s` is the normalized
//! negative-sampler score, so a negative that looks like the query gets more
//! mass on the relevant class. Positives always fall back to `(1/2, 1/2)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetDistribution {
    pub p_nonrel: f64,
    pub p_rel: f64,
}

impl TargetDistribution {
    pub fn as_array(&self) -> [f64; 2] {
        [self.p_nonrel, self.p_rel]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainInstance {
    pub query_id: String,
    pub doc_id: String,
    pub label: u8,
    pub ns_score: f64,
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} = {v} is outside [0, 1]")))
    }
}

fn check_label(y: u8) -> Result<()> {
    if y <= 1 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("label {y} is not 0 or 1")))
    }
}

fn mix(y: u8, epsilon: f64, w_rel: f64) -> TargetDistribution {
    let hard = 1.0 - epsilon;
    let (d_nonrel, d_rel) = if y == 1 { (0.0, hard) } else { (hard, 0.0) };
    TargetDistribution {
        p_nonrel: d_nonrel + epsilon * (1.0 - w_rel),
        p_rel: d_rel + epsilon * w_rel,
    }
}

pub fn hard_target(y: u8) -> Result<TargetDistribution> {
    check_label(y)?;
    Ok(mix(y, 0.0, 0.5))
}

pub fn ls_target(y: u8, epsilon: f64) -> Result<TargetDistribution> {
    check_label(y)?;
    check_unit("epsilon", epsilon)?;
    Ok(mix(y, epsilon, 0.5))
}

pub fn wsls_target(y: u8, ns_score: f64, epsilon: f64) -> Result<TargetDistribution> {
    check_label(y)?;
    check_unit("epsilon", epsilon)?;
    check_unit("ns_score", ns_score)?;
    let w_rel = if y == 1 { 0.5 } else { ns_score };
    Ok(mix(y, epsilon, w_rel))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SmoothingKind {
    Hard,
    Ls,
    Wsls,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothingPolicy {
    kind: SmoothingKind,
    epsilon: f64,
}

impl SmoothingPolicy {
    pub fn new(kind: SmoothingKind, epsilon: f64) -> Result<Self> {
        check_unit("epsilon", epsilon)?;
        if kind == SmoothingKind::Hard && epsilon != 0.0 {
            return Err(Error::InvalidArgument(format!(
                "hard labels take no smoothing, got epsilon = {epsilon}"
            )));
        }
        Ok(Self { kind, epsilon })
    }

    pub fn hard() -> Self {
        Self {
            kind: SmoothingKind::Hard,
            epsilon: 0.0,
        }
    }

    pub fn kind(&self) -> SmoothingKind {
        self.kind
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Target for one instance under an effective (possibly scheduled) epsilon.
    pub fn target(&self, instance: &TrainInstance, effective_epsilon: f64) -> Result<TargetDistribution> {
        match self.kind {
            SmoothingKind::Hard => hard_target(instance.label),
            SmoothingKind::Ls => ls_target(instance.label, effective_epsilon),
            SmoothingKind::Wsls => wsls_target(instance.label, instance.ns_score, effective_epsilon),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Schedule {
    Constant,
    /// Smoothing for the first `switch_at` instances, hard labels after.
    TwoStage { switch_at: u64 },
}

impl Schedule {
    pub fn two_stage(switch_at: u64) -> Result<Self> {
        if switch_at == 0 {
            return Err(Error::InvalidArgument("two-stage switch point must be at least 1".into()));
        }
        Ok(Schedule::TwoStage { switch_at })
    }
}

/// Epsilon in force for the instance with 0-based global index `instances_seen`.
pub fn epsilon_at(schedule: Schedule, policy: &SmoothingPolicy, instances_seen: u64) -> f64 {
    match schedule {
        Schedule::Constant => policy.epsilon,
        Schedule::TwoStage { switch_at } if instances_seen < switch_at => policy.epsilon,
        Schedule::TwoStage { .. } => 0.0,
    }
}

/// The run-config spelling of a policy: `hard`, `ls`, `wsls`, `t-ls`, `t-wsls`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "hard")]
    Hard,
    #[serde(rename = "ls")]
    Ls,
    #[serde(rename = "wsls")]
    Wsls,
    #[serde(rename = "t-ls")]
    TwoStageLs,
    #[serde(rename = "t-wsls")]
    TwoStageWsls,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Hard,
        Method::Ls,
        Method::Wsls,
        Method::TwoStageLs,
        Method::TwoStageWsls,
    ];

    pub fn kind(self) -> SmoothingKind {
        match self {
            Method::Hard => SmoothingKind::Hard,
            Method::Ls | Method::TwoStageLs => SmoothingKind::Ls,
            Method::Wsls | Method::TwoStageWsls => SmoothingKind::Wsls,
        }
    }

    pub fn is_two_stage(self) -> bool {
        matches!(self, Method::TwoStageLs | Method::TwoStageWsls)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Hard => "hard",
            Method::Ls => "ls",
            Method::Wsls => "wsls",
            Method::TwoStageLs => "t-ls",
            Method::TwoStageWsls => "t-wsls",
        }
    }

    /// Policy and schedule for this method. `switch_at` is required for the
    /// two-stage methods and ignored otherwise.
    pub fn configure(self, epsilon: f64, switch_at: Option<u64>) -> Result<(SmoothingPolicy, Schedule)> {
        let policy = SmoothingPolicy::new(self.kind(), epsilon)?;
        let schedule = if self.is_two_stage() {
            let x = switch_at.ok_or_else(|| {
                Error::InvalidArgument(format!("`{}` needs a switch point", self.as_str()))
            })?;
            Schedule::two_stage(x)?
        } else {
            Schedule::Constant
        };
        Ok((policy, schedule))
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown policy `{s}`")))
    }
}

fn log_softmax(logits: [f64; 2]) -> ([f64; 2], f64) {
    let m = logits[0].max(logits[1]);
    let shifted = [logits[0] - m, logits[1] - m];
    let log_norm = (shifted[0].exp() + shifted[1].exp()).ln();
    (shifted, log_norm)
}

pub fn softmax(logits: [f64; 2]) -> [f64; 2] {
    let (shifted, log_norm) = log_softmax(logits);
    [(shifted[0] - log_norm).exp(), (shifted[1] - log_norm).exp()]
}

/// `-sum_k q(k) log p(k)` with `p = softmax(logits)`, via a max-shifted
/// log-sum-exp. Zero-mass classes contribute nothing.
pub fn cross_entropy(target: &TargetDistribution, logits: [f64; 2]) -> Result<f64> {
    if !logits.iter().all(|z| z.is_finite()) {
        return Err(Error::NonFiniteLogits(logits[0], logits[1]));
    }
    let (shifted, log_norm) = log_softmax(logits);
    // Targets sum to one, so -sum q log p = log_norm - sum q * shifted.
    let loss = log_norm - (target.p_nonrel * shifted[0] + target.p_rel * shifted[1]);
    Ok(loss.max(0.0))
}

/// Gradient of [`cross_entropy`] with respect to the logits: `p - q`.
pub fn ce_gradient(target: &TargetDistribution, logits: [f64; 2]) -> [f64; 2] {
    let p = softmax(logits);
    [p[0] - target.p_nonrel, p[1] - target.p_rel]
}
