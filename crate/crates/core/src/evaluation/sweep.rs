use std::fmt::Write as _;

use super::{aggregate_values, bonferroni, evaluate, paired_t_test, Aggregate, RunResult};
use crate::dataset::FeaturizedList;
use crate::error::{Error, Result};
use crate::par::Execution;
use crate::ranker::{encode_checkpoint, fnv1a};
use crate::smoothing::Method;
use crate::trainer::{train_featurized, TrainConfig};

pub const SWEEP_HEADER: &str = "policy,epsilon,mean,std,ci95,runs";
pub const RESULTS_HEADER: &str = "config_id,policy,epsilon,seed,metric,value";

/// A grid of (method, epsilon, seed) training runs plus a hard-label
/// baseline for every seed.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub base: TrainConfig,
    pub methods: Vec<Method>,
    pub epsilons: Vec<f64>,
    pub seeds: Vec<u64>,
    /// Switch point for two-stage methods; half the budget when `None`.
    pub switch_at: Option<u64>,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub method: Method,
    pub epsilon: f64,
    pub seed: u64,
    pub result: RunResult,
    /// FNV-1a of the encoded final checkpoint.
    pub fingerprint: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub method: Method,
    pub epsilon: f64,
    pub aggregate: Aggregate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub cells: Vec<CellResult>,
    pub rows: Vec<SweepRow>,
}

pub fn config_id(method: Method, epsilon: f64) -> String {
    format!("{method}@{epsilon}")
}

impl SweepSpec {
    fn validate(&self) -> Result<()> {
        if self.seeds.len() < 2 {
            return Err(Error::InvalidArgument("a sweep needs at least 2 seeds".into()));
        }
        if let Some(e) = self.epsilons.iter().find(|e| !(0.0..=1.0).contains(*e)) {
            return Err(Error::InvalidArgument(format!("epsilon {e} outside [0, 1]")));
        }
        if self.methods.contains(&Method::Hard) {
            return Err(Error::InvalidArgument("the hard baseline is always included; do not list it".into()));
        }
        Ok(())
    }

    /// Baseline cells first, then methods × epsilons, each over all seeds.
    fn grid(&self) -> Vec<(Method, f64, u64)> {
        let mut cells: Vec<(Method, f64, u64)> =
            self.seeds.iter().map(|&s| (Method::Hard, 0.0, s)).collect();
        for &m in &self.methods {
            for &e in &self.epsilons {
                cells.extend(self.seeds.iter().map(|&s| (m, e, s)));
            }
        }
        cells
    }
}

/// Trains and evaluates every cell. Cells run concurrently under a parallel
/// [`Execution`]; the output order is fixed regardless.
pub fn epsilon_sweep(
    spec: &SweepSpec,
    train: &[FeaturizedList],
    eval: &[FeaturizedList],
    exec: Execution,
) -> Result<SweepOutcome> {
    spec.validate()?;
    let grid = spec.grid();
    let cells = exec.try_map(&grid, |&(method, epsilon, seed)| {
        let config = TrainConfig { seed, ..spec.base }.with_method(method, epsilon, spec.switch_at)?;
        let out = train_featurized(&config, train)?;
        let mut result = evaluate(&out.params, eval, spec.k, Execution::Sequential)?;
        result.config_id = config_id(method, epsilon);
        result.seed = seed;
        Ok::<_, Error>(CellResult {
            method,
            epsilon,
            seed,
            result,
            fingerprint: fnv1a(&encode_checkpoint(&out.params, &out.state)?),
        })
    })?;

    let per_config = spec.seeds.len();
    let rows = cells
        .chunks(per_config)
        .map(|chunk| {
            let values: Vec<f64> = chunk.iter().map(|c| c.result.value).collect();
            Ok(SweepRow {
                method: chunk[0].method,
                epsilon: chunk[0].epsilon,
                aggregate: aggregate_values(&values)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepOutcome { cells, rows })
}

impl SweepOutcome {
    pub fn sweep_csv(&self) -> String {
        let mut out = format!("{SWEEP_HEADER}\n");
        for r in &self.rows {
            let a = &r.aggregate;
            let _ = writeln!(
                out,
                "{},{},{:.6},{:.6},{:.6},{}",
                r.method, r.epsilon, a.mean, a.std, a.ci95_half_width, a.runs
            );
        }
        out
    }

    pub fn results_csv(&self) -> String {
        let mut out = format!("{RESULTS_HEADER}\n");
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{:.6}",
                c.result.config_id, c.method, c.epsilon, c.seed, c.result.metric_name, c.result.value
            );
        }
        out
    }

    /// Per-seed metric values of one configuration, in seed order.
    pub fn values(&self, method: Method, epsilon: f64) -> Vec<f64> {
        self.cells
            .iter()
            .filter(|c| c.method == method && c.epsilon == epsilon)
            .map(|c| c.result.value)
            .collect()
    }
}

fn marker(p: f64, diff: f64, alpha: f64, up: &'static str, down: &'static str) -> &'static str {
    if p < alpha && diff > 0.0 {
        up
    } else if p < alpha && diff < 0.0 {
        down
    } else {
        ""
    }
}

/// Text table comparing every configuration with the hard baseline
/// (▲/▼), and each `t-wsls` row with `t-ls` at the same epsilon (△/▽).
/// P-values are two-sided paired t-tests, Bonferroni-adjusted by `m`.
pub fn significance_report(outcome: &SweepOutcome, alpha: f64, m: usize) -> Result<String> {
    let baseline = outcome.values(Method::Hard, 0.0);
    let base_mean = super::stats::mean(&baseline);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# paired two-sided t-test, alpha = {alpha}, Bonferroni m = {m}; \u{25B2}/\u{25BC} vs hard, \u{25B3}/\u{25BD} vs t-ls"
    );
    let _ = writeln!(
        out,
        "{:<8} {:>8} {:>10} {:>12} {:>12}  markers",
        "policy", "epsilon", "mean", "p(hard)", "p(t-ls)"
    );
    for row in &outcome.rows {
        let values = outcome.values(row.method, row.epsilon);
        let mean = row.aggregate.mean;
        if row.method == Method::Hard {
            let _ = writeln!(out, "{:<8} {:>8} {:>10.6} {:>12} {:>12}", row.method, row.epsilon, mean, "-", "-");
            continue;
        }
        let p_base = bonferroni(&[paired_t_test(&values, &baseline)?.p], m)?[0];
        let mut markers = marker(p_base, mean - base_mean, alpha, "\u{25B2}", "\u{25BC}").to_owned();
        let mut p_ls = "-".to_owned();
        if row.method == Method::TwoStageWsls {
            let ls = outcome.values(Method::TwoStageLs, row.epsilon);
            if ls.len() == values.len() {
                let p = bonferroni(&[paired_t_test(&values, &ls)?.p], m)?[0];
                markers.push_str(marker(p, mean - super::stats::mean(&ls), alpha, "\u{25B3}", "\u{25BD}"));
                p_ls = format!("{p:.6}");
            }
        }
        let line = format!(
            "{:<8} {:>8} {:>10.6} {:>12.6} {:>12}  {}",
            row.method, row.epsilon, mean, p_base, p_ls, markers
        );
        let _ = writeln!(out, "{}", line.trim_end());
    }
    Ok(out)
}
