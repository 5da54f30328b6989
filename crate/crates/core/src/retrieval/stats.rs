use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::smoothing::TrainInstance;

pub const HISTOGRAM_BINS: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct HistogramBin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
}

/// Distribution of normalized sampler scores over negative instances.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreStats {
    pub histogram: Vec<HistogramBin>,
    pub mean: f64,
    pub count: usize,
}

impl ScoreStats {
    /// `bin_lower,bin_upper,count` rows followed by `mean,<value>,<count>`.
    /// The mean is written at full precision.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_lower,bin_upper,count\n");
        for bin in &self.histogram {
            let _ = writeln!(out, "{:.2},{:.2},{}", bin.lower, bin.upper, bin.count);
        }
        let _ = writeln!(out, "mean,{},{}", self.mean, self.count);
        out
    }
}

fn bin_of(score: f64) -> usize {
    ((score * HISTOGRAM_BINS as f64).floor() as usize).min(HISTOGRAM_BINS - 1)
}

/// 20 equal-width bins over `[0, 1]` (last bin closed) and the mean of the
/// `ns_score` of every label-0 instance.
pub fn ns_score_stats(instances: &[TrainInstance]) -> Result<ScoreStats> {
    let scores: Vec<f64> = instances
        .iter()
        .filter(|i| i.label == 0)
        .map(|i| i.ns_score)
        .collect();
    if scores.is_empty() {
        return Err(Error::NoNegatives);
    }
    let mut histogram: Vec<HistogramBin> = (0..HISTOGRAM_BINS)
        .map(|i| HistogramBin {
            lower: i as f64 / HISTOGRAM_BINS as f64,
            upper: (i + 1) as f64 / HISTOGRAM_BINS as f64,
            count: 0,
        })
        .collect();
    for &s in &scores {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::InvalidArgument(format!("ns_score {s} outside [0, 1]")));
        }
        histogram[bin_of(s)].count += 1;
    }
    let mean = scores.iter().sum::<f64>() / scores.len() as f64;
    Ok(ScoreStats {
        histogram,
        mean,
        count: scores.len(),
    })
}
