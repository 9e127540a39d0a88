//! Sample statistics with nearest-rank percentiles. Every field is exactly
//! checkable against a sorting oracle; there is no interpolation.

use serde::Serialize;

use super::BenchError;

/// Timing statistics in nanoseconds. Percentiles are nearest-rank on the
/// sorted samples: `index = ⌈p/100 · n⌉ − 1`; the median is p50 by the same
/// rule. The stddev is the population form, accumulated in ascending order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stats {
    pub count: u64,
    pub min: u64,
    pub max: u64,
    pub mean: f64,
    pub median: u64,
    pub p90: u64,
    pub p99: u64,
    pub stddev: f64,
}

fn nearest_rank(sorted: &[u64], percentile: u32) -> u64 {
    debug_assert!(!sorted.is_empty());
    let n = sorted.len();
    let rank = (percentile as f64 / 100.0 * n as f64).ceil() as usize;
    sorted[rank.max(1) - 1]
}

pub fn summarize(samples: &[u64]) -> Result<Stats, BenchError> {
    if samples.is_empty() {
        return Err(BenchError::EmptySamples);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_unstable();
    let n = sorted.len();
    let total: u128 = sorted.iter().map(|&v| v as u128).sum();
    let mean = total as f64 / n as f64;
    let mut sq_dev = 0.0f64;
    for &v in &sorted {
        let d = v as f64 - mean;
        sq_dev += d * d;
    }
    let stddev = (sq_dev / n as f64).sqrt();
    Ok(Stats {
        count: n as u64,
        min: sorted[0],
        max: sorted[n - 1],
        mean,
        median: nearest_rank(&sorted, 50),
        p90: nearest_rank(&sorted, 90),
        p99: nearest_rank(&sorted, 99),
        stddev,
    })
}
