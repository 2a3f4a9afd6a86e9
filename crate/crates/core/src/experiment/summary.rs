use serde::{Deserialize, Serialize};

use super::{ExperimentError, ResultRow};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub trials: usize,
    pub mean_stop_time: f64,
    /// Lower median of `infected_at_stop`.
    pub median_infected_at_stop: usize,
    pub mean_dist_error: f64,
    pub fallback_count: usize,
    pub contaminated_count: usize,
    pub containment_count: usize,
}

/// Element at index `(n - 1) / 2` of the sorted values.
pub fn lower_median(values: &[usize]) -> Option<usize> {
    let mut v = values.to_vec();
    v.sort_unstable();
    v.get(v.len().wrapping_sub(1) / 2).copied()
}

/// Means use integer sums, so the result does not depend on row order.
pub fn summarize(rows: &[ResultRow]) -> Result<Summary, ExperimentError> {
    if rows.is_empty() {
        return Err(ExperimentError::EmptyInput);
    }
    let n = rows.len();
    let stop: u128 = rows.iter().map(|r| r.stop_time as u128).sum();
    let dist: u128 = rows.iter().map(|r| r.dist_error as u128).sum();
    let infected: Vec<usize> = rows.iter().map(|r| r.infected_at_stop).collect();
    Ok(Summary {
        trials: n,
        mean_stop_time: stop as f64 / n as f64,
        median_infected_at_stop: lower_median(&infected).expect("non-empty"),
        mean_dist_error: dist as f64 / n as f64,
        fallback_count: rows.iter().filter(|r| r.fallback).count(),
        contaminated_count: rows.iter().filter(|r| r.boundary_contaminated).count(),
        containment_count: rows.iter().filter(|r| r.containment).count(),
    })
}
