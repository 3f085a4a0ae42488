//! Solution quality, discovery fraction and aggregation over repeated runs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::summation::compensated_sum;
use crate::swarm::{Counters, TopologySpec};

/// Identifies the setup a run was produced by.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunDigest {
    pub objective: String,
    pub topology: TopologySpec,
    pub lambda: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    /// Global-best fitness after initialization and after every iteration.
    pub trajectory: Vec<f64>,
    /// Solution quality `R`: the final global-best fitness.
    pub final_fitness: f64,
    pub best_position: Vec<f64>,
    pub num_fi: u64,
    pub num_total: u64,
    pub counters: Counters,
    pub iterations: usize,
    pub digest: RunDigest,
}

impl RunResult {
    pub fn discovery_fraction(&self) -> f64 {
        discovery_fraction(self.num_fi, self.num_total)
    }
}

/// `p = num_FI / num_total`, zero when nothing improved.
pub fn discovery_fraction(num_fi: u64, num_total: u64) -> f64 {
    if num_total == 0 {
        0.0
    } else {
        num_fi as f64 / num_total as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateStats {
    pub runs: usize,
    pub mean_r: f64,
    pub median_r: f64,
    /// Sample standard deviation (zero for a single run).
    pub std_r: f64,
    pub mean_p: f64,
    pub mean_trajectory: Vec<f64>,
}

pub fn mean(values: &[f64]) -> f64 {
    compensated_sum(values.iter().copied()) / values.len() as f64
}

pub fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

pub fn sample_std(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    let ss = compensated_sum(values.iter().map(|v| (v - m) * (v - m)));
    (ss / (values.len() - 1) as f64).sqrt()
}

/// R and p statistics from per-run scalars, in any order.
///
/// Values are sorted before summation so that the result does not depend on
/// input order.
pub fn summarize(final_fitness: &[f64], fractions: &[f64]) -> Result<(f64, f64, f64, f64)> {
    if final_fitness.is_empty() {
        return Err(Error::Aggregate("no runs to aggregate".into()));
    }
    if final_fitness.len() != fractions.len() {
        return Err(Error::Aggregate("fitness and fraction counts differ".into()));
    }
    let mut r = final_fitness.to_vec();
    r.sort_by(f64::total_cmp);
    let mut p = fractions.to_vec();
    p.sort_by(f64::total_cmp);
    Ok((mean(&r), median(&r), sample_std(&r), mean(&p)))
}

pub fn aggregate(results: &[RunResult]) -> Result<AggregateStats> {
    let first = results
        .first()
        .ok_or_else(|| Error::Aggregate("no runs to aggregate".into()))?;
    let len = first.trajectory.len();
    if let Some(bad) = results.iter().find(|r| r.trajectory.len() != len) {
        return Err(Error::Aggregate(format!(
            "mixed trajectory lengths {len} and {}",
            bad.trajectory.len()
        )));
    }
    if let Some(bad) = results.iter().find(|r| r.digest.objective != first.digest.objective) {
        return Err(Error::Aggregate(format!(
            "mixed objectives `{}` and `{}`",
            first.digest.objective, bad.digest.objective
        )));
    }
    let r: Vec<f64> = results.iter().map(|r| r.final_fitness).collect();
    let p: Vec<f64> = results.iter().map(RunResult::discovery_fraction).collect();
    let (mean_r, median_r, std_r, mean_p) = summarize(&r, &p)?;

    let mut column = vec![0.0; results.len()];
    let mean_trajectory = (0..len)
        .map(|t| {
            for (c, res) in column.iter_mut().zip(results) {
                *c = res.trajectory[t];
            }
            column.sort_by(f64::total_cmp);
            mean(&column)
        })
        .collect();

    Ok(AggregateStats {
        runs: results.len(),
        mean_r,
        median_r,
        std_r,
        mean_p,
        mean_trajectory,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub mean_r: f64,
    pub median_r: f64,
    pub mean_p: f64,
    pub is_best: bool,
}

/// Index of the lowest mean R (first on ties).
pub fn argmin_mean(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, v) in values.iter().enumerate() {
        if best.is_none_or(|b| *v < values[b]) {
            best = Some(i);
        }
    }
    best
}

/// Orders cells by λ and flags the one with the lowest mean R.
pub fn lambda_sweep_summary(cells: &[(f64, AggregateStats)]) -> Vec<SweepRow> {
    let mut rows: Vec<SweepRow> = cells
        .iter()
        .map(|(lambda, s)| SweepRow {
            lambda: *lambda,
            mean_r: s.mean_r,
            median_r: s.median_r,
            mean_p: s.mean_p,
            is_best: false,
        })
        .collect();
    rows.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    let means: Vec<f64> = rows.iter().map(|r| r.mean_r).collect();
    if let Some(i) = argmin_mean(&means) {
        rows[i].is_best = true;
    }
    rows
}

pub fn best_lambda(rows: &[SweepRow]) -> Option<f64> {
    rows.iter().find(|r| r.is_best).map(|r| r.lambda)
}
