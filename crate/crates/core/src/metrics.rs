//! Tracking-error aggregates per area: `sum |e|`, `sum e^2` and `max |e|`
//! over samples (no time weighting).

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub sum_abs_e: [f64; 2],
    pub sum_sq_e: [f64; 2],
    pub max_abs_e: [f64; 2],
    /// Samples accumulated. Less than the scheduled count for diverged runs.
    pub samples: usize,
    pub sample_period: f64,
    pub diverged: bool,
    pub seed: u64,
}

/// Running accumulator behind [`MetricsReport`].
#[derive(Debug, Clone, Default)]
pub struct MetricsAccumulator {
    report: MetricsReport,
}

impl MetricsAccumulator {
    pub fn new(sample_period: f64, seed: u64) -> Self {
        Self {
            report: MetricsReport {
                sample_period,
                seed,
                ..Default::default()
            },
        }
    }

    pub fn push(&mut self, e: [f64; 2]) {
        let r = &mut self.report;
        for (i, v) in e.iter().enumerate() {
            let a = v.abs();
            r.sum_abs_e[i] += a;
            r.sum_sq_e[i] += a * a;
            r.max_abs_e[i] = r.max_abs_e[i].max(a);
        }
        r.samples += 1;
    }

    pub fn mark_diverged(&mut self) {
        self.report.diverged = true;
    }

    pub fn finish(self) -> MetricsReport {
        self.report
    }
}

/// Aggregate two equally long per-sample error sequences.
pub fn compute_metrics(e1: &[f64], e2: &[f64]) -> MetricsReport {
    let mut acc = MetricsAccumulator::default();
    for (&a, &b) in e1.iter().zip(e2) {
        acc.push([a, b]);
    }
    acc.finish()
}

/// Per-metric means over a Monte Carlo batch.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MeanMetrics {
    pub sum_abs_e: [f64; 2],
    pub sum_sq_e: [f64; 2],
    pub max_abs_e: [f64; 2],
    pub runs: usize,
    pub diverged_runs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub mean: MeanMetrics,
    /// Per-run reports ordered by seed.
    pub runs: Vec<MetricsReport>,
}

impl MonteCarloReport {
    /// Aggregate runs given in any order. Runs are sorted by seed before
    /// summation, so the means are bitwise independent of execution order.
    pub fn from_runs(mut runs: Vec<MetricsReport>) -> Self {
        runs.sort_by_key(|r| r.seed);
        let n = runs.len();
        let mut mean = MeanMetrics {
            runs: n,
            diverged_runs: runs.iter().filter(|r| r.diverged).count(),
            ..Default::default()
        };
        if n > 0 {
            let avg = |f: &dyn Fn(&MetricsReport) -> f64| runs.iter().map(f).sum::<f64>() / n as f64;
            for i in 0..2 {
                mean.sum_abs_e[i] = avg(&|r| r.sum_abs_e[i]);
                mean.sum_sq_e[i] = avg(&|r| r.sum_sq_e[i]);
                mean.max_abs_e[i] = avg(&|r| r.max_abs_e[i]);
            }
        }
        Self { mean, runs }
    }
}

impl From<&MetricsReport> for MeanMetrics {
    fn from(r: &MetricsReport) -> Self {
        MonteCarloReport::from_runs(vec![*r]).mean
    }
}
