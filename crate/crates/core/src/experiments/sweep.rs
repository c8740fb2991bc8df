use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{AxisValue, ExperimentSpec, RunPlan};
use crate::engine;
use crate::error::{Result, SimError};
use crate::metrics::{self, Histogram, MetricsSummary, HISTOGRAM_BINS};
use crate::strategy::StrategyKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub run_index: usize,
    pub point_index: usize,
    pub axis_values: Vec<AxisValue>,
    pub replication: u32,
    pub seed: u64,
    pub summary: Option<MetricsSummary>,
    pub error: Option<String>,
}

/// Mean and sample standard deviation over replications.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Stat {
        let n = values.len();
        if n == 0 {
            return Stat {
                n,
                mean: f64::NAN,
                sd: f64::NAN,
            };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let sd = if n > 1 {
            let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
            (ss / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Stat { n, mean, sd }
    }

    /// Standard error of the mean.
    pub fn se(&self) -> f64 {
        if self.n == 0 {
            f64::NAN
        } else {
            self.sd / (self.n as f64).sqrt()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub point_index: usize,
    pub axis_values: Vec<AxisValue>,
    pub kind: StrategyKind,
    /// Per-run mean ICA of this kind.
    pub mean_ica: Stat,
    pub gini: Stat,
    pub coverage: Stat,
    pub progress: Stat,
    pub survivors_final: Stat,
    pub starvation_fraction: Stat,
    /// ICA of every agent of this kind pooled over replications.
    pub ica_histogram: Histogram,
    /// Mean living count per tick.
    pub survival_curve_mean: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub spec: ExperimentSpec,
    pub rows: Vec<SweepRow>,
    pub aggregates: Vec<AggregateRow>,
}

impl SweepResult {
    pub fn aggregate(&self, point_index: usize, kind: StrategyKind) -> Option<&AggregateRow> {
        self.aggregates
            .iter()
            .find(|a| a.point_index == point_index && a.kind == kind)
    }

    /// Successful summaries of one axis point.
    pub fn summaries(&self, point_index: usize) -> impl Iterator<Item = &MetricsSummary> {
        self.rows
            .iter()
            .filter(move |r| r.point_index == point_index)
            .filter_map(|r| r.summary.as_ref())
    }

    pub fn failures(&self) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(|r| r.error.is_some())
    }
}

fn execute(plan: &RunPlan) -> SweepRow {
    let (summary, error) = match engine::run(&plan.config) {
        Ok(result) => (Some(metrics::summarize(&result)), None),
        Err(e) => (None, Some(e.to_string())),
    };
    SweepRow {
        run_index: plan.run_index,
        point_index: plan.point_index,
        axis_values: plan.axis_values.clone(),
        replication: plan.replication,
        seed: plan.config.run_seed,
        summary,
        error,
    }
}

/// Runs every planned run on a pool of `jobs` workers (all cores when
/// `None`). Rows come back in run order whatever the interleaving, so the
/// result does not depend on `jobs`. A failing run is recorded in its row.
pub fn run_sweep(spec: &ExperimentSpec, jobs: Option<usize>) -> Result<SweepResult> {
    let plans = spec.plan()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| SimError::config(format!("cannot start worker pool: {e}")))?;
    let rows: Vec<SweepRow> = pool.install(|| plans.par_iter().map(execute).collect());
    let aggregates = aggregate(spec, &rows);
    Ok(SweepResult {
        spec: spec.clone(),
        rows,
        aggregates,
    })
}

fn aggregate(spec: &ExperimentSpec, rows: &[SweepRow]) -> Vec<AggregateRow> {
    let mut out = Vec::new();
    for point_index in 0..spec.point_count() {
        let summaries: Vec<&MetricsSummary> = rows
            .iter()
            .filter(|r| r.point_index == point_index)
            .filter_map(|r| r.summary.as_ref())
            .collect();
        let mut kinds: BTreeMap<StrategyKind, ()> = BTreeMap::new();
        for s in &summaries {
            kinds.extend(s.population_by_kind.keys().map(|&k| (k, ())));
        }
        for &kind in kinds.keys() {
            let with_kind: Vec<&MetricsSummary> = summaries
                .iter()
                .copied()
                .filter(|s| s.population_by_kind.contains_key(&kind))
                .collect();
            let stat = |f: &dyn Fn(&MetricsSummary) -> f64| {
                Stat::of(&with_kind.iter().map(|s| f(s)).collect::<Vec<_>>())
            };
            let pooled: Vec<f64> = with_kind
                .iter()
                .flat_map(|s| s.ica_values_by_kind[&kind].iter().copied())
                .collect();
            let curves: Vec<&Vec<u32>> = with_kind
                .iter()
                .map(|s| &s.survival_curve_by_kind[&kind])
                .collect();
            let len = curves.iter().map(|c| c.len()).max().unwrap_or(0);
            let survival_curve_mean = (0..len)
                .map(|t| {
                    let sum: f64 = curves
                        .iter()
                        .map(|c| *c.get(t).or(c.last()).unwrap_or(&0) as f64)
                        .sum();
                    sum / curves.len() as f64
                })
                .collect();
            out.push(AggregateRow {
                point_index,
                axis_values: spec.point_values(point_index),
                kind,
                mean_ica: stat(&|s| s.mean_ica_by_kind[&kind]),
                gini: stat(&|s| s.gini_by_kind[&kind]),
                coverage: stat(&|s| s.coverage),
                progress: stat(&|s| s.progress),
                survivors_final: stat(&|s| s.survivors_final_by_kind[&kind] as f64),
                starvation_fraction: stat(&|s| s.starvation_fraction(kind).unwrap_or(0.0)),
                ica_histogram: metrics::histogram(&pooled, HISTOGRAM_BINS),
                survival_curve_mean,
            });
        }
    }
    out
}
