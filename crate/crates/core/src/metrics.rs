//! Evaluation metrics: progress, coverage, individual cumulative achievement
//! (ICA) distributions, Gini inequality and survival curves.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::engine::{Agent, DepartureCause, RunResult};
use crate::error::{Result, SimError};
use crate::landscape::Landscape;
use crate::strategy::StrategyKind;

/// Fraction of the initial significance consumed so far. A landscape that
/// started empty has made no progress.
pub fn progress(initial_total: f64, current_total: f64) -> f64 {
    if initial_total <= 0.0 {
        return 0.0;
    }
    ((initial_total - current_total) / initial_total).clamp(0.0, 1.0)
}

/// Fraction of patches visited at least once.
pub fn coverage(landscape: &Landscape) -> f64 {
    landscape.visited_count() as f64 / landscape.patch_count() as f64
}

/// ICA of every agent of `kind`, departed ones included, in id order.
pub fn ica_distribution(agents: &[Agent], kind: StrategyKind) -> Vec<f64> {
    let mut picked: Vec<&Agent> = agents.iter().filter(|a| a.kind == kind).collect();
    picked.sort_by_key(|a| a.id);
    picked.into_iter().map(|a| a.ica).collect()
}

/// Gini coefficient `sum_i sum_j |v_i - v_j| / (2 n^2 mean)`, computed from
/// the sorted values in `O(n log n)`. Zero when every value is zero.
pub fn gini(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(SimError::UndefinedInput("gini of an empty list".into()));
    }
    if let Some(v) = values.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
        return Err(SimError::UndefinedInput(format!(
            "gini needs finite nonnegative values, got {v}"
        )));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let sum: f64 = sorted.iter().sum();
    if sum == 0.0 {
        return Ok(0.0);
    }
    let weighted: f64 = sorted
        .iter()
        .enumerate()
        .map(|(i, &v)| (2.0 * (i as f64 + 1.0) - n - 1.0) * v)
        .sum();
    Ok((weighted / (n * sum)).clamp(0.0, 1.0))
}

/// Living agents of `kind` at every recorded tick.
pub fn survival_curve(result: &RunResult, kind: StrategyKind) -> Vec<u32> {
    result
        .ticks
        .iter()
        .map(|t| t.survivors_by_kind.get(&kind).copied().unwrap_or(0))
        .collect()
}

/// Equal-width histogram over `[0, max]`. `edges` has one more entry than
/// `counts`; the last bin is closed on the right.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

pub const HISTOGRAM_BINS: usize = 20;

pub fn histogram(values: &[f64], bins: usize) -> Histogram {
    let bins = bins.max(1);
    let max = values.iter().copied().fold(0.0, f64::max);
    let width = max / bins as f64;
    let edges = (0..=bins)
        .map(|i| if i == bins { max } else { width * i as f64 })
        .collect();
    let mut counts = vec![0u64; bins];
    for &v in values {
        let b = if width > 0.0 {
            ((v / width) as usize).min(bins - 1)
        } else {
            0
        };
        counts[b] += 1;
    }
    Histogram { edges, counts }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub progress: f64,
    pub coverage: f64,
    pub population_by_kind: BTreeMap<StrategyKind, u32>,
    pub ica_values_by_kind: BTreeMap<StrategyKind, Vec<f64>>,
    pub gini_by_kind: BTreeMap<StrategyKind, f64>,
    pub mean_ica_by_kind: BTreeMap<StrategyKind, f64>,
    pub survivors_final_by_kind: BTreeMap<StrategyKind, u32>,
    pub starved_by_kind: BTreeMap<StrategyKind, u32>,
    pub retired_by_kind: BTreeMap<StrategyKind, u32>,
    pub survival_curve_by_kind: BTreeMap<StrategyKind, Vec<u32>>,
}

impl MetricsSummary {
    /// Fraction of the configured agents of `kind` that starved.
    pub fn starvation_fraction(&self, kind: StrategyKind) -> Option<f64> {
        let n = *self.population_by_kind.get(&kind)?;
        if n == 0 {
            return None;
        }
        Some(self.starved_by_kind.get(&kind).copied().unwrap_or(0) as f64 / n as f64)
    }
}

/// Summarises a finished run. Only kinds with at least one configured agent
/// appear in the maps.
pub fn summarize(result: &RunResult) -> MetricsSummary {
    let last = result.final_tick();
    let mut s = MetricsSummary {
        progress: progress(result.landscape_initial_total, result.landscape_final_total),
        coverage: last.coverage,
        population_by_kind: BTreeMap::new(),
        ica_values_by_kind: BTreeMap::new(),
        gini_by_kind: BTreeMap::new(),
        mean_ica_by_kind: BTreeMap::new(),
        survivors_final_by_kind: BTreeMap::new(),
        starved_by_kind: BTreeMap::new(),
        retired_by_kind: BTreeMap::new(),
        survival_curve_by_kind: BTreeMap::new(),
    };
    for (kind, count) in result.config.population_by_kind() {
        if count == 0 {
            continue;
        }
        let icas = ica_distribution(&result.agents_final, kind);
        let mean = icas.iter().sum::<f64>() / icas.len() as f64;
        let g = gini(&icas).expect("ICA values are finite, nonnegative and nonempty");
        let departed = |cause| {
            result
                .agents_final
                .iter()
                .filter(|a| a.kind == kind && a.departure.map(|d| d.cause) == Some(cause))
                .count() as u32
        };
        s.population_by_kind.insert(kind, count);
        s.starved_by_kind
            .insert(kind, departed(DepartureCause::Starvation));
        s.retired_by_kind
            .insert(kind, departed(DepartureCause::Retirement));
        s.survivors_final_by_kind.insert(
            kind,
            last.survivors_by_kind.get(&kind).copied().unwrap_or(0),
        );
        s.survival_curve_by_kind
            .insert(kind, survival_curve(result, kind));
        s.mean_ica_by_kind.insert(kind, mean);
        s.gini_by_kind.insert(kind, g);
        s.ica_values_by_kind.insert(kind, icas);
    }
    s
}
