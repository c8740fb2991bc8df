//! Batch experiments: parameter sweeps over seeded replications.
//!
//! An [`ExperimentSpec`] is a base [`SimConfig`] plus a list of sweep axes.
//! The run set is the cross product of axis values (first axis varies
//! slowest) times the replication count. Run `i` in that order gets
//! `run_seed = base_seed + i`.

mod report;
mod scenarios;
mod sweep;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::engine::{PopulationEntry, SimConfig};
use crate::error::{Result, SimError};
use crate::strategy::StrategyKind;

pub use report::{
    report, write_agents_csv, write_run, write_summary_csv, write_ticks_csv, OutputFormat,
    ReportOptions,
};
pub use scenarios::{builtin_scenario, builtin_scenarios, DEFAULT_REPLICATIONS, SCENARIO_NAMES};
pub use sweep::{run_sweep, AggregateRow, Stat, SweepResult, SweepRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisPath {
    /// Rescales the population to this many agents, keeping proportions.
    PopulationTotal,
    /// Replaces the population mix: a kind name (everyone of that kind, same
    /// total) or an explicit list like `"expert:50,maverick:150"`.
    PopulationMix,
    Vision,
    MetabolismRate,
    Kdr,
}

impl AxisPath {
    pub fn as_str(self) -> &'static str {
        match self {
            AxisPath::PopulationTotal => "population_total",
            AxisPath::PopulationMix => "population_mix",
            AxisPath::Vision => "vision",
            AxisPath::MetabolismRate => "metabolism_rate",
            AxisPath::Kdr => "kdr",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AxisValue {
    Number(f64),
    Text(String),
}

impl fmt::Display for AxisValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AxisValue::Number(v) => write!(f, "{v}"),
            AxisValue::Text(s) => f.write_str(s),
        }
    }
}

impl From<f64> for AxisValue {
    fn from(v: f64) -> Self {
        AxisValue::Number(v)
    }
}

impl From<&str> for AxisValue {
    fn from(s: &str) -> Self {
        AxisValue::Text(s.to_string())
    }
}

impl AxisValue {
    fn as_number(&self, path: AxisPath) -> Result<f64> {
        match self {
            AxisValue::Number(v) => Ok(*v),
            AxisValue::Text(s) => s
                .trim()
                .parse()
                .map_err(|_| SimError::config(format!("{}: `{s}` is not a number", path.as_str()))),
        }
    }

    fn as_count(&self, path: AxisPath) -> Result<u32> {
        let v = self.as_number(path)?;
        if v.fract() != 0.0 || !(0.0..=u32::MAX as f64).contains(&v) {
            return Err(SimError::config(format!(
                "{}: `{v}` is not a nonnegative integer",
                path.as_str()
            )));
        }
        Ok(v as u32)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub path: AxisPath,
    pub values: Vec<AxisValue>,
}

impl SweepAxis {
    pub fn new<V: Into<AxisValue>>(path: AxisPath, values: impl IntoIterator<Item = V>) -> Self {
        SweepAxis {
            path,
            values: values.into_iter().map(Into::into).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    #[serde(default)]
    pub base: SimConfig,
    #[serde(default)]
    pub sweep_axes: Vec<SweepAxis>,
    pub replications: u32,
    pub base_seed: u64,
}

/// One planned run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunPlan {
    pub run_index: usize,
    pub point_index: usize,
    pub axis_values: Vec<AxisValue>,
    pub replication: u32,
    pub config: SimConfig,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(SimError::config("replications must be positive"));
        }
        for axis in &self.sweep_axes {
            if axis.values.is_empty() {
                return Err(SimError::config(format!(
                    "sweep axis {} has no values",
                    axis.path.as_str()
                )));
            }
        }
        Ok(())
    }

    pub fn point_count(&self) -> usize {
        self.sweep_axes.iter().map(|a| a.values.len()).product()
    }

    pub fn run_count(&self) -> usize {
        self.point_count() * self.replications as usize
    }

    /// Axis names joined with `|`, or `base` when nothing is swept.
    pub fn axis_label(&self) -> String {
        if self.sweep_axes.is_empty() {
            return "base".to_string();
        }
        self.sweep_axes
            .iter()
            .map(|a| a.path.as_str())
            .collect::<Vec<_>>()
            .join("|")
    }

    /// Axis values of point `point_index`, first axis slowest.
    pub fn point_values(&self, point_index: usize) -> Vec<AxisValue> {
        let mut rem = point_index;
        let mut out = vec![AxisValue::Text(String::new()); self.sweep_axes.len()];
        for (slot, axis) in out.iter_mut().zip(&self.sweep_axes).rev() {
            let n = axis.values.len();
            *slot = axis.values[rem % n].clone();
            rem /= n;
        }
        out
    }

    /// Every run in deterministic order. Fails if the spec is malformed;
    /// configs that apply cleanly but fail validation are still planned so
    /// the failure shows up in that run's row.
    pub fn plan(&self) -> Result<Vec<RunPlan>> {
        self.validate()?;
        let mut plans = Vec::with_capacity(self.run_count());
        for point_index in 0..self.point_count() {
            let axis_values = self.point_values(point_index);
            let mut config = self.base.clone();
            for (axis, value) in self.sweep_axes.iter().zip(&axis_values) {
                apply_axis(&mut config, axis.path, value)?;
            }
            for replication in 0..self.replications {
                let run_index = plans.len();
                let mut config = config.clone();
                config.run_seed = self.base_seed.wrapping_add(run_index as u64);
                plans.push(RunPlan {
                    run_index,
                    point_index,
                    axis_values: axis_values.clone(),
                    replication,
                    config,
                });
            }
        }
        Ok(plans)
    }
}

/// Sets one swept parameter on `config`.
pub fn apply_axis(config: &mut SimConfig, path: AxisPath, value: &AxisValue) -> Result<()> {
    match path {
        AxisPath::PopulationTotal => {
            config.population = rescale(&config.population, path, value.as_count(path)?)?;
        }
        AxisPath::PopulationMix => {
            let text = match value {
                AxisValue::Text(s) => s.as_str(),
                AxisValue::Number(v) => {
                    return Err(SimError::config(format!(
                        "population_mix expects a kind or kind:count list, got {v}"
                    )))
                }
            };
            config.population = parse_mix(text, config.total_population())?;
        }
        AxisPath::Vision => config.vision = value.as_count(path)?,
        AxisPath::MetabolismRate => config.metabolism_rate = value.as_number(path)?,
        AxisPath::Kdr => config.kdr = value.as_number(path)?,
    }
    Ok(())
}

/// Scales counts to `total`, flooring each share and handing the remainder
/// out one by one in config order.
fn rescale(pop: &[PopulationEntry], path: AxisPath, total: u32) -> Result<Vec<PopulationEntry>> {
    let current: u64 = pop.iter().map(|p| p.count as u64).sum();
    if current == 0 {
        return Err(SimError::config(format!(
            "{}: cannot rescale an empty population",
            path.as_str()
        )));
    }
    let mut out: Vec<PopulationEntry> = pop
        .iter()
        .map(|p| PopulationEntry::new(p.kind, (p.count as u64 * total as u64 / current) as u32))
        .collect();
    // floors lose less than one agent per nonzero entry, so one pass suffices
    let mut left = total - out.iter().map(|p| p.count).sum::<u32>();
    for (p, base) in out.iter_mut().zip(pop) {
        if left == 0 {
            break;
        }
        if base.count > 0 {
            p.count += 1;
            left -= 1;
        }
    }
    Ok(out)
}

fn parse_mix(text: &str, total: u64) -> Result<Vec<PopulationEntry>> {
    let text = text.trim();
    if !text.contains(':') {
        let kind: StrategyKind = text.parse()?;
        let count = u32::try_from(total)
            .map_err(|_| SimError::config("population_mix: population too large"))?;
        return Ok(vec![PopulationEntry::new(kind, count)]);
    }
    text.split(',')
        .map(|part| {
            let (kind, count) = part.split_once(':').ok_or_else(|| {
                SimError::config(format!("population_mix: `{part}` is not kind:count"))
            })?;
            let count = count
                .trim()
                .parse::<u32>()
                .map_err(|_| SimError::config(format!("population_mix: bad count in `{part}`")))?;
            Ok(PopulationEntry::new(kind.parse()?, count))
        })
        .collect()
}
