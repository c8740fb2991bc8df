//! File outputs for single runs and sweeps.
//!
//! Single run: `run.json`, `ticks.csv`, `agents.csv`, `summary.csv`.
//! Sweep: `sweep.json`, `rows.csv`, `aggregates.csv`, `histograms.csv`,
//! `survival.csv`, plus optional per-run JSON and landscape snapshots under
//! `runs/`. Every output directory also gets `resolved-config.json`.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use super::sweep::SweepResult;
use super::AxisValue;
use crate::config;
use crate::engine::{self, RunResult};
use crate::error::{Result, SimError};
use crate::metrics::MetricsSummary;
use crate::strategy::StrategyKind;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
    #[default]
    Both,
}

impl OutputFormat {
    pub fn json(self) -> bool {
        matches!(self, OutputFormat::Json | OutputFormat::Both)
    }

    pub fn csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }
}

impl FromStr for OutputFormat {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            "both" => Ok(OutputFormat::Both),
            other => Err(SimError::config(format!(
                "unknown format `{other}` (expected json, csv or both)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ReportOptions {
    pub format: OutputFormat,
    /// Write `runs/run_<index>.json` for every run.
    pub per_run_json: bool,
    /// Ticks at which to write `runs/run_<index>/landscape_t<tick>.pgm`.
    pub snapshot_ticks: Vec<u32>,
    /// Worker count for re-running runs that need per-run artifacts.
    pub jobs: Option<usize>,
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| SimError::io(dir, e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| SimError::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| SimError::config(format!("cannot serialize {}: {e}", path.display())))?;
    text.push('\n');
    write_file(path, text.as_bytes())
}

struct Csv {
    path: PathBuf,
    writer: csv::Writer<fs::File>,
}

impl Csv {
    fn create(path: PathBuf, header: &[&str]) -> Result<Self> {
        let writer = csv::Writer::from_path(&path).map_err(|e| SimError::Csv {
            path: path.clone(),
            source: e,
        })?;
        let mut out = Csv { path, writer };
        out.row(header.iter().map(|s| s.to_string()))?;
        Ok(out)
    }

    fn row<I: IntoIterator<Item = String>>(&mut self, fields: I) -> Result<()> {
        let fields: Vec<String> = fields.into_iter().collect();
        self.writer
            .write_record(&fields)
            .map_err(|e| SimError::Csv {
                path: self.path.clone(),
                source: e,
            })
    }

    fn finish(mut self) -> Result<()> {
        self.writer.flush().map_err(|e| SimError::io(&self.path, e))
    }
}

fn join_values(values: &[AxisValue]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("|")
}

/// Writes a finished run. `snapshots` are `(tick, pgm bytes)` pairs.
pub fn write_run(
    dir: &Path,
    result: &RunResult,
    summary: &MetricsSummary,
    format: OutputFormat,
    snapshots: &[(u32, Vec<u8>)],
) -> Result<()> {
    create_dir(dir)?;
    write_file(
        &dir.join("resolved-config.json"),
        config::to_versioned_json(&result.config)?.as_bytes(),
    )?;
    if format.json() {
        #[derive(Serialize)]
        struct RunDocument<'a> {
            result: &'a RunResult,
            summary: &'a MetricsSummary,
        }
        write_json(&dir.join("run.json"), &RunDocument { result, summary })?;
    }
    if format.csv() {
        write_ticks_csv(&dir.join("ticks.csv"), result)?;
        write_agents_csv(&dir.join("agents.csv"), result)?;
        write_summary_csv(&dir.join("summary.csv"), summary)?;
    }
    for (tick, pgm) in snapshots {
        write_file(&dir.join(format!("landscape_t{tick}.pgm")), pgm)?;
    }
    Ok(())
}

pub fn write_ticks_csv(path: &Path, result: &RunResult) -> Result<()> {
    let mut out = Csv::create(
        path.to_path_buf(),
        &[
            "tick",
            "expert_alive",
            "follower_alive",
            "maverick_alive",
            "conservative_alive",
            "progress",
            "coverage",
        ],
    )?;
    for t in &result.ticks {
        let mut fields = vec![t.tick.to_string()];
        fields.extend(
            StrategyKind::ALL
                .iter()
                .map(|k| t.survivors_by_kind.get(k).copied().unwrap_or(0).to_string()),
        );
        fields.push(t.progress.to_string());
        fields.push(t.coverage.to_string());
        out.row(fields)?;
    }
    out.finish()
}

pub fn write_agents_csv(path: &Path, result: &RunResult) -> Result<()> {
    let mut out = Csv::create(
        path.to_path_buf(),
        &[
            "id",
            "kind",
            "ica",
            "final_wealth",
            "departure_cause",
            "departure_tick",
        ],
    )?;
    for a in &result.agents_final {
        out.row([
            a.id.to_string(),
            a.kind.to_string(),
            a.ica.to_string(),
            a.wealth.to_string(),
            a.departure
                .map(|d| d.cause.as_str().to_string())
                .unwrap_or_default(),
            a.departure.map(|d| d.tick.to_string()).unwrap_or_default(),
        ])?;
    }
    out.finish()
}

pub fn write_summary_csv(path: &Path, summary: &MetricsSummary) -> Result<()> {
    let mut out = Csv::create(
        path.to_path_buf(),
        &["kind", "count", "mean_ica", "gini", "survivors_final"],
    )?;
    for (kind, count) in &summary.population_by_kind {
        out.row([
            kind.to_string(),
            count.to_string(),
            summary.mean_ica_by_kind[kind].to_string(),
            summary.gini_by_kind[kind].to_string(),
            summary.survivors_final_by_kind[kind].to_string(),
        ])?;
    }
    out.finish()
}

/// Writes every sweep output into `dir`.
pub fn report(result: &SweepResult, dir: &Path, options: &ReportOptions) -> Result<()> {
    create_dir(dir)?;
    write_file(
        &dir.join("resolved-config.json"),
        config::to_versioned_json(&result.spec)?.as_bytes(),
    )?;
    if options.format.json() {
        write_json(&dir.join("sweep.json"), result)?;
    }
    if options.format.csv() {
        write_rows_csv(&dir.join("rows.csv"), result)?;
        write_aggregates_csv(&dir.join("aggregates.csv"), result)?;
        write_histograms_csv(&dir.join("histograms.csv"), result)?;
        write_survival_csv(&dir.join("survival.csv"), result)?;
    }
    if options.per_run_json || !options.snapshot_ticks.is_empty() {
        write_run_artifacts(result, &dir.join("runs"), options)?;
    }
    Ok(())
}

fn write_rows_csv(path: &Path, result: &SweepResult) -> Result<()> {
    let label = result.spec.axis_label();
    let mut out = Csv::create(
        path.to_path_buf(),
        &[
            "run_index",
            "axis_name",
            "axis_value",
            "replication",
            "seed",
            "kind",
            "count",
            "mean_ica",
            "gini",
            "survivors_final",
            "starved",
            "retired",
            "coverage",
            "progress",
            "error",
        ],
    )?;
    for row in &result.rows {
        let lead = [
            row.run_index.to_string(),
            label.clone(),
            join_values(&row.axis_values),
            row.replication.to_string(),
            row.seed.to_string(),
        ];
        match (&row.summary, &row.error) {
            (Some(s), _) => {
                for (kind, count) in &s.population_by_kind {
                    let mut fields = lead.to_vec();
                    fields.extend([
                        kind.to_string(),
                        count.to_string(),
                        s.mean_ica_by_kind[kind].to_string(),
                        s.gini_by_kind[kind].to_string(),
                        s.survivors_final_by_kind[kind].to_string(),
                        s.starved_by_kind[kind].to_string(),
                        s.retired_by_kind[kind].to_string(),
                        s.coverage.to_string(),
                        s.progress.to_string(),
                        String::new(),
                    ]);
                    out.row(fields)?;
                }
            }
            (None, err) => {
                let mut fields = lead.to_vec();
                fields.extend(std::iter::repeat(String::new()).take(9));
                fields.push(err.clone().unwrap_or_default());
                out.row(fields)?;
            }
        }
    }
    out.finish()
}

fn write_aggregates_csv(path: &Path, result: &SweepResult) -> Result<()> {
    let label = result.spec.axis_label();
    let mut out = Csv::create(
        path.to_path_buf(),
        &[
            "axis_name",
            "axis_value",
            "kind",
            "mean_ica",
            "sd_ica",
            "gini_mean",
            "coverage_mean",
            "progress_mean",
            "survivors_final_mean",
        ],
    )?;
    for a in &result.aggregates {
        out.row([
            label.clone(),
            join_values(&a.axis_values),
            a.kind.to_string(),
            a.mean_ica.mean.to_string(),
            a.mean_ica.sd.to_string(),
            a.gini.mean.to_string(),
            a.coverage.mean.to_string(),
            a.progress.mean.to_string(),
            a.survivors_final.mean.to_string(),
        ])?;
    }
    out.finish()
}

fn write_histograms_csv(path: &Path, result: &SweepResult) -> Result<()> {
    let label = result.spec.axis_label();
    let mut out = Csv::create(
        path.to_path_buf(),
        &[
            "axis_name",
            "axis_value",
            "kind",
            "bin",
            "lower",
            "upper",
            "count",
        ],
    )?;
    for a in &result.aggregates {
        let h = &a.ica_histogram;
        for (bin, count) in h.counts.iter().enumerate() {
            out.row([
                label.clone(),
                join_values(&a.axis_values),
                a.kind.to_string(),
                bin.to_string(),
                h.edges[bin].to_string(),
                h.edges[bin + 1].to_string(),
                count.to_string(),
            ])?;
        }
    }
    out.finish()
}

fn write_survival_csv(path: &Path, result: &SweepResult) -> Result<()> {
    let label = result.spec.axis_label();
    let mut out = Csv::create(
        path.to_path_buf(),
        &["axis_name", "axis_value", "kind", "tick", "mean_survivors"],
    )?;
    for a in &result.aggregates {
        for (tick, v) in a.survival_curve_mean.iter().enumerate() {
            out.row([
                label.clone(),
                join_values(&a.axis_values),
                a.kind.to_string(),
                tick.to_string(),
                v.to_string(),
            ])?;
        }
    }
    out.finish()
}

/// Re-executes runs to write full results and snapshots. Runs are pure
/// functions of their configs, so these match the sweep rows exactly.
fn write_run_artifacts(result: &SweepResult, dir: &Path, options: &ReportOptions) -> Result<()> {
    create_dir(dir)?;
    let plans = result.spec.plan()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = options.jobs {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| SimError::config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| {
        plans.par_iter().try_for_each(|plan| -> Result<()> {
            let Ok((run, shots)) =
                engine::run_with_snapshots(&plan.config, &options.snapshot_ticks)
            else {
                // failed runs are already reported in rows.csv
                return Ok(());
            };
            let stem = format!("run_{:05}", plan.run_index);
            if options.per_run_json {
                write_json(&dir.join(format!("{stem}.json")), &run)?;
            }
            if !shots.is_empty() {
                let sub = dir.join(&stem);
                create_dir(&sub)?;
                for (tick, pgm) in &shots {
                    write_file(&sub.join(format!("landscape_t{tick}.pgm")), pgm)?;
                }
            }
            Ok(())
        })
    })
}
