//! Command line front end.
//!
//! ```text
//! rts run      [--config run.json] [--set key=value]... [--snapshot-ticks 0,50,100]
//! rts sweep     --config sweep.json [--set key=value]... [--per-run-json]
//! rts scenario <name|all|list> [--replications N]
//! rts render   [--config run.json] [--ticks 0,100]
//! ```
//!
//! Exit codes: 0 success, 2 config error, 3 I/O error, 4 invariant violation.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rts_core::config;
use rts_core::engine::{self, SimConfig};
use rts_core::experiments::{
    self, builtin_scenario, ExperimentSpec, OutputFormat, ReportOptions, SCENARIO_NAMES,
};
use rts_core::metrics;
use rts_core::SimError;

#[derive(Parser, Debug)]
#[command(
    name = "rts",
    version,
    about = "Scholar topic-selection agent-based simulator"
)]
struct Cli {
    /// Overrides the run seed (run/render) or the base seed (sweep/scenario).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Worker threads for sweeps; defaults to the number of cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// json, csv or both.
    #[arg(long, global = true, default_value = "both")]
    format: OutputFormat,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct ConfigArgs {
    /// JSON config file (`"schema": 1`). Built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Dotted override, e.g. `--set landscape.noise_amplitude=0.1`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args, Debug, Default)]
struct ArtifactArgs {
    /// Write the full result of every run under runs/.
    #[arg(long)]
    per_run_json: bool,

    /// Comma-separated ticks at which to write landscape PGM snapshots.
    #[arg(long, value_delimiter = ',')]
    snapshot_ticks: Vec<u32>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Execute one run.
    Run {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, value_delimiter = ',')]
        snapshot_ticks: Vec<u32>,
    },
    /// Execute a parameter sweep described by an experiment file.
    Sweep {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[command(flatten)]
        artifacts: ArtifactArgs,
    },
    /// Execute a built-in scenario, `all` of them, or `list` them.
    Scenario {
        name: String,
        #[arg(long)]
        replications: Option<u32>,
        /// Dotted override applied to the experiment, e.g. `base.max_ticks=50`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[command(flatten)]
        artifacts: ArtifactArgs,
    },
    /// Write landscape snapshots of one run as PGM images.
    Render {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, value_delimiter = ',', default_value = "0")]
        ticks: Vec<u32>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(), SimError> {
    match &cli.command {
        Command::Run {
            cfg,
            snapshot_ticks,
        } => {
            let config = load_sim_config(cfg, cli.seed)?;
            let started = Instant::now();
            let (result, shots) = engine::run_with_snapshots(&config, snapshot_ticks)?;
            let summary = metrics::summarize(&result);
            experiments::write_run(&cli.out, &result, &summary, cli.format, &shots)?;
            println!(
                "run finished in {:.1} ms: {} ticks, progress {:.4}, coverage {:.4}",
                started.elapsed().as_secs_f64() * 1e3,
                result.final_tick().tick,
                summary.progress,
                summary.coverage
            );
            for (kind, mean) in &summary.mean_ica_by_kind {
                println!(
                    "  {kind:<12} mean ICA {mean:>10.4}  gini {:.3}  survivors {}",
                    summary.gini_by_kind[kind], summary.survivors_final_by_kind[kind]
                );
            }
            println!("wrote {}", cli.out.display());
            Ok(())
        }
        Command::Sweep { cfg, artifacts } => {
            let path = cfg
                .config
                .as_deref()
                .ok_or_else(|| SimError::config("sweep needs --config <experiment.json>"))?;
            let mut spec: ExperimentSpec = config::load(path, &cfg.overrides)?;
            if let Some(seed) = cli.seed {
                spec.base_seed = seed;
            }
            execute_sweep(cli, &spec, &cli.out, artifacts)
        }
        Command::Scenario {
            name,
            replications,
            overrides,
            artifacts,
        } => {
            if name == "list" {
                for n in SCENARIO_NAMES {
                    let spec = builtin_scenario(n).expect("listed");
                    println!("{n:<18} {} runs", spec.run_count());
                }
                return Ok(());
            }
            let names: Vec<&str> = if name == "all" {
                SCENARIO_NAMES.to_vec()
            } else {
                vec![name.as_str()]
            };
            for n in names {
                let spec = builtin_scenario(n).ok_or_else(|| {
                    SimError::config(format!(
                        "unknown scenario `{n}`; choose one of {}, all, list",
                        SCENARIO_NAMES.join(", ")
                    ))
                })?;
                let mut spec: ExperimentSpec = config::from_default(&spec, overrides)?;
                if let Some(r) = replications {
                    spec.replications = *r;
                }
                if let Some(seed) = cli.seed {
                    spec.base_seed = seed;
                }
                let dir = if name == "all" {
                    cli.out.join(n)
                } else {
                    cli.out.clone()
                };
                execute_sweep(cli, &spec, &dir, artifacts)?;
            }
            Ok(())
        }
        Command::Render { cfg, ticks } => {
            let config = load_sim_config(cfg, cli.seed)?;
            let (_, shots) = engine::run_with_snapshots(&config, ticks)?;
            std::fs::create_dir_all(&cli.out).map_err(|e| SimError::io(&cli.out, e))?;
            for (tick, pgm) in &shots {
                let path = cli.out.join(format!("landscape_t{tick}.pgm"));
                std::fs::write(&path, pgm).map_err(|e| SimError::io(&path, e))?;
                println!("wrote {}", path.display());
            }
            Ok(())
        }
    }
}

fn load_sim_config(args: &ConfigArgs, seed: Option<u64>) -> Result<SimConfig, SimError> {
    let mut config: SimConfig = match &args.config {
        Some(path) => config::load(path, &args.overrides)?,
        None => config::from_default(&SimConfig::default(), &args.overrides)?,
    };
    if let Some(seed) = seed {
        config.run_seed = seed;
    }
    config.validate()?;
    Ok(config)
}

fn execute_sweep(
    cli: &Cli,
    spec: &ExperimentSpec,
    dir: &Path,
    artifacts: &ArtifactArgs,
) -> Result<(), SimError> {
    let started = Instant::now();
    let result = experiments::run_sweep(spec, cli.jobs)?;
    let options = ReportOptions {
        format: cli.format,
        per_run_json: artifacts.per_run_json,
        snapshot_ticks: artifacts.snapshot_ticks.clone(),
        jobs: cli.jobs,
    };
    experiments::report(&result, dir, &options)?;
    let failed = result.failures().count();
    println!(
        "{}: {} runs in {:.2} s ({failed} failed) -> {}",
        spec.name,
        result.rows.len(),
        started.elapsed().as_secs_f64(),
        dir.display()
    );
    if let Some(row) = result.failures().next() {
        eprintln!(
            "first failure (run {}): {}",
            row.run_index,
            row.error.as_deref().unwrap_or("")
        );
    }
    Ok(())
}
