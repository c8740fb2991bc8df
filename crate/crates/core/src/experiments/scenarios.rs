//! The built-in study: single-strategy populations and mixed populations
//! swept over vision, metabolism rate and knowledge discovery rate.

use super::{AxisPath, ExperimentSpec, SweepAxis};
use crate::engine::SimConfig;
use crate::strategy::StrategyKind;

pub const DEFAULT_REPLICATIONS: u32 = 30;

pub const SCENARIO_NAMES: [&str; 5] = [
    "single-coverage",
    "single-ica",
    "mixed-vision",
    "mixed-metabolism",
    "mixed-kdr",
];

const BASE_SEED: u64 = 1;

fn kinds_axis() -> SweepAxis {
    SweepAxis::new(
        AxisPath::PopulationMix,
        StrategyKind::ALL.map(|k| k.as_str()),
    )
}

pub fn builtin_scenario(name: &str) -> Option<ExperimentSpec> {
    let base = SimConfig::default();
    let sweep_axes = match name {
        "single-coverage" => vec![
            kinds_axis(),
            SweepAxis::new(
                AxisPath::PopulationTotal,
                [50.0, 100.0, 150.0, 200.0, 250.0, 300.0],
            ),
        ],
        "single-ica" => vec![kinds_axis()],
        "mixed-vision" => vec![SweepAxis::new(AxisPath::Vision, [1.0, 10.0])],
        "mixed-metabolism" => vec![SweepAxis::new(AxisPath::MetabolismRate, [0.2, 0.8])],
        "mixed-kdr" => vec![SweepAxis::new(AxisPath::Kdr, [0.05, 0.5])],
        _ => return None,
    };
    Some(ExperimentSpec {
        name: name.to_string(),
        base,
        sweep_axes,
        replications: DEFAULT_REPLICATIONS,
        base_seed: BASE_SEED,
    })
}

pub fn builtin_scenarios() -> Vec<ExperimentSpec> {
    SCENARIO_NAMES
        .iter()
        .map(|n| builtin_scenario(n).expect("every listed scenario exists"))
        .collect()
}
