//! Research topic selection model.
//!
//! Scholars are agents that migrate over a depletable two-dimensional
//! landscape of topic significance. Each agent follows one of four movement
//! strategies, extracts a fraction of the significance of the patch it works
//! on, and leaves the community when its decaying wealth falls below a
//! survival threshold or when it reaches retirement age.
//!
//! The crate is organised bottom-up:
//!
//! * [`landscape`] builds and depletes the significance grid.
//! * [`strategy`] holds the pure movement rule trees.
//! * [`engine`] drives one seeded run tick by tick.
//! * [`metrics`] computes progress, coverage, ICA statistics and survival curves.
//! * [`experiments`] sweeps parameters over seeded replications in parallel and
//!   writes CSV/JSON/PGM reports.

pub mod config;
pub mod engine;
pub mod error;
pub mod experiments;
pub mod landscape;
pub mod metrics;
pub mod strategy;

pub use engine::{run, Agent, DepartureCause, RunResult, SimConfig, SimState, TickReport};
pub use error::{Result, SimError};
pub use landscape::{GaussianSpec, Landscape, LandscapeConfig, Position, VisionMetric};
pub use metrics::MetricsSummary;
pub use strategy::{decide, Decision, PatchView, StrategyKind, WorldView};
