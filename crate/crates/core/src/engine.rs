//! One seeded run of the model.
//!
//! A tick proceeds in five phases:
//!
//! 1. living agents are shuffled into a fresh activation order;
//! 2. each agent in turn looks at the world as left by earlier movers,
//!    decides, moves, and extracts from the patch it ends up on;
//! 3. every living agent's wealth decays by the metabolism rate and its
//!    age advances by one;
//! 4. agents below the survival threshold starve, agents at retirement age
//!    retire;
//! 5. a [`TickReport`] is recorded.
//!
//! Every random draw (spawn positions, activation order, decisions) comes
//! from a single ChaCha stream seeded by `run_seed`, so a run is a pure
//! function of its [`SimConfig`].

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::landscape::{Landscape, LandscapeConfig, Position, VisionMetric};
use crate::metrics;
use crate::strategy::{self, Decision, PatchView, StrategyKind, WorldView};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationEntry {
    pub kind: StrategyKind,
    pub count: u32,
}

impl PopulationEntry {
    pub fn new(kind: StrategyKind, count: u32) -> Self {
        PopulationEntry { kind, count }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub landscape: LandscapeConfig,
    pub population: Vec<PopulationEntry>,
    pub vision: u32,
    pub vision_metric: VisionMetric,
    /// Fraction of wealth lost per tick, in `[0, 1)`.
    pub metabolism_rate: f64,
    /// Knowledge discovery rate: fraction of a patch's remaining significance
    /// extracted per visit, in `(0, 1]`.
    pub kdr: f64,
    pub retirement_age: u32,
    pub initial_wealth: f64,
    pub survival_threshold: f64,
    pub max_ticks: u32,
    pub run_seed: u64,
}

impl Default for SimConfig {
    /// Default landscape, 200 agents split evenly, 100 ticks.
    fn default() -> Self {
        SimConfig {
            landscape: LandscapeConfig::default(),
            population: StrategyKind::ALL
                .iter()
                .map(|&k| PopulationEntry::new(k, 50))
                .collect(),
            vision: 1,
            vision_metric: VisionMetric::Chebyshev,
            metabolism_rate: 0.2,
            kdr: 0.05,
            retirement_age: 150,
            initial_wealth: 5.0,
            survival_threshold: 0.01,
            max_ticks: 100,
            run_seed: 0,
        }
    }
}

impl SimConfig {
    pub fn total_population(&self) -> u64 {
        self.population.iter().map(|p| p.count as u64).sum()
    }

    /// Configured head count per kind, kinds with a zero count included.
    pub fn population_by_kind(&self) -> BTreeMap<StrategyKind, u32> {
        let mut out = BTreeMap::new();
        for p in &self.population {
            *out.entry(p.kind).or_insert(0) += p.count;
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        self.landscape.validate()?;
        if self.total_population() == 0 {
            return Err(SimError::config(
                "population must contain at least one agent",
            ));
        }
        if self.total_population() > u32::MAX as u64 {
            return Err(SimError::config("population is too large"));
        }
        if self.vision == 0 {
            return Err(SimError::config("vision must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.metabolism_rate) {
            return Err(SimError::config(format!(
                "metabolism_rate must lie in [0, 1), got {}",
                self.metabolism_rate
            )));
        }
        if !(self.kdr > 0.0 && self.kdr <= 1.0) {
            return Err(SimError::config(format!(
                "kdr must lie in (0, 1], got {}",
                self.kdr
            )));
        }
        if self.retirement_age == 0 {
            return Err(SimError::config("retirement_age must be positive"));
        }
        if !(self.initial_wealth >= 0.0 && self.initial_wealth.is_finite()) {
            return Err(SimError::config(format!(
                "initial_wealth must be finite and nonnegative, got {}",
                self.initial_wealth
            )));
        }
        if !(self.survival_threshold > 0.0 && self.survival_threshold.is_finite()) {
            return Err(SimError::config(format!(
                "survival_threshold must be positive, got {}",
                self.survival_threshold
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DepartureCause {
    Starvation,
    Retirement,
}

impl DepartureCause {
    pub fn as_str(self) -> &'static str {
        match self {
            DepartureCause::Starvation => "starvation",
            DepartureCause::Retirement => "retirement",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Departure {
    pub cause: DepartureCause,
    pub tick: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agent {
    pub id: u32,
    pub kind: StrategyKind,
    pub pos: Position,
    /// Current collected significance, decays every tick.
    pub wealth: f64,
    /// Lifetime sum of gains, never decays.
    pub ica: f64,
    pub age: u32,
    pub vision: u32,
    pub alive: bool,
    pub departure: Option<Departure>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepartureEvent {
    pub id: u32,
    pub cause: DepartureCause,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickReport {
    pub tick: u32,
    pub survivors_by_kind: BTreeMap<StrategyKind, u32>,
    pub progress: f64,
    pub coverage: f64,
    pub departures_this_tick: Vec<DepartureEvent>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub config: SimConfig,
    /// Tick 0 is the census right after spawning.
    pub ticks: Vec<TickReport>,
    pub agents_final: Vec<Agent>,
    pub ica_by_kind: BTreeMap<StrategyKind, Vec<f64>>,
    pub landscape_initial_total: f64,
    pub landscape_final_total: f64,
}

impl RunResult {
    pub fn final_tick(&self) -> &TickReport {
        self.ticks
            .last()
            .expect("a run always records its initial census")
    }
}

/// Mutable world of a single run.
#[derive(Debug, Clone)]
pub struct SimState {
    config: SimConfig,
    landscape: Landscape,
    agents: Vec<Agent>,
    rng: ChaCha8Rng,
    tick: u32,
    history: Vec<TickReport>,
    total_gain: f64,
    order: Vec<usize>,
    neighbors: Vec<Position>,
    view: WorldView,
}

/// Builds the world and spawns the population. Agents get ids `0..n` grouped
/// by strategy in config order and uniform random spawn patches (with
/// replacement). Spawn patches count as visited; nobody collects at spawn.
pub fn init_sim(config: &SimConfig) -> Result<SimState> {
    config.validate()?;
    let mut landscape = Landscape::generate(&config.landscape)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.run_seed);
    let n = config.total_population() as usize;
    let mut agents = Vec::with_capacity(n);
    for entry in &config.population {
        for _ in 0..entry.count {
            let pos = Position::new(
                rng.gen_range(0..landscape.width()),
                rng.gen_range(0..landscape.height()),
            );
            landscape.mark_visited(pos);
            landscape.adjust_occupancy(None, Some(pos))?;
            agents.push(Agent {
                id: agents.len() as u32,
                kind: entry.kind,
                pos,
                wealth: config.initial_wealth,
                ica: 0.0,
                age: 0,
                vision: config.vision,
                alive: true,
                departure: None,
            });
        }
    }
    let placeholder = PatchView {
        pos: Position::new(0, 0),
        significance: 0.0,
        visited: false,
        occupied_by_others: false,
    };
    let mut state = SimState {
        config: config.clone(),
        landscape,
        agents,
        rng,
        tick: 0,
        history: Vec::with_capacity(config.max_ticks as usize + 1),
        total_gain: 0.0,
        order: Vec::with_capacity(n),
        neighbors: Vec::new(),
        view: WorldView {
            current: placeholder,
            candidates: Vec::new(),
        },
    };
    let census = state.report(Vec::new());
    state.history.push(census);
    Ok(state)
}

impl SimState {
    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn landscape(&self) -> &Landscape {
        &self.landscape
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    /// Number of completed ticks.
    pub fn tick(&self) -> u32 {
        self.tick
    }

    pub fn history(&self) -> &[TickReport] {
        &self.history
    }

    /// Sum of every gain extracted so far.
    pub fn total_gain(&self) -> f64 {
        self.total_gain
    }

    pub fn living(&self) -> usize {
        self.agents.iter().filter(|a| a.alive).count()
    }

    pub fn is_finished(&self) -> bool {
        self.tick >= self.config.max_ticks || self.agents.iter().all(|a| !a.alive)
    }

    /// Advances the world by one tick.
    pub fn step(&mut self) -> Result<TickReport> {
        self.tick += 1;
        let tick = self.tick;

        self.order.clear();
        self.order.extend(
            self.agents
                .iter()
                .enumerate()
                .filter(|(_, a)| a.alive)
                .map(|(i, _)| i),
        );
        self.order.shuffle(&mut self.rng);

        let alpha = self.config.kdr;
        for k in 0..self.order.len() {
            let idx = self.order[k];
            self.build_view(idx);
            let agent = &self.agents[idx];
            let from = agent.pos;
            if let Decision::MoveTo(to) = strategy::decide(agent.kind, &self.view, &mut self.rng) {
                if from.chebyshev(to) > self.config.vision {
                    return Err(self.breach(format!(
                        "agent {} moved {from} -> {to}, beyond vision {}",
                        agent.id, self.config.vision
                    )));
                }
                if let Err(e) = self.landscape.adjust_occupancy(Some(from), Some(to)) {
                    return Err(self.breach(e.to_string()));
                }
                self.landscape.mark_visited(to);
                self.agents[idx].pos = to;
            }
            let pos = self.agents[idx].pos;
            let gain = self.landscape.extract(pos, alpha);
            let agent = &mut self.agents[idx];
            agent.wealth += gain;
            agent.ica += gain;
            self.total_gain += gain;
        }

        let retain = 1.0 - self.config.metabolism_rate;
        for agent in self.agents.iter_mut().filter(|a| a.alive) {
            agent.wealth *= retain;
            agent.age += 1;
        }

        let mut departures = Vec::new();
        for i in 0..self.agents.len() {
            let agent = &self.agents[i];
            if !agent.alive {
                continue;
            }
            let cause = if agent.wealth < self.config.survival_threshold {
                DepartureCause::Starvation
            } else if agent.age >= self.config.retirement_age {
                DepartureCause::Retirement
            } else {
                continue;
            };
            let pos = agent.pos;
            if let Err(e) = self.landscape.adjust_occupancy(Some(pos), None) {
                return Err(self.breach(e.to_string()));
            }
            let agent = &mut self.agents[i];
            agent.alive = false;
            agent.departure = Some(Departure { cause, tick });
            departures.push(DepartureEvent {
                id: agent.id,
                cause,
            });
        }

        let living = self.living() as u64;
        if self.landscape.total_occupancy() != living {
            return Err(self.breach(format!(
                "occupancy sums to {} but {living} agents are alive",
                self.landscape.total_occupancy()
            )));
        }

        let report = self.report(departures);
        self.history.push(report.clone());
        Ok(report)
    }

    /// Fills `self.view` for agent `idx` from the current world state.
    fn build_view(&mut self, idx: usize) {
        let agent = &self.agents[idx];
        let here = agent.pos;
        let land = &self.landscape;
        land.neighborhood_into(
            here,
            agent.vision,
            self.config.vision_metric,
            &mut self.neighbors,
        );
        self.view.current = PatchView {
            pos: here,
            significance: land.significance(here),
            visited: land.is_visited(here),
            occupied_by_others: land.occupancy(here) > 1,
        };
        self.view.candidates.clear();
        self.view
            .candidates
            .extend(self.neighbors.iter().map(|&q| PatchView {
                pos: q,
                significance: land.significance(q),
                visited: land.is_visited(q),
                occupied_by_others: land.occupancy(q) > 0,
            }));
    }

    fn report(&self, departures: Vec<DepartureEvent>) -> TickReport {
        let mut survivors: BTreeMap<StrategyKind, u32> = self
            .config
            .population_by_kind()
            .into_keys()
            .map(|k| (k, 0))
            .collect();
        for a in self.agents.iter().filter(|a| a.alive) {
            *survivors.entry(a.kind).or_insert(0) += 1;
        }
        TickReport {
            tick: self.tick,
            survivors_by_kind: survivors,
            progress: metrics::progress(
                self.landscape.initial_total(),
                self.landscape.total_significance(),
            ),
            coverage: metrics::coverage(&self.landscape),
            departures_this_tick: departures,
        }
    }

    fn breach(&self, detail: String) -> SimError {
        let living = self.living();
        let state = format!(
            "living agents: {living}; occupancy total: {}; visited patches: {}; \
             remaining significance: {}; extracted so far: {}",
            self.landscape.total_occupancy(),
            self.landscape.visited_count(),
            self.landscape.total_significance(),
            self.total_gain,
        );
        SimError::Invariant {
            tick: self.tick,
            detail,
            state,
        }
    }

    pub fn into_result(self) -> RunResult {
        let mut ica_by_kind: BTreeMap<StrategyKind, Vec<f64>> = self
            .config
            .population_by_kind()
            .into_keys()
            .map(|k| (k, Vec::new()))
            .collect();
        for a in &self.agents {
            ica_by_kind.entry(a.kind).or_default().push(a.ica);
        }
        RunResult {
            landscape_initial_total: self.landscape.initial_total(),
            landscape_final_total: self.landscape.total_significance(),
            config: self.config,
            ticks: self.history,
            agents_final: self.agents,
            ica_by_kind,
        }
    }
}

/// Runs `config` to completion: `max_ticks` steps, or fewer if everybody
/// has departed.
pub fn run(config: &SimConfig) -> Result<RunResult> {
    let mut state = init_sim(config)?;
    while !state.is_finished() {
        state.step()?;
    }
    Ok(state.into_result())
}

/// Like [`run`], also capturing PGM snapshots of the landscape at the given
/// ticks (0 is the freshly generated landscape). Ticks past the end of the
/// run are skipped.
pub fn run_with_snapshots(
    config: &SimConfig,
    at: &[u32],
) -> Result<(RunResult, Vec<(u32, Vec<u8>)>)> {
    let mut state = init_sim(config)?;
    let mut shots = Vec::new();
    if at.contains(&0) {
        shots.push((0, state.landscape().to_pgm()));
    }
    while !state.is_finished() {
        state.step()?;
        if at.contains(&state.tick()) {
            shots.push((state.tick(), state.landscape().to_pgm()));
        }
    }
    Ok((state.into_result(), shots))
}
