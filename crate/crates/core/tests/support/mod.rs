//! Test-only oracles shared by the integration and acceptance suites.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rts_core::engine::{init_sim, PopulationEntry, SimConfig};
use rts_core::{
    DepartureCause, GaussianSpec, LandscapeConfig, PatchView, Position, StrategyKind, VisionMetric,
    WorldView,
};

pub mod rules {
    //! The four movement rules written down as data and walked by a tiny
    //! interpreter. Shares nothing with the library's decision code except
    //! the sampling convention: one `gen_range(0..len)` draw over the
    //! qualifying patches in candidate order.

    use super::*;

    #[derive(Clone, Copy)]
    pub enum Filter {
        All,
        Visited,
        Unvisited,
        Occupied,
        Unoccupied,
        Higher,
        VisitedHigher,
        OccupiedHigher,
    }

    pub enum Node {
        /// "Any patch in my vision ...?"
        Check(Filter, Box<Node>, Box<Node>),
        /// "randomly move to one of those patches"
        MoveAmong(Filter),
        /// "move to the patch of highest significance"
        MoveToHighest,
        Stay,
    }

    use Filter::*;
    use Node::*;

    fn check(f: Filter, yes: Node, no: Node) -> Node {
        Check(f, Box::new(yes), Box::new(no))
    }

    pub fn tree(kind: StrategyKind) -> Node {
        match kind {
            StrategyKind::Expert => check(Higher, MoveToHighest, Stay),
            StrategyKind::Maverick => check(
                Unvisited,
                MoveAmong(Unvisited),
                check(Higher, MoveAmong(Higher), Stay),
            ),
            StrategyKind::Follower => check(
                Occupied,
                check(
                    OccupiedHigher,
                    MoveAmong(OccupiedHigher),
                    check(Unoccupied, MoveAmong(Unoccupied), Stay),
                ),
                MoveAmong(All),
            ),
            StrategyKind::Conservative => check(
                Visited,
                check(
                    VisitedHigher,
                    MoveAmong(VisitedHigher),
                    check(Unvisited, MoveAmong(Unvisited), Stay),
                ),
                MoveAmong(All),
            ),
        }
    }

    fn keep(f: Filter, here: f64, c: &PatchView) -> bool {
        match f {
            All => true,
            Visited => c.visited,
            Unvisited => !c.visited,
            Occupied => c.occupied_by_others,
            Unoccupied => !c.occupied_by_others,
            Higher => c.significance > here,
            VisitedHigher => c.visited && c.significance > here,
            OccupiedHigher => c.occupied_by_others && c.significance > here,
        }
    }

    fn matching(f: Filter, view: &WorldView) -> Vec<Position> {
        let here = view.current.significance;
        let mut out = Vec::new();
        for c in &view.candidates {
            if keep(f, here, c) {
                out.push(c.pos);
            }
        }
        out
    }

    fn draw<R: Rng>(set: &[Position], rng: &mut R) -> Option<Position> {
        if set.is_empty() {
            None
        } else {
            Some(set[rng.gen_range(0..set.len())])
        }
    }

    /// `None` means stay.
    pub fn interpret<R: Rng>(node: &Node, view: &WorldView, rng: &mut R) -> Option<Position> {
        match node {
            Check(f, yes, no) => {
                if matching(*f, view).is_empty() {
                    interpret(no, view, rng)
                } else {
                    interpret(yes, view, rng)
                }
            }
            MoveAmong(f) => draw(&matching(*f, view), rng),
            MoveToHighest => {
                let mut best = f64::NEG_INFINITY;
                for c in &view.candidates {
                    if c.significance > best {
                        best = c.significance;
                    }
                }
                let top: Vec<Position> = view
                    .candidates
                    .iter()
                    .filter(|c| c.significance == best)
                    .map(|c| c.pos)
                    .collect();
                draw(&top, rng)
            }
            Stay => None,
        }
    }
}

/// A random local view with many ties and every flag combination.
pub fn random_view<R: Rng>(rng: &mut R) -> WorldView {
    const LEVELS: [f64; 6] = [0.0, 1.0, 2.0, 3.5, 5.0, 8.0];
    let n = rng.gen_range(0..=24usize);
    let current = PatchView {
        pos: Position::new(100, 100),
        significance: LEVELS[rng.gen_range(0..LEVELS.len())],
        visited: true,
        occupied_by_others: rng.gen_bool(0.3),
    };
    let candidates = (0..n)
        .map(|i| PatchView {
            pos: Position::new(i as u32 % 5, i as u32 / 5),
            significance: LEVELS[rng.gen_range(0..LEVELS.len())],
            visited: rng.gen_bool(0.5),
            occupied_by_others: rng.gen_bool(0.25),
        })
        .collect();
    WorldView {
        current,
        candidates,
    }
}

/// Number of views (out of `n`) on which `decide` and the interpreter
/// disagree, either on the decision or on how much randomness they used.
pub fn strategy_mismatches(kind: StrategyKind, n: usize, seed: u64) -> usize {
    let mut gen = ChaCha8Rng::seed_from_u64(seed);
    let tree = rules::tree(kind);
    let mut mismatches = 0;
    for i in 0..n {
        let view = random_view(&mut gen);
        let mut a = ChaCha8Rng::seed_from_u64(i as u64);
        let mut b = ChaCha8Rng::seed_from_u64(i as u64);
        let got = match rts_core::decide(kind, &view, &mut a) {
            rts_core::Decision::Stay => None,
            rts_core::Decision::MoveTo(p) => Some(p),
        };
        let want = rules::interpret(&tree, &view, &mut b);
        if got != want || a.gen::<u64>() != b.gen::<u64>() {
            mismatches += 1;
        }
    }
    mismatches
}

/// A small random but valid configuration.
pub fn random_config<R: Rng>(rng: &mut R) -> SimConfig {
    let width = rng.gen_range(1..=30);
    let height = rng.gen_range(1..=30);
    let gaussians = (0..rng.gen_range(0..=3))
        .map(|_| {
            GaussianSpec::new(
                rng.gen_range(0.0..width as f64),
                rng.gen_range(0.0..height as f64),
                rng.gen_range(0.0..20.0),
                rng.gen_range(0.5..10.0),
            )
        })
        .collect();
    let mut population = Vec::new();
    for kind in StrategyKind::ALL {
        if rng.gen_bool(0.6) {
            population.push(PopulationEntry::new(kind, rng.gen_range(0..=40)));
        }
    }
    if population.iter().all(|p| p.count == 0) {
        population.push(PopulationEntry::new(
            StrategyKind::ALL[rng.gen_range(0..4)],
            rng.gen_range(1..=40),
        ));
    }
    SimConfig {
        landscape: LandscapeConfig {
            width,
            height,
            gaussians,
            noise_amplitude: if rng.gen_bool(0.3) {
                0.0
            } else {
                rng.gen_range(0.0..1.0)
            },
            landscape_seed: rng.gen(),
        },
        population,
        vision: rng.gen_range(1..=6),
        vision_metric: if rng.gen_bool(0.5) {
            VisionMetric::Chebyshev
        } else {
            VisionMetric::Euclidean
        },
        metabolism_rate: if rng.gen_bool(0.1) {
            0.0
        } else {
            rng.gen_range(0.0..0.95)
        },
        kdr: rng.gen_range(0.01..=1.0),
        retirement_age: rng.gen_range(1..=120),
        initial_wealth: rng.gen_range(0.0..10.0),
        survival_threshold: rng.gen_range(0.01..2.0),
        max_ticks: rng.gen_range(0..=60),
        run_seed: rng.gen(),
    }
}

/// Steps a run tick by tick and checks every per-tick invariant. Returns
/// the first violation found.
pub fn check_run_properties(config: &SimConfig) -> Result<(), String> {
    let mut state = init_sim(config).map_err(|e| e.to_string())?;
    let n = state.agents().len();
    let census = &state.history()[0];
    for (kind, count) in config.population_by_kind() {
        if census.survivors_by_kind[&kind] != count {
            return Err(format!("census for {kind} is not {count}"));
        }
    }
    if state.landscape().visited_count() > n {
        return Err("more visited patches than spawned agents".into());
    }

    let retain = 1.0 - config.metabolism_rate;
    while !state.is_finished() {
        let before = state.agents().to_vec();
        let grid_before = state.landscape().significance_grid().to_vec();
        let visited_before = state.landscape().visited_count();
        let prev = state.history().last().unwrap().clone();
        let report = state.step().map_err(|e| e.to_string())?;
        let tick = report.tick;
        let land = state.landscape();

        for (a, b) in before.iter().zip(state.agents()) {
            if !a.alive {
                if b != a {
                    return Err(format!("tick {tick}: departed agent {} changed", a.id));
                }
                continue;
            }
            let step = a.pos.chebyshev(b.pos);
            if step > config.vision {
                return Err(format!("tick {tick}: agent {} moved {step} > vision", a.id));
            }
            if !land.is_visited(b.pos) {
                return Err(format!("tick {tick}: agent {} on unvisited patch", a.id));
            }
            let gain = b.ica - a.ica;
            if gain < 0.0 {
                return Err(format!("tick {tick}: ICA of agent {} decreased", a.id));
            }
            if b.wealth < 0.0 {
                return Err(format!("tick {tick}: negative wealth"));
            }
            let width = config.landscape.width as usize;
            let empty_patch = grid_before[b.pos.y as usize * width + b.pos.x as usize] == 0.0;
            if empty_patch && b.wealth != a.wealth * retain {
                return Err(format!(
                    "tick {tick}: agent {} decayed to {} instead of {}",
                    a.id,
                    b.wealth,
                    a.wealth * retain
                ));
            }
            if b.age != a.age + 1 || b.age != tick {
                return Err(format!("tick {tick}: agent {} has age {}", a.id, b.age));
            }
            match b.departure {
                Some(d) => {
                    if b.alive || d.tick != tick {
                        return Err(format!("tick {tick}: inconsistent departure for {}", b.id));
                    }
                    let starved = b.wealth < config.survival_threshold;
                    let expected = if starved {
                        DepartureCause::Starvation
                    } else {
                        DepartureCause::Retirement
                    };
                    if d.cause != expected || (!starved && b.age < config.retirement_age) {
                        return Err(format!("tick {tick}: wrong departure cause for {}", b.id));
                    }
                    if !report
                        .departures_this_tick
                        .iter()
                        .any(|e| e.id == b.id && e.cause == d.cause)
                    {
                        return Err(format!("tick {tick}: departure of {} not reported", b.id));
                    }
                }
                None => {
                    if !b.alive {
                        return Err(format!(
                            "tick {tick}: dead agent {} without departure",
                            b.id
                        ));
                    }
                    if b.age > config.retirement_age {
                        return Err(format!("tick {tick}: agent {} past retirement", b.id));
                    }
                }
            }
        }
        let departed_now = state
            .agents()
            .iter()
            .filter(|a| a.departure.map(|d| d.tick) == Some(tick))
            .count();
        if departed_now != report.departures_this_tick.len() {
            return Err(format!("tick {tick}: departure list length mismatch"));
        }

        for (i, (&h0, &h1)) in grid_before.iter().zip(land.significance_grid()).enumerate() {
            if h1 < 0.0 || h1 > h0 {
                return Err(format!("tick {tick}: patch {i} went from {h0} to {h1}"));
            }
        }
        if land.visited_count() < visited_before {
            return Err(format!("tick {tick}: visited count decreased"));
        }
        let living = state.agents().iter().filter(|a| a.alive).count() as u64;
        if land.total_occupancy() != living {
            return Err(format!(
                "tick {tick}: occupancy {} != living {living}",
                land.total_occupancy()
            ));
        }
        if report.progress < prev.progress || report.coverage < prev.coverage {
            return Err(format!("tick {tick}: progress or coverage decreased"));
        }
        if !(0.0..=1.0).contains(&report.progress) || !(0.0..=1.0).contains(&report.coverage) {
            return Err(format!("tick {tick}: ratio out of range"));
        }
        for (kind, &c) in &report.survivors_by_kind {
            if c > prev.survivors_by_kind[kind] {
                return Err(format!("tick {tick}: {kind} survivors increased"));
            }
        }
    }

    let total_gain = state.total_gain();
    let result = state.into_result();
    let ica_sum: f64 = result.agents_final.iter().map(|a| a.ica).sum();
    let depletion = result.landscape_initial_total - result.landscape_final_total;
    let scale = result.landscape_initial_total.max(1e-12);
    if (depletion - ica_sum).abs() > 1e-6 * scale || (total_gain - ica_sum).abs() > 1e-6 * scale {
        return Err(format!(
            "conservation: depletion {depletion}, ICA sum {ica_sum}, logged gains {total_gain}"
        ));
    }
    let again = rts_core::run(config).map_err(|e| e.to_string())?;
    if serde_json::to_string(&again).unwrap() != serde_json::to_string(&result).unwrap() {
        return Err("rerun is not bit-identical".into());
    }
    Ok(())
}
