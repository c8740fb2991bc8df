//! The scientific landscape: a rectangular grid of patches, each holding a
//! nonnegative significance value that visiting agents extract.
//!
//! Besides the significance field the landscape keeps two bookkeeping grids:
//! `visited` (has any agent ever stood here, spawn included) and `occupancy`
//! (how many living agents stand here right now). Edges are hard; nothing in
//! the model wraps around.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Position {
    pub x: u32,
    pub y: u32,
}

impl Position {
    pub const fn new(x: u32, y: u32) -> Self {
        Position { x, y }
    }

    pub fn chebyshev(self, other: Position) -> u32 {
        self.x.abs_diff(other.x).max(self.y.abs_diff(other.y))
    }
}

impl std::fmt::Display for Position {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// One Gaussian bump of significance. The center is real-valued.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianSpec {
    pub center: [f64; 2],
    pub amplitude: f64,
    pub sigma: f64,
}

impl GaussianSpec {
    pub fn new(cx: f64, cy: f64, amplitude: f64, sigma: f64) -> Self {
        GaussianSpec {
            center: [cx, cy],
            amplitude,
            sigma,
        }
    }

    fn value_at(&self, x: f64, y: f64) -> f64 {
        let dx = x - self.center[0];
        let dy = y - self.center[1];
        self.amplitude * (-(dx * dx + dy * dy) / (2.0 * self.sigma * self.sigma)).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LandscapeConfig {
    pub width: u32,
    pub height: u32,
    pub gaussians: Vec<GaussianSpec>,
    /// Half-range of the uniform additive noise.
    pub noise_amplitude: f64,
    pub landscape_seed: u64,
}

impl Default for LandscapeConfig {
    /// Two peaks of unequal height on a 50x50 grid with light noise.
    fn default() -> Self {
        LandscapeConfig {
            width: 50,
            height: 50,
            gaussians: vec![
                GaussianSpec::new(15.0, 15.0, 10.0, 3.0),
                GaussianSpec::new(35.0, 35.0, 8.0, 4.0),
            ],
            noise_amplitude: 0.2,
            landscape_seed: 2015,
        }
    }
}

impl LandscapeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(SimError::config(format!(
                "landscape dimensions must be positive, got {}x{}",
                self.width, self.height
            )));
        }
        if (self.width as u64) * (self.height as u64) > (1 << 28) {
            return Err(SimError::config(format!(
                "landscape {}x{} is too large",
                self.width, self.height
            )));
        }
        if !(self.noise_amplitude >= 0.0 && self.noise_amplitude.is_finite()) {
            return Err(SimError::config(format!(
                "noise_amplitude must be a finite nonnegative number, got {}",
                self.noise_amplitude
            )));
        }
        for (i, g) in self.gaussians.iter().enumerate() {
            if !(g.sigma > 0.0 && g.sigma.is_finite()) {
                return Err(SimError::config(format!(
                    "gaussian {i}: sigma must be positive, got {}",
                    g.sigma
                )));
            }
            if !(g.amplitude >= 0.0 && g.amplitude.is_finite()) {
                return Err(SimError::config(format!(
                    "gaussian {i}: amplitude must be nonnegative, got {}",
                    g.amplitude
                )));
            }
            if !(g.center[0].is_finite() && g.center[1].is_finite()) {
                return Err(SimError::config(format!(
                    "gaussian {i}: center must be finite"
                )));
            }
        }
        Ok(())
    }
}

/// Shape of the neighbourhood an agent can see.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VisionMetric {
    /// Square neighbourhood: `max(|dx|, |dy|) <= vision`.
    #[default]
    Chebyshev,
    /// Disc: `dx^2 + dy^2 <= vision^2`.
    Euclidean,
}

#[derive(Debug, Clone)]
pub struct Landscape {
    config: LandscapeConfig,
    significance: Vec<f64>,
    visited: Vec<bool>,
    occupancy: Vec<u32>,
    visited_count: usize,
    initial_total: f64,
    initial_max: f64,
}

impl Landscape {
    /// Builds the significance field: sum of Gaussians plus uniform noise in
    /// `[-noise, +noise]`, clamped at zero. Noise is drawn in row-major patch
    /// order from a generator seeded by `landscape_seed`.
    pub fn generate(config: &LandscapeConfig) -> Result<Self> {
        config.validate()?;
        let (w, h) = (config.width as usize, config.height as usize);
        let mut rng = ChaCha8Rng::seed_from_u64(config.landscape_seed);
        let noise = config.noise_amplitude;
        let mut significance = Vec::with_capacity(w * h);
        for y in 0..h {
            for x in 0..w {
                let base: f64 = config
                    .gaussians
                    .iter()
                    .map(|g| g.value_at(x as f64, y as f64))
                    .sum();
                let u = noise * (2.0 * rng.gen::<f64>() - 1.0);
                significance.push((base + u).max(0.0));
            }
        }
        let initial_total = significance.iter().sum();
        let initial_max = significance.iter().copied().fold(0.0, f64::max);
        Ok(Landscape {
            config: config.clone(),
            significance,
            visited: vec![false; w * h],
            occupancy: vec![0; w * h],
            visited_count: 0,
            initial_total,
            initial_max,
        })
    }

    pub fn config(&self) -> &LandscapeConfig {
        &self.config
    }

    pub fn width(&self) -> u32 {
        self.config.width
    }

    pub fn height(&self) -> u32 {
        self.config.height
    }

    pub fn patch_count(&self) -> usize {
        self.significance.len()
    }

    pub fn contains(&self, pos: Position) -> bool {
        pos.x < self.config.width && pos.y < self.config.height
    }

    #[inline]
    fn index(&self, pos: Position) -> usize {
        debug_assert!(self.contains(pos), "{pos} outside landscape");
        pos.y as usize * self.config.width as usize + pos.x as usize
    }

    #[inline]
    pub fn significance(&self, pos: Position) -> f64 {
        self.significance[self.index(pos)]
    }

    #[inline]
    pub fn is_visited(&self, pos: Position) -> bool {
        self.visited[self.index(pos)]
    }

    #[inline]
    pub fn occupancy(&self, pos: Position) -> u32 {
        self.occupancy[self.index(pos)]
    }

    /// Row-major significance values.
    pub fn significance_grid(&self) -> &[f64] {
        &self.significance
    }

    pub fn initial_total(&self) -> f64 {
        self.initial_total
    }

    pub fn initial_max(&self) -> f64 {
        self.initial_max
    }

    pub fn visited_count(&self) -> usize {
        self.visited_count
    }

    pub fn total_occupancy(&self) -> u64 {
        self.occupancy.iter().map(|&c| c as u64).sum()
    }

    /// Sum of the current significance over all patches.
    pub fn total_significance(&self) -> f64 {
        self.significance.iter().sum()
    }

    /// All in-bounds patches within `vision` of `pos`, excluding `pos`
    /// itself, in row-major order.
    pub fn neighborhood(&self, pos: Position, vision: u32, metric: VisionMetric) -> Vec<Position> {
        let mut out = Vec::new();
        self.neighborhood_into(pos, vision, metric, &mut out);
        out
    }

    /// Like [`Landscape::neighborhood`] but reuses `out`.
    pub fn neighborhood_into(
        &self,
        pos: Position,
        vision: u32,
        metric: VisionMetric,
        out: &mut Vec<Position>,
    ) {
        out.clear();
        let x0 = pos.x.saturating_sub(vision);
        let y0 = pos.y.saturating_sub(vision);
        let x1 = pos.x.saturating_add(vision).min(self.config.width - 1);
        let y1 = pos.y.saturating_add(vision).min(self.config.height - 1);
        let v2 = vision as u64 * vision as u64;
        for y in y0..=y1 {
            for x in x0..=x1 {
                if x == pos.x && y == pos.y {
                    continue;
                }
                if metric == VisionMetric::Euclidean {
                    let dx = x.abs_diff(pos.x) as u64;
                    let dy = y.abs_diff(pos.y) as u64;
                    if dx * dx + dy * dy > v2 {
                        continue;
                    }
                }
                out.push(Position { x, y });
            }
        }
    }

    /// Removes `alpha` of the remaining significance at `pos` and returns the
    /// amount removed.
    #[inline]
    pub fn extract(&mut self, pos: Position, alpha: f64) -> f64 {
        let i = self.index(pos);
        let gain = alpha * self.significance[i];
        self.significance[i] = (self.significance[i] - gain).max(0.0);
        gain
    }

    /// Returns true when the patch was not visited before.
    pub fn mark_visited(&mut self, pos: Position) -> bool {
        let i = self.index(pos);
        let fresh = !self.visited[i];
        if fresh {
            self.visited[i] = true;
            self.visited_count += 1;
        }
        fresh
    }

    /// Moves one agent's occupancy from `from` to `to`. Either side may be
    /// absent (spawn, departure). Fails without touching anything if `from`
    /// is already empty.
    pub fn adjust_occupancy(&mut self, from: Option<Position>, to: Option<Position>) -> Result<()> {
        if let Some(p) = from {
            let i = self.index(p);
            if self.occupancy[i] == 0 {
                return Err(SimError::Invariant {
                    tick: 0,
                    detail: format!("occupancy underflow at {p}"),
                    state: String::new(),
                });
            }
            self.occupancy[i] -= 1;
        }
        if let Some(q) = to {
            let i = self.index(q);
            self.occupancy[i] += 1;
        }
        Ok(())
    }

    /// 8-bit binary PGM (P5), one pixel per patch, scaled against the
    /// initial maximum significance.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out =
            format!("P5\n{} {}\n255\n", self.config.width, self.config.height).into_bytes();
        let max = self.initial_max;
        out.extend(self.significance.iter().map(|&h| {
            if max > 0.0 {
                (255.0 * h / max).round().clamp(0.0, 255.0) as u8
            } else {
                0
            }
        }));
        out
    }
}
