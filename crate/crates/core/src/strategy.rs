//! Movement rule trees for the four scholar strategies.
//!
//! Everything here is a pure function of a [`WorldView`] snapshot and a
//! random stream. Whenever a rule picks "one of" a set of patches, the set is
//! taken in candidate order (row-major) and exactly one index is drawn with
//! `rng.gen_range(0..len)`, even when the set has a single member. All
//! "higher significance" tests are strict and relative to the agent's current
//! patch.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::SimError;
use crate::landscape::Position;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyKind {
    /// Climbs towards the highest significance in sight.
    Expert,
    /// Goes where other agents currently are.
    Follower,
    /// Goes where nobody has been.
    Maverick,
    /// Goes where somebody has been.
    Conservative,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 4] = [
        StrategyKind::Expert,
        StrategyKind::Follower,
        StrategyKind::Maverick,
        StrategyKind::Conservative,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::Expert => "expert",
            StrategyKind::Follower => "follower",
            StrategyKind::Maverick => "maverick",
            StrategyKind::Conservative => "conservative",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for StrategyKind {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "expert" => Ok(StrategyKind::Expert),
            "follower" => Ok(StrategyKind::Follower),
            "maverick" => Ok(StrategyKind::Maverick),
            "conservative" => Ok(StrategyKind::Conservative),
            other => Err(SimError::config(format!("unknown strategy kind `{other}`"))),
        }
    }
}

/// What an agent knows about one patch when it decides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchView {
    pub pos: Position,
    pub significance: f64,
    /// Ever visited by anyone, spawns included.
    pub visited: bool,
    /// At least one living agent other than the viewer stands here.
    pub occupied_by_others: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldView {
    pub current: PatchView,
    /// Never contains `current.pos`.
    pub candidates: Vec<PatchView>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Decision {
    Stay,
    MoveTo(Position),
}

pub fn decide<R: Rng + ?Sized>(kind: StrategyKind, view: &WorldView, rng: &mut R) -> Decision {
    match kind {
        StrategyKind::Expert => decide_expert(view, rng),
        StrategyKind::Follower => decide_follower(view, rng),
        StrategyKind::Maverick => decide_maverick(view, rng),
        StrategyKind::Conservative => decide_conservative(view, rng),
    }
}

/// Draws uniformly among candidates satisfying `pred`; `None` if there are none.
fn pick_where<R, F>(candidates: &[PatchView], rng: &mut R, pred: F) -> Option<Position>
where
    R: Rng + ?Sized,
    F: Fn(&PatchView) -> bool,
{
    let count = candidates.iter().filter(|c| pred(c)).count();
    if count == 0 {
        return None;
    }
    let k = rng.gen_range(0..count);
    candidates.iter().filter(|c| pred(c)).nth(k).map(|c| c.pos)
}

fn move_or_stay(target: Option<Position>) -> Decision {
    target.map_or(Decision::Stay, Decision::MoveTo)
}

/// Move to the highest patch in sight if it beats the current one.
pub fn decide_expert<R: Rng + ?Sized>(view: &WorldView, rng: &mut R) -> Decision {
    let best = view
        .candidates
        .iter()
        .map(|c| c.significance)
        .fold(f64::NEG_INFINITY, f64::max);
    if best > view.current.significance {
        move_or_stay(pick_where(&view.candidates, rng, |c| {
            c.significance == best
        }))
    } else {
        Decision::Stay
    }
}

/// Any unvisited patch wins; otherwise any strictly higher patch; otherwise stay.
pub fn decide_maverick<R: Rng + ?Sized>(view: &WorldView, rng: &mut R) -> Decision {
    if let Some(p) = pick_where(&view.candidates, rng, |c| !c.visited) {
        return Decision::MoveTo(p);
    }
    let here = view.current.significance;
    move_or_stay(pick_where(&view.candidates, rng, |c| c.significance > here))
}

pub fn decide_follower<R: Rng + ?Sized>(view: &WorldView, rng: &mut R) -> Decision {
    let cands = &view.candidates;
    if !cands.iter().any(|c| c.occupied_by_others) {
        return move_or_stay(pick_where(cands, rng, |_| true));
    }
    let here = view.current.significance;
    if let Some(p) = pick_where(cands, rng, |c| {
        c.occupied_by_others && c.significance > here
    }) {
        return Decision::MoveTo(p);
    }
    move_or_stay(pick_where(cands, rng, |c| !c.occupied_by_others))
}

pub fn decide_conservative<R: Rng + ?Sized>(view: &WorldView, rng: &mut R) -> Decision {
    let cands = &view.candidates;
    if !cands.iter().any(|c| c.visited) {
        return move_or_stay(pick_where(cands, rng, |_| true));
    }
    let here = view.current.significance;
    if let Some(p) = pick_where(cands, rng, |c| c.visited && c.significance > here) {
        return Decision::MoveTo(p);
    }
    move_or_stay(pick_where(cands, rng, |c| !c.visited))
}
