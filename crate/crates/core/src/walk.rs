//! Exact analysis of 1-D integer random walks.
//!
//! A [`WalkSpec`] moves up by `up_step` with probability `up_prob` and down
//! by `down_step` otherwise. Position 0 is always an absorbing wall; the
//! upper wall is configurable:
//!
//! * [`WallKind::Absorbing`] — any landing at or above the wall counts as
//!   "reached" and stops the walk.
//! * [`WallKind::Reflecting`] — up-moves clamp to the wall, so the walk can
//!   rest on it. This is the exact reduction of the capped game total:
//!   clipping the award holds the total at the cap.
//! * [`WallKind::SwapReflecting`] — up-moves clamp to one *below* the wall,
//!   and the wall itself is left in a single step. This models the walk of
//!   the currently poorest player: whoever reaches the per-player cap stops
//!   being the poorest and hands the role to someone strictly below it, so
//!   the cap can only be occupied as a starting state.
//!
//! Hitting probabilities and expected absorption times come from dense
//! linear solves of the first-step equations; first-passage times through a
//! reflecting wall come from the backward recurrence
//! `e_x = 1/(1-p) + p/(1-p) * (e_{x+1} + ... + e_{x+up_step})` with indices
//! truncated at the wall, where `e_x` is the expected number of steps to go
//! from `x` to `x-1` for the first time.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::solve::{self, Dense, SingularSystem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WallKind {
    Absorbing,
    Reflecting,
    SwapReflecting,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpperWall {
    pub position: u64,
    pub kind: WallKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkSpec {
    /// Upward displacement. May be 0: a "win" that exactly cancels the
    /// payment leaves the walk in place.
    pub up_step: u64,
    pub up_prob: f64,
    pub down_step: u64,
    pub start: u64,
    pub wall: UpperWall,
    /// Records construction quirks such as floored boundaries.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Error)]
pub enum WalkError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("degenerate walk: {0}")]
    Degenerate(String),
    #[error("numeric error solving walk equations: {0}")]
    Numeric(#[from] SingularSystem),
}

impl WalkSpec {
    pub fn validate(&self) -> Result<(), WalkError> {
        if !(self.up_prob > 0.0 && self.up_prob < 1.0) {
            return Err(WalkError::Domain(format!(
                "up_prob must lie strictly between 0 and 1, got {}",
                self.up_prob
            )));
        }
        if self.down_step == 0 {
            return Err(WalkError::Degenerate(
                "down_step must be positive".into(),
            ));
        }
        if self.wall.position == 0 {
            return Err(WalkError::Domain("upper wall must sit above 0".into()));
        }
        if self.start > self.wall.position {
            return Err(WalkError::Domain(format!(
                "start {} lies above the wall at {}",
                self.start, self.wall.position
            )));
        }
        Ok(())
    }

    fn is_reflecting(&self) -> bool {
        matches!(
            self.wall.kind,
            WallKind::Reflecting | WallKind::SwapReflecting
        )
    }

    /// Highest position an up-move may land on.
    fn clamp_top(&self) -> u64 {
        match self.wall.kind {
            WallKind::Reflecting => self.wall.position,
            WallKind::SwapReflecting => self.wall.position - 1,
            WallKind::Absorbing => u64::MAX,
        }
    }
}

/// Where a single move lands.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Landing {
    At(u64),
    AbsorbedLow,
    AbsorbedHigh,
}

/// Single source of truth for the transition structure; the linear solvers
/// and the Monte Carlo walk simulator both go through here.
pub fn land(spec: &WalkSpec, from: u64, up: bool) -> Landing {
    if up {
        let raw = from.saturating_add(spec.up_step);
        match spec.wall.kind {
            WallKind::Absorbing => {
                if raw >= spec.wall.position {
                    Landing::AbsorbedHigh
                } else {
                    Landing::At(raw)
                }
            }
            _ => {
                let clamped = raw.min(spec.clamp_top());
                if clamped == 0 {
                    // Swap wall at position 1: the role hand-off lands on
                    // the absorbing lower wall.
                    Landing::AbsorbedLow
                } else {
                    Landing::At(clamped)
                }
            }
        }
    } else if from <= spec.down_step {
        Landing::AbsorbedLow
    } else {
        Landing::At(from - spec.down_step)
    }
}

/// Expected single-step-down passage times `e_x` for `x` in `[1, wall]`.
#[derive(Clone, Debug, Serialize)]
pub struct EVector {
    pub wall: u64,
    /// `e[x - 1]` is the expected number of steps from `x` to `x - 1`.
    pub e: Vec<f64>,
    /// Largest relative defect when the values are substituted back into
    /// the defining recurrence (absolute defect over max(1, e_x)).
    pub residual: f64,
}

impl EVector {
    pub fn value(&self, x: u64) -> f64 {
        self.e[(x - 1) as usize]
    }

    /// Exact expected first passage from `from` down to `to`.
    pub fn passage(&self, from: u64, to: u64) -> f64 {
        self.e[to as usize..from as usize].iter().sum()
    }
}

/// Worst-case walk of the poorest of `k` remaining players in a game with
/// total cap `w0` and award `c_inc` (payment fixed at 1): up `c_inc - 1`
/// with probability `1/n`, down 1 otherwise, swap-reflecting cap at
/// `w0 / k`, started at the cap.
pub fn poorest_walk(n: usize, w0: u64, k: usize, c_inc: u64) -> Result<WalkSpec, WalkError> {
    if k == 0 {
        return Err(WalkError::Domain("k must be at least 1".into()));
    }
    if n < 2 {
        return Err(WalkError::Domain("need at least 2 players".into()));
    }
    if c_inc < 2 {
        return Err(WalkError::Degenerate(
            "award must exceed the unit payment (c_inc >= 2)".into(),
        ));
    }
    let boundary = w0 / k as u64;
    if boundary == 0 {
        return Err(WalkError::Domain(format!(
            "per-player cap w0/k = {}/{} is below 1",
            w0, k
        )));
    }
    let note = (!w0.is_multiple_of(k as u64))
        .then(|| format!("boundary floored from {}/{} to {}", w0, k, boundary));
    Ok(WalkSpec {
        up_step: c_inc - 1,
        up_prob: 1.0 / n as f64,
        down_step: 1,
        start: boundary,
        wall: UpperWall { position: boundary, kind: WallKind::SwapReflecting },
        note,
    })
}

/// Walk of the total weight of `k` remaining players under the capped rule:
/// up `c_inc - k` with probability `k/n`, down `k` otherwise, reflecting
/// cap at `w0`, started at the cap.
pub fn total_walk(n: usize, w0: u64, k: usize, c_inc: u64) -> Result<WalkSpec, WalkError> {
    if k == 0 || k > n {
        return Err(WalkError::Domain(format!("k = {} must lie in [1, n]", k)));
    }
    if k == n {
        return Err(WalkError::Degenerate(
            "with all players alive every step awards someone; the total never falls".into(),
        ));
    }
    if c_inc <= k as u64 {
        return Err(WalkError::Degenerate(format!(
            "award {} does not exceed the joint payment {}; the total can never move up",
            c_inc, k
        )));
    }
    if w0 == 0 {
        return Err(WalkError::Domain("total cap must be positive".into()));
    }
    Ok(WalkSpec {
        up_step: c_inc - k as u64,
        up_prob: k as f64 / n as f64,
        down_step: k as u64,
        start: w0,
        wall: UpperWall { position: w0, kind: WallKind::Reflecting },
        note: None,
    })
}

/// The two-player total walk with every spatial parameter halved: up
/// `c_inc/2 - 1` with probability `2/n`, down 1, reflecting cap at `w0/2`.
pub fn total_walk_halved(n: usize, w0: u64, c_inc: u64) -> Result<WalkSpec, WalkError> {
    if n < 3 {
        return Err(WalkError::Domain("halved total walk needs n >= 3".into()));
    }
    if !c_inc.is_multiple_of(2) {
        return Err(WalkError::Domain(format!(
            "halved form needs an even award, got {}",
            c_inc
        )));
    }
    if c_inc <= 2 {
        return Err(WalkError::Degenerate(
            "award must exceed the joint payment 2; the total can never move up".into(),
        ));
    }
    let boundary = w0 / 2;
    if boundary == 0 {
        return Err(WalkError::Domain("total cap must be at least 2".into()));
    }
    let note = (!w0.is_multiple_of(2)).then(|| format!("boundary floored from {}/2 to {}", w0, boundary));
    Ok(WalkSpec {
        up_step: c_inc / 2 - 1,
        up_prob: 2.0 / n as f64,
        down_step: 1,
        start: boundary,
        wall: UpperWall { position: boundary, kind: WallKind::Reflecting },
        note,
    })
}

/// Probability that the walk reaches (or overshoots) the absorbing upper
/// wall before hitting 0, from `spec.start`.
pub fn exact_hit_probability(spec: &WalkSpec) -> Result<f64, WalkError> {
    spec.validate()?;
    if spec.wall.kind != WallKind::Absorbing {
        return Err(WalkError::Domain(
            "hit probability needs an absorbing upper wall".into(),
        ));
    }
    if spec.start >= spec.wall.position {
        return Ok(1.0);
    }
    if spec.start == 0 {
        return Ok(0.0);
    }
    let w = spec.wall.position as usize;
    let m = w - 1; // transient states 1..=w-1
    let p = spec.up_prob;
    let q = 1.0 - p;
    let mut a = Dense::zeros(m);
    let mut b = vec![0.0; m];
    for x in 1..w as u64 {
        let r = (x - 1) as usize;
        *a.at(r, r) += 1.0;
        match land(spec, x, true) {
            Landing::At(y) => *a.at(r, (y - 1) as usize) -= p,
            Landing::AbsorbedHigh => b[r] += p,
            Landing::AbsorbedLow => unreachable!(),
        }
        match land(spec, x, false) {
            Landing::At(y) => *a.at(r, (y - 1) as usize) -= q,
            Landing::AbsorbedLow => {}
            Landing::AbsorbedHigh => unreachable!(),
        }
    }
    let h = solve::solve(&a, &b)?;
    Ok(h[(spec.start - 1) as usize].clamp(0.0, 1.0))
}

/// Expected number of steps until absorption from `spec.start`. With a
/// reflecting upper wall the only absorbing state is 0; with an absorbing
/// wall both ends stop the walk.
pub fn exact_expected_absorption(spec: &WalkSpec) -> Result<f64, WalkError> {
    spec.validate()?;
    if spec.start == 0 {
        return Ok(0.0);
    }
    let top = match spec.wall.kind {
        WallKind::Absorbing => {
            if spec.start >= spec.wall.position {
                return Ok(0.0);
            }
            spec.wall.position - 1
        }
        _ => spec.wall.position,
    };
    let m = top as usize;
    let p = spec.up_prob;
    let q = 1.0 - p;
    let mut a = Dense::zeros(m);
    let b = vec![1.0; m];
    for x in 1..=top {
        let r = (x - 1) as usize;
        *a.at(r, r) += 1.0;
        for (prob, up) in [(p, true), (q, false)] {
            match land(spec, x, up) {
                Landing::At(y) => *a.at(r, (y - 1) as usize) -= prob,
                Landing::AbsorbedLow | Landing::AbsorbedHigh => {}
            }
        }
    }
    let g = solve::solve(&a, &b)?;
    Ok(g[(spec.start - 1) as usize])
}

/// Solve the backward recurrence for the single-step-down passage times of
/// a walk with a reflecting upper wall and unit down-steps.
pub fn solve_e_recurrence(spec: &WalkSpec) -> Result<EVector, WalkError> {
    spec.validate()?;
    if !spec.is_reflecting() {
        return Err(WalkError::Domain(
            "passage recurrence needs a reflecting upper wall".into(),
        ));
    }
    if spec.down_step != 1 {
        return Err(WalkError::Domain(
            "passage recurrence needs unit down-steps".into(),
        ));
    }
    let b = spec.wall.position;
    let p = spec.up_prob;
    let inv = 1.0 / (1.0 - p);
    let ratio = p * inv;
    let top = spec.clamp_top();
    let n = b as usize;
    // All window terms are positive, so direct summation stays accurate
    // even when the values grow geometrically.
    let rhs = |e: &[f64], x: u64| -> f64 {
        if spec.wall.kind == WallKind::SwapReflecting && x == b {
            // Both branches leave the wall downward in one step.
            return 1.0;
        }
        let hi = x.saturating_add(spec.up_step).min(top);
        let s: f64 = (x + 1..=hi).map(|y| e[(y - 1) as usize]).sum();
        inv + ratio * s
    };
    let mut e = vec![0.0; n];
    for x in (1..=b).rev() {
        e[(x - 1) as usize] = rhs(&e, x);
    }
    // Defining-equation defect, relative to the value's own scale.
    let mut residual = 0.0f64;
    for x in 1..=b {
        let i = (x - 1) as usize;
        residual = residual.max((e[i] - rhs(&e, x)).abs() / e[i].max(1.0));
    }
    Ok(EVector { wall: b, e, residual })
}

/// Exact expected first passage from `from` down to `to`, as the sum of the
/// single-step-down passage times in between.
pub fn exact_first_passage(spec: &WalkSpec, from: u64, to: u64) -> Result<f64, WalkError> {
    if to >= from {
        return Err(WalkError::Domain(format!(
            "need to < from, got from {} to {}",
            from, to
        )));
    }
    if from > spec.wall.position {
        return Err(WalkError::Domain(format!(
            "from {} lies above the wall at {}",
            from, spec.wall.position
        )));
    }
    let e = solve_e_recurrence(spec)?;
    Ok(e.passage(from, to))
}
