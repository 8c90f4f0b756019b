// Each test target pulls in the oracles it needs.
#![allow(dead_code)]

//! Independent oracles for cross-checking the exact solvers.
//!
//! These re-encode the walk semantics from scratch and solve by value
//! iteration instead of linear algebra, so they share no code with the
//! production path. Keep them on small walks: convergence is geometric in
//! the expected absorption time.

use ruin_lab_core::walk::{WalkSpec, WallKind};

#[derive(Clone, Copy, Debug, PartialEq)]
enum Dest {
    State(usize),
    Low,
    High,
}

struct Chain {
    /// (up destination, down destination) per state 1..=top.
    moves: Vec<(Dest, Dest)>,
    p: f64,
    top: u64,
}

fn chain(spec: &WalkSpec) -> Chain {
    let top = match spec.wall.kind {
        WallKind::Absorbing => spec.wall.position - 1,
        _ => spec.wall.position,
    };
    let up_cap = match spec.wall.kind {
        WallKind::Absorbing => u64::MAX,
        WallKind::Reflecting => spec.wall.position,
        WallKind::SwapReflecting => spec.wall.position - 1,
    };
    let moves = (1..=top)
        .map(|x| {
            let raw = x + spec.up_step;
            let up = if spec.wall.kind == WallKind::Absorbing && raw >= spec.wall.position {
                Dest::High
            } else {
                let clamped = raw.min(up_cap);
                if clamped == 0 {
                    Dest::Low
                } else {
                    Dest::State(clamped as usize - 1)
                }
            };
            let down = if x <= spec.down_step {
                Dest::Low
            } else {
                Dest::State((x - spec.down_step) as usize - 1)
            };
            (up, down)
        })
        .collect();
    Chain { moves, p: spec.up_prob, top }
}

/// Probability of absorption at/above the wall, by fixed-point iteration.
pub fn hit_probability_oracle(spec: &WalkSpec) -> f64 {
    if spec.start >= spec.wall.position && spec.wall.kind == WallKind::Absorbing {
        return 1.0;
    }
    if spec.start == 0 {
        return 0.0;
    }
    let ch = chain(spec);
    let q = 1.0 - ch.p;
    let mut h = vec![0.0f64; ch.top as usize];
    loop {
        let mut delta = 0.0f64;
        let prev = h.clone();
        for (i, &(up, down)) in ch.moves.iter().enumerate() {
            let hu = match up {
                Dest::State(j) => prev[j],
                Dest::High => 1.0,
                Dest::Low => 0.0,
            };
            let hd = match down {
                Dest::State(j) => prev[j],
                Dest::High => 1.0,
                Dest::Low => 0.0,
            };
            let v = ch.p * hu + q * hd;
            delta = delta.max((v - h[i]).abs());
            h[i] = v;
        }
        if delta < 1e-14 {
            break;
        }
    }
    h[spec.start as usize - 1]
}

/// Expected steps to absorption, by fixed-point iteration.
pub fn absorption_oracle(spec: &WalkSpec) -> f64 {
    if spec.start == 0
        || (spec.wall.kind == WallKind::Absorbing && spec.start >= spec.wall.position)
    {
        return 0.0;
    }
    let ch = chain(spec);
    let q = 1.0 - ch.p;
    let mut g = vec![0.0f64; ch.top as usize];
    let mut iters = 0u64;
    loop {
        let mut delta = 0.0f64;
        let prev = g.clone();
        for (i, &(up, down)) in ch.moves.iter().enumerate() {
            let gu = match up {
                Dest::State(j) => prev[j],
                _ => 0.0,
            };
            let gd = match down {
                Dest::State(j) => prev[j],
                _ => 0.0,
            };
            let v = 1.0 + ch.p * gu + q * gd;
            delta = delta.max((v - g[i]).abs());
            g[i] = v;
        }
        iters += 1;
        assert!(iters < 50_000_000, "oracle used on a walk that mixes too slowly");
        if delta < 1e-11 {
            break;
        }
    }
    g[spec.start as usize - 1]
}

/// Exact binomial lower tail by direct convolution over trial outcomes.
pub fn binom_tail_convolution_oracle(t: u64, n: u64, s: i64) -> f64 {
    if s < 0 {
        return 0.0;
    }
    let p = 1.0 / n as f64;
    let q = 1.0 - p;
    let mut dp = vec![0.0f64; t as usize + 1];
    dp[0] = 1.0;
    for trial in 1..=t as usize {
        for i in (1..=trial).rev() {
            dp[i] = dp[i] * q + dp[i - 1] * p;
        }
        dp[0] *= q;
    }
    dp.iter().take((s as usize).min(t as usize) + 1).sum()
}
