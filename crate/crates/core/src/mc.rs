//! Seed-deterministic Monte Carlo harness.
//!
//! Replica `i` of a run with master seed `s` draws its randomness from a
//! ChaCha8 stream seeded with `mix64(s, i)`, the splitmix64 finalizer
//! applied to `s + (i + 1) * 0x9E3779B97F4A7C15`. Replicas run in parallel
//! but are reduced in replica-index order, so a result depends only on the
//! inputs, never on thread scheduling. Replicas that hit `max_steps` before
//! their stop condition are *censored*: they contribute `max_steps` to the
//! mean (making it a reported lower bound) and are counted in
//! `Estimate::censored` rather than silently dropped.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::game::{ConfigError, Coupling, Game, GameConfig, StepError, StopCondition};
use crate::walk::{land, Landing, WalkError, WalkSpec, WallKind};

pub const DEFAULT_CI_LEVEL: f64 = 0.99;

#[derive(Debug, Error)]
pub enum McError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Step(#[from] StepError),
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error("domain error: {0}")]
    Domain(String),
}

/// 64-bit avalanche mix of (seed, replica index); see the module docs.
pub fn mix64(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn replica_rng(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix64(seed, index))
}

fn z_quantile(level: f64) -> f64 {
    Normal::new(0.0, 1.0).unwrap().inverse_cdf(0.5 + level / 2.0)
}

/// A Monte Carlo result with a normal-approximation confidence interval.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub replicas: u64,
    pub censored: u64,
    pub seed: u64,
    pub level: f64,
}

impl Estimate {
    pub fn from_samples(samples: &[f64], censored: u64, seed: u64, level: f64) -> Estimate {
        let r = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / r;
        let stderr = if samples.len() > 1 {
            let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (r - 1.0);
            (var / r).sqrt()
        } else {
            0.0
        };
        let z = z_quantile(level);
        Estimate {
            mean,
            stderr,
            ci_low: mean - z * stderr,
            ci_high: mean + z * stderr,
            replicas: samples.len() as u64,
            censored,
            seed,
            level,
        }
    }

    /// Binomial standard error for a success fraction.
    pub fn binomial(successes: u64, replicas: u64, censored: u64, seed: u64, level: f64) -> Estimate {
        let p = successes as f64 / replicas as f64;
        let stderr = (p * (1.0 - p) / replicas as f64).sqrt();
        let z = z_quantile(level);
        Estimate {
            mean: p,
            stderr,
            ci_low: p - z * stderr,
            ci_high: p + z * stderr,
            replicas,
            censored,
            seed,
            level,
        }
    }
}

/// Per-replica trace record.
#[derive(Clone, Debug, Serialize)]
pub struct ReplicaRecord {
    pub replica: u64,
    pub steps: u64,
    pub stopped: bool,
    pub final_alive: usize,
    pub final_total: u64,
}

fn check_replicas(replicas: u64) -> Result<(), McError> {
    if replicas == 0 {
        Err(McError::Domain("replicas must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// Estimate the expected number of steps until `stop`, censoring at
/// `max_steps`.
pub fn estimate_stop_time(
    config: &GameConfig,
    stop: StopCondition,
    replicas: u64,
    seed: u64,
    max_steps: u64,
    level: f64,
) -> Result<Estimate, McError> {
    estimate_stop_time_traced(config, stop, replicas, seed, max_steps, level).map(|(e, _)| e)
}

/// Same as [`estimate_stop_time`], also returning one record per replica in
/// replica order.
pub fn estimate_stop_time_traced(
    config: &GameConfig,
    stop: StopCondition,
    replicas: u64,
    seed: u64,
    max_steps: u64,
    level: f64,
) -> Result<(Estimate, Vec<ReplicaRecord>), McError> {
    check_replicas(replicas)?;
    config.validate()?;
    let records: Vec<ReplicaRecord> = (0..replicas)
        .into_par_iter()
        .map(|i| {
            let mut rng = replica_rng(seed, i);
            let mut game = Game::new(config.clone()).expect("validated config");
            let r = game.run(stop, max_steps, &mut rng).expect("run from fresh state");
            ReplicaRecord {
                replica: i,
                steps: r.steps,
                stopped: r.stopped,
                final_alive: r.final_state.alive_count(),
                final_total: r.final_state.total,
            }
        })
        .collect();
    let samples: Vec<f64> = records.iter().map(|r| r.steps as f64).collect();
    let censored = records.iter().filter(|r| !r.stopped).count() as u64;
    Ok((Estimate::from_samples(&samples, censored, seed, level), records))
}

/// Mean change of one player's weight after exactly `steps` steps of the
/// coupled game. If every player goes bankrupt earlier the weights freeze.
pub fn estimate_player_gain(
    config: &GameConfig,
    player: usize,
    steps: u64,
    replicas: u64,
    seed: u64,
    level: f64,
) -> Result<Estimate, McError> {
    check_replicas(replicas)?;
    config.validate()?;
    if player >= config.n {
        return Err(McError::Domain(format!(
            "player {} out of range for n = {}",
            player, config.n
        )));
    }
    let samples: Vec<f64> = (0..replicas)
        .into_par_iter()
        .map(|i| {
            let mut rng = replica_rng(seed, i);
            let mut game = Game::new(config.clone()).expect("validated config");
            let start = game.state.weights[player] as f64;
            for _ in 0..steps {
                if game.state.alive_count() == 0 {
                    break;
                }
                game.advance_random(&mut rng).expect("players alive");
            }
            game.state.weights[player] as f64 - start
        })
        .collect();
    Ok(Estimate::from_samples(&samples, 0, seed, level))
}

/// Estimate Pr{some player ever reaches `w1` AND fewer than two players
/// ever reach `w2`} within `horizon` steps. A replica is censored when the
/// horizon truncates an event that was still undecided.
pub fn estimate_pstar_event(
    config: &GameConfig,
    w1: u64,
    w2: u64,
    replicas: u64,
    seed: u64,
    horizon: u64,
    level: f64,
) -> Result<Estimate, McError> {
    check_replicas(replicas)?;
    config.validate()?;
    if w1 > w2 {
        return Err(McError::Domain(format!(
            "event nesting requires w1 <= w2, got {} > {}",
            w1, w2
        )));
    }
    let outcomes: Vec<(bool, bool)> = (0..replicas)
        .into_par_iter()
        .map(|i| match config.coupling {
            Coupling::Independent => pstar_replica_independent(config, w1, w2, seed, i, horizon),
            Coupling::Coupled => pstar_replica_coupled(config, w1, w2, seed, i, horizon),
        })
        .collect();
    let successes = outcomes.iter().filter(|(event, _)| *event).count() as u64;
    let censored = outcomes.iter().filter(|(_, truncated)| *truncated).count() as u64;
    Ok(Estimate::binomial(successes, replicas, censored, seed, level))
}

/// Independent coupling: each player is its own walk, so players are
/// simulated one at a time on per-player substreams and skipped as soon as
/// the event is decided.
fn pstar_replica_independent(
    config: &GameConfig,
    w1: u64,
    w2: u64,
    seed: u64,
    replica: u64,
    horizon: u64,
) -> (bool, bool) {
    let p = 1.0 / config.n as f64;
    let mut reached_w1 = false;
    let mut count_w2 = 0u32;
    let mut truncated = false;
    for player in 0..config.n {
        if count_w2 >= 2 {
            break;
        }
        let mut rng = replica_rng(mix64(seed, replica), player as u64);
        let mut w = config.initial_weights[player];
        if w >= w1 {
            reached_w1 = true;
        }
        if w >= w2 {
            count_w2 += 1;
            continue;
        }
        let mut step = 0u64;
        while w > 0 && step < horizon {
            w -= w.min(config.c_dec);
            if rng.gen_bool(p) {
                w += config.c_inc;
            }
            if w >= w1 {
                reached_w1 = true;
            }
            if w >= w2 {
                count_w2 += 1;
                break;
            }
            step += 1;
        }
        if w > 0 && w < w2 && step >= horizon {
            truncated = true;
        }
    }
    (reached_w1 && count_w2 < 2, truncated && count_w2 < 2)
}

fn pstar_replica_coupled(
    config: &GameConfig,
    w1: u64,
    w2: u64,
    seed: u64,
    replica: u64,
    horizon: u64,
) -> (bool, bool) {
    let mut rng = replica_rng(seed, replica);
    let mut game = Game::new(config.clone()).expect("validated config");
    let mut reached_w1 = false;
    let mut ever_w2 = vec![false; config.n];
    let scan = |state: &crate::game::GameState,
                    reached_w1: &mut bool,
                    ever_w2: &mut Vec<bool>| {
        for (i, &w) in state.weights.iter().enumerate() {
            if w >= w1 {
                *reached_w1 = true;
            }
            if w >= w2 {
                ever_w2[i] = true;
            }
        }
    };
    scan(&game.state, &mut reached_w1, &mut ever_w2);
    let mut truncated = true;
    for _ in 0..horizon {
        let count = ever_w2.iter().filter(|&&b| b).count();
        if count >= 2 || game.state.alive_count() == 0 {
            truncated = false;
            break;
        }
        game.advance_random(&mut rng).expect("players alive");
        scan(&game.state, &mut reached_w1, &mut ever_w2);
    }
    let count = ever_w2.iter().filter(|&&b| b).count();
    (reached_w1 && count < 2, truncated && count < 2)
}

/// Fraction of walk replicas absorbed at or above the upper wall.
pub fn estimate_hit_probability(
    spec: &WalkSpec,
    replicas: u64,
    seed: u64,
    max_steps: u64,
    level: f64,
) -> Result<Estimate, McError> {
    check_replicas(replicas)?;
    spec.validate()?;
    if spec.wall.kind != WallKind::Absorbing {
        return Err(McError::Domain("hit probability needs an absorbing upper wall".into()));
    }
    let outcomes: Vec<(bool, bool)> = (0..replicas)
        .into_par_iter()
        .map(|i| {
            let mut rng = replica_rng(seed, i);
            simulate_walk(spec, &mut rng, max_steps)
        })
        .collect();
    let successes = outcomes.iter().filter(|(hit, _)| *hit).count() as u64;
    let censored = outcomes.iter().filter(|(_, censor)| *censor).count() as u64;
    Ok(Estimate::binomial(successes, replicas, censored, seed, level))
}

/// Mean number of steps until the walk is absorbed (used as the stochastic
/// cross-check of the exact absorption solver).
pub fn estimate_absorption_time(
    spec: &WalkSpec,
    replicas: u64,
    seed: u64,
    max_steps: u64,
    level: f64,
) -> Result<Estimate, McError> {
    check_replicas(replicas)?;
    spec.validate()?;
    let results: Vec<(u64, bool)> = (0..replicas)
        .into_par_iter()
        .map(|i| {
            let mut rng = replica_rng(seed, i);
            let mut pos = spec.start;
            if spec.wall.kind == WallKind::Absorbing && pos >= spec.wall.position {
                return (0, false);
            }
            let mut steps = 0u64;
            while pos > 0 && steps < max_steps {
                match land(spec, pos, rng.gen_bool(spec.up_prob)) {
                    Landing::At(y) => pos = y,
                    Landing::AbsorbedLow | Landing::AbsorbedHigh => {
                        return (steps + 1, false);
                    }
                }
                steps += 1;
            }
            (steps, pos > 0)
        })
        .collect();
    let samples: Vec<f64> = results.iter().map(|&(s, _)| s as f64).collect();
    let censored = results.iter().filter(|&&(_, c)| c).count() as u64;
    Ok(Estimate::from_samples(&samples, censored, seed, level))
}

/// Walk one replica to absorption; returns (absorbed at/above the wall,
/// censored at max_steps).
fn simulate_walk<R: Rng + ?Sized>(spec: &WalkSpec, rng: &mut R, max_steps: u64) -> (bool, bool) {
    let mut pos = spec.start;
    if pos >= spec.wall.position && spec.wall.kind == WallKind::Absorbing {
        return (true, false);
    }
    if pos == 0 {
        return (false, false);
    }
    for _ in 0..max_steps {
        match land(spec, pos, rng.gen_bool(spec.up_prob)) {
            Landing::At(y) => pos = y,
            Landing::AbsorbedLow => return (false, false),
            Landing::AbsorbedHigh => return (true, false),
        }
    }
    (false, true)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

/// Continuation statistics for one configuration observed at the first
/// bankruptcy.
#[derive(Clone, Debug, Serialize)]
pub struct ConfigGroup {
    pub survivors: usize,
    /// Sorted descending; empty when groups were merged by survivor count.
    pub weights: Vec<u64>,
    pub count: u64,
    pub mean_continuation: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EffRecReport {
    /// Steps to one survivor.
    pub lhs: Estimate,
    /// Steps to the first bankruptcy.
    pub t_one: Estimate,
    /// Continuation group with the largest mean.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub continuation_max: Option<ConfigGroup>,
    pub configs_observed: Vec<ConfigGroup>,
    /// Set when some weight-level group had fewer than 30 samples and the
    /// grouping fell back to survivor counts only.
    pub merged_by_survivors: bool,
    pub verdict: Verdict,
    /// 3 * combined standard error used in the verdict.
    pub slack: f64,
    pub note: String,
}

/// Check the decomposition "steps to one survivor <= steps to first
/// bankruptcy + worst continuation" by replaying full games and grouping
/// the continuations by the configuration seen at the first bankruptcy.
///
/// The maximum is over *observed* configurations, a lower bound on the
/// right-hand side taken over all reachable ones; the report says so.
pub fn verify_eff_rec(
    config: &GameConfig,
    replicas: u64,
    seed: u64,
    max_steps: u64,
    level: f64,
) -> Result<EffRecReport, McError> {
    check_replicas(replicas)?;
    config.validate()?;

    struct Replay {
        total_steps: u64,
        first_bankruptcy: u64,
        config_at_bankruptcy: Option<(usize, Vec<u64>)>,
        continuation: Option<f64>,
        censored: bool,
    }

    let replays: Vec<Replay> = (0..replicas)
        .into_par_iter()
        .map(|i| {
            let mut rng = replica_rng(seed, i);
            let mut game = Game::new(config.clone()).expect("validated config");
            let n0 = game.state.alive_count();
            let mut first: Option<(u64, usize, Vec<u64>)> = None;
            let mut steps = 0u64;
            while game.state.alive_count() > 1 && steps < max_steps {
                game.advance_random(&mut rng).expect("players alive");
                steps += 1;
                if first.is_none() && game.state.alive_count() < n0 {
                    let mut ws: Vec<u64> =
                        game.state.weights.iter().copied().filter(|&w| w > 0).collect();
                    ws.sort_unstable_by(|a, b| b.cmp(a));
                    first = Some((steps, game.state.alive_count(), ws));
                }
            }
            let censored = game.state.alive_count() > 1;
            match first {
                Some((t1, survivors, ws)) => Replay {
                    total_steps: steps,
                    first_bankruptcy: t1,
                    config_at_bankruptcy: Some((survivors, ws)),
                    continuation: (!censored).then(|| (steps - t1) as f64),
                    censored,
                },
                None => Replay {
                    total_steps: steps,
                    first_bankruptcy: steps,
                    config_at_bankruptcy: None,
                    continuation: None,
                    censored,
                },
            }
        })
        .collect();

    let censored = replays.iter().filter(|r| r.censored).count() as u64;
    let lhs_samples: Vec<f64> = replays.iter().map(|r| r.total_steps as f64).collect();
    let t_samples: Vec<f64> = replays.iter().map(|r| r.first_bankruptcy as f64).collect();
    let lhs = Estimate::from_samples(&lhs_samples, censored, seed, level);
    let t_one = Estimate::from_samples(&t_samples, censored, seed, level);

    use std::collections::BTreeMap;
    let mut groups: BTreeMap<(usize, Vec<u64>), Vec<f64>> = BTreeMap::new();
    for r in &replays {
        if let (Some(cfg), Some(cont)) = (&r.config_at_bankruptcy, r.continuation) {
            groups.entry(cfg.clone()).or_default().push(cont);
        }
    }
    let merged = groups.values().any(|v| v.len() < 30);
    if merged {
        let mut by_count: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        for ((survivors, _), v) in groups {
            by_count.entry(survivors).or_default().extend(v);
        }
        groups = by_count.into_iter().map(|(s, v)| ((s, Vec::new()), v)).collect();
    }
    let configs_observed: Vec<ConfigGroup> = groups
        .iter()
        .map(|((survivors, weights), v)| {
            let est = Estimate::from_samples(v, 0, seed, level);
            ConfigGroup {
                survivors: *survivors,
                weights: weights.clone(),
                count: v.len() as u64,
                mean_continuation: est.mean,
                stderr: est.stderr,
            }
        })
        .collect();
    let continuation_max = configs_observed
        .iter()
        .max_by(|a, b| a.mean_continuation.total_cmp(&b.mean_continuation))
        .cloned();

    let cont_mean = continuation_max.as_ref().map_or(0.0, |g| g.mean_continuation);
    let cont_se = continuation_max.as_ref().map_or(0.0, |g| g.stderr);
    let slack =
        3.0 * (lhs.stderr * lhs.stderr + t_one.stderr * t_one.stderr + cont_se * cont_se).sqrt();
    let verdict = if censored > 0 {
        Verdict::Inconclusive
    } else if lhs.mean <= t_one.mean + cont_mean + slack {
        Verdict::Holds
    } else {
        Verdict::Fails
    };
    Ok(EffRecReport {
        lhs,
        t_one,
        continuation_max,
        configs_observed,
        merged_by_survivors: merged,
        verdict,
        slack,
        note: "continuation maximum ranges over observed configurations only, a lower bound \
               on the worst reachable configuration"
            .into(),
    })
}
