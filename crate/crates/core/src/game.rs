//! The coupled n-player weight-transfer game.
//!
//! Every step, each player that is still in the game pays `c_dec` (or its
//! whole weight if smaller); one slot is drawn uniformly from all `n`
//! original slots, and if the player sitting there was alive at the start
//! of the step it receives `c_inc` in the same net update. A player whose
//! net result is 0 is bankrupt and never re-enters. Under the semi-local
//! rule the award is clipped so the post-step total never exceeds the cap
//! `w0`; under the local rule weights are unbounded.
//!
//! Payment and award are a single net update: a weight-1 winner with unit
//! payment ends the step at `c_inc`, not bankrupt. A bankrupt slot drawn as
//! winner receives nothing.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    Local,
    Semilocal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    /// One shared draw per step: exactly one slot can win.
    Coupled,
    /// Every alive player flips its own 1/n coin each step.
    Independent,
}

/// Winner draws are slot-uniform over all `n` original slots, so an alive
/// player wins with probability exactly 1/n regardless of how many players
/// remain. Alive-uniform selection is available for exploration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WinnerSelection {
    #[default]
    SlotUniform,
    AliveUniform,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameConfig {
    pub n: usize,
    pub initial_weights: Vec<u64>,
    pub c_inc: u64,
    pub c_dec: u64,
    pub rule: Rule,
    pub coupling: Coupling,
    /// Total cap for the semi-local rule. Must equal the initial total.
    pub w0: u64,
    #[serde(default)]
    pub winner_selection: WinnerSelection,
}

impl GameConfig {
    /// Local-rule game with unit payment and equal starting weights.
    pub fn local(n: usize, initial: u64, c_inc: u64) -> Self {
        Self::with_weights(vec![initial; n], c_inc, Rule::Local)
    }

    /// Semi-local game capped at the initial total.
    pub fn semilocal(n: usize, initial: u64, c_inc: u64) -> Self {
        Self::with_weights(vec![initial; n], c_inc, Rule::Semilocal)
    }

    pub fn with_weights(weights: Vec<u64>, c_inc: u64, rule: Rule) -> Self {
        let w0 = weights.iter().sum();
        GameConfig {
            n: weights.len(),
            initial_weights: weights,
            c_inc,
            c_dec: 1,
            rule,
            coupling: Coupling::Coupled,
            w0,
            winner_selection: WinnerSelection::SlotUniform,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n < 2 {
            return Err(ConfigError::PlayerCount { n: self.n });
        }
        if self.initial_weights.len() != self.n {
            return Err(ConfigError::WeightCount {
                n: self.n,
                got: self.initial_weights.len(),
            });
        }
        if let Some(slot) = self.initial_weights.iter().position(|&w| w == 0) {
            return Err(ConfigError::InitialWeight { slot });
        }
        if self.c_inc == 0 {
            return Err(ConfigError::Award);
        }
        if self.c_dec == 0 {
            return Err(ConfigError::Payment);
        }
        let total: u64 = self.initial_weights.iter().sum();
        if self.rule == Rule::Semilocal {
            if self.w0 != total {
                return Err(ConfigError::TotalCap { w0: self.w0, total });
            }
            if self.coupling == Coupling::Independent {
                return Err(ConfigError::IndependentCap);
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("n must be at least 2, got {n}")]
    PlayerCount { n: usize },
    #[error("expected {n} initial weights, got {got}")]
    WeightCount { n: usize, got: usize },
    #[error("initial weight must be >= 1 (slot {slot} is 0)")]
    InitialWeight { slot: usize },
    #[error("c_inc must be >= 1")]
    Award,
    #[error("c_dec must be >= 1")]
    Payment,
    #[error("semilocal cap w0 = {w0} must equal the initial total {total}")]
    TotalCap { w0: u64, total: u64 },
    #[error("coupling = independent is undefined under the semilocal cap")]
    IndependentCap,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StepError {
    #[error("no players alive")]
    NoPlayersAlive,
    #[error("winner slot {slot} out of range for n = {n}")]
    WinnerSlot { slot: usize, n: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameState {
    pub weights: Vec<u64>,
    pub alive: Vec<bool>,
    pub step: u64,
    pub total: u64,
}

impl GameState {
    pub fn alive_count(&self) -> usize {
        self.alive.iter().filter(|&&a| a).count()
    }
}

/// Validate the configuration and produce the starting state.
pub fn init_game(config: &GameConfig) -> Result<GameState, ConfigError> {
    config.validate()?;
    Ok(GameState {
        weights: config.initial_weights.clone(),
        alive: config.initial_weights.iter().map(|&w| w > 0).collect(),
        step: 0,
        total: config.initial_weights.iter().sum(),
    })
}

fn advance(config: &GameConfig, state: &mut GameState, winner_slot: usize) -> Result<(), StepError> {
    if winner_slot >= config.n {
        return Err(StepError::WinnerSlot { slot: winner_slot, n: config.n });
    }
    if state.alive.iter().all(|&a| !a) {
        return Err(StepError::NoPlayersAlive);
    }
    let winner_was_alive = state.alive[winner_slot];
    let mut total = 0u64;
    for i in 0..config.n {
        if state.alive[i] {
            let pay = state.weights[i].min(config.c_dec);
            state.weights[i] -= pay;
        }
        total += state.weights[i];
    }
    if winner_was_alive {
        let award = match config.rule {
            Rule::Local => config.c_inc,
            Rule::Semilocal => config.c_inc.min(config.w0 - total),
        };
        state.weights[winner_slot] += award;
        total += award;
    }
    for i in 0..config.n {
        if state.alive[i] && state.weights[i] == 0 {
            state.alive[i] = false;
        }
    }
    state.total = total;
    state.step += 1;
    debug_assert!(config.rule != Rule::Semilocal || state.total <= config.w0);
    Ok(())
}

/// Pure deterministic transition: pay, award the drawn slot, clip under the
/// cap, mark bankruptcies, advance the step counter.
pub fn apply_step(
    config: &GameConfig,
    state: &GameState,
    winner_slot: usize,
) -> Result<GameState, StepError> {
    let mut next = state.clone();
    advance(config, &mut next, winner_slot)?;
    Ok(next)
}

fn draw_winner<R: Rng + ?Sized>(config: &GameConfig, state: &GameState, rng: &mut R) -> usize {
    match config.winner_selection {
        WinnerSelection::SlotUniform => rng.gen_range(0..config.n),
        WinnerSelection::AliveUniform => {
            let alive: Vec<usize> = (0..config.n).filter(|&i| state.alive[i]).collect();
            alive[rng.gen_range(0..alive.len())]
        }
    }
}

/// What a run stops on. `FirstBankruptcy` is relative to the number of
/// players alive when the run started.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopCondition {
    FirstBankruptcy,
    OneSurvivor,
    TotalAtMost(u64),
    SomeWeightReaches(u64),
    MaxStepsOnly,
}

impl StopCondition {
    fn is_met(&self, state: &GameState, baseline_alive: usize) -> bool {
        match *self {
            StopCondition::FirstBankruptcy => state.alive_count() < baseline_alive,
            StopCondition::OneSurvivor => state.alive_count() <= 1,
            StopCondition::TotalAtMost(x) => state.total <= x,
            StopCondition::SomeWeightReaches(w) => {
                state.weights.iter().any(|&wt| wt >= w)
            }
            StopCondition::MaxStepsOnly => false,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunResult {
    pub steps: u64,
    pub stopped: bool,
    pub final_state: GameState,
}

/// A game is a config plus its evolving state. Single-owner; replicas each
/// own their engine and random stream.
#[derive(Clone, Debug)]
pub struct Game {
    pub config: GameConfig,
    pub state: GameState,
}

impl Game {
    pub fn new(config: GameConfig) -> Result<Self, ConfigError> {
        let state = init_game(&config)?;
        Ok(Game { config, state })
    }

    pub fn apply_step(&mut self, winner_slot: usize) -> Result<(), StepError> {
        advance(&self.config, &mut self.state, winner_slot)
    }

    /// Draw the winning slot and apply the coupled transition.
    pub fn step_random<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<usize, StepError> {
        if self.state.alive.iter().all(|&a| !a) {
            return Err(StepError::NoPlayersAlive);
        }
        let winner = draw_winner(&self.config, &self.state, rng);
        advance(&self.config, &mut self.state, winner)?;
        Ok(winner)
    }

    /// Every alive player flips its own 1/n coin; the same net update is
    /// applied per player. Local rule only.
    pub fn independent_step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<(), StepError> {
        debug_assert_eq!(self.config.rule, Rule::Local);
        if self.state.alive.iter().all(|&a| !a) {
            return Err(StepError::NoPlayersAlive);
        }
        let p = 1.0 / self.config.n as f64;
        let mut total = 0u64;
        for i in 0..self.config.n {
            if self.state.alive[i] {
                let pay = self.state.weights[i].min(self.config.c_dec);
                self.state.weights[i] -= pay;
                if rng.gen_bool(p) {
                    self.state.weights[i] += self.config.c_inc;
                }
                if self.state.weights[i] == 0 {
                    self.state.alive[i] = false;
                }
            }
            total += self.state.weights[i];
        }
        self.state.total = total;
        self.state.step += 1;
        Ok(())
    }

    /// One step under the configured coupling.
    pub fn advance_random<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<(), StepError> {
        match self.config.coupling {
            Coupling::Coupled => self.step_random(rng).map(|_| ()),
            Coupling::Independent => self.independent_step(rng),
        }
    }

    /// Run until `stop` holds or `max_steps` steps have been taken. The
    /// stop condition is checked before the first step, so an already
    /// satisfied condition reports zero steps.
    pub fn run<R: Rng + ?Sized>(
        &mut self,
        stop: StopCondition,
        max_steps: u64,
        rng: &mut R,
    ) -> Result<RunResult, StepError> {
        let baseline = self.state.alive_count();
        let start = self.state.step;
        loop {
            if stop.is_met(&self.state, baseline) {
                return Ok(RunResult {
                    steps: self.state.step - start,
                    stopped: true,
                    final_state: self.state.clone(),
                });
            }
            if self.state.step - start >= max_steps {
                return Ok(RunResult {
                    steps: max_steps,
                    stopped: false,
                    final_state: self.state.clone(),
                });
            }
            if self.state.alive_count() == 0 {
                // Everyone is bankrupt and the condition did not fire: the
                // state is frozen, so the stop can never hold. Censor.
                return Ok(RunResult {
                    steps: max_steps,
                    stopped: false,
                    final_state: self.state.clone(),
                });
            }
            self.advance_random(rng)?;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn local(weights: Vec<u64>, c_inc: u64) -> GameConfig {
        GameConfig::with_weights(weights, c_inc, Rule::Local)
    }

    #[test]
    fn init_copies_weights() {
        let state = init_game(&local(vec![3, 3], 2)).unwrap();
        assert_eq!(state.weights, vec![3, 3]);
        assert_eq!(state.alive, vec![true, true]);
        assert_eq!(state.step, 0);

        let state = init_game(&GameConfig::semilocal(4, 18, 8)).unwrap();
        assert_eq!(state.total, 72);
    }

    #[test]
    fn init_rejects_bad_configs() {
        let err = init_game(&local(vec![0, 3], 2)).unwrap_err();
        assert_eq!(err, ConfigError::InitialWeight { slot: 0 });
        assert!(err.to_string().contains("initial weight must be >= 1"));

        let err = init_game(&local(vec![3], 2)).unwrap_err();
        assert_eq!(err, ConfigError::PlayerCount { n: 1 });

        let mut cfg = GameConfig::semilocal(2, 5, 2);
        cfg.w0 = 7;
        assert_eq!(init_game(&cfg).unwrap_err(), ConfigError::TotalCap { w0: 7, total: 10 });

        let mut cfg = GameConfig::semilocal(2, 5, 2);
        cfg.coupling = Coupling::Independent;
        assert_eq!(init_game(&cfg).unwrap_err(), ConfigError::IndependentCap);
    }

    #[test]
    fn deterministic_transition() {
        let cfg = local(vec![3, 3], 2);
        let s = init_game(&cfg).unwrap();
        let next = apply_step(&cfg, &s, 0).unwrap();
        assert_eq!(next.weights, vec![4, 2]);
        assert_eq!(next.step, 1);
    }

    #[test]
    fn winner_survives_via_net_update() {
        let cfg = local(vec![1, 5], 3);
        let s = init_game(&cfg).unwrap();
        let next = apply_step(&cfg, &s, 0).unwrap();
        assert_eq!(next.weights, vec![3, 4]);
        assert!(next.alive.iter().all(|&a| a));
    }

    #[test]
    fn semilocal_award_is_clipped() {
        let cfg = GameConfig::semilocal(2, 5, 4);
        let s = init_game(&cfg).unwrap();
        let next = apply_step(&cfg, &s, 0).unwrap();
        assert_eq!(next.weights, vec![6, 4]);
        assert_eq!(next.total, 10);
    }

    #[test]
    fn bankrupt_winner_gets_nothing() {
        let cfg = local(vec![2, 2, 2], 3);
        let mut s = init_game(&cfg).unwrap();
        s.weights = vec![0, 2, 2];
        s.alive = vec![false, true, true];
        s.total = 4;
        let next = apply_step(&cfg, &s, 0).unwrap();
        assert_eq!(next.weights, vec![0, 1, 1]);
    }

    #[test]
    fn apply_step_is_pure() {
        let cfg = local(vec![5, 7, 9], 4);
        let s = init_game(&cfg).unwrap();
        let a = apply_step(&cfg, &s, 2).unwrap();
        let b = apply_step(&cfg, &s, 2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn step_errors() {
        let cfg = local(vec![2, 2], 2);
        let mut s = init_game(&cfg).unwrap();
        assert_eq!(apply_step(&cfg, &s, 5).unwrap_err(), StepError::WinnerSlot { slot: 5, n: 2 });
        s.weights = vec![0, 0];
        s.alive = vec![false, false];
        assert_eq!(apply_step(&cfg, &s, 0).unwrap_err(), StepError::NoPlayersAlive);
    }

    #[test]
    fn expected_one_step_changes_by_enumeration() {
        // Over all n equally likely winner slots: total moves by
        // -k*c_dec + (k/n)*c_inc, one alive player by c_inc/n - c_dec.
        let cfg = local(vec![5, 5, 5, 5], 6);
        let mut s = init_game(&cfg).unwrap();
        s.weights = vec![5, 5, 0, 5];
        s.alive = vec![true, true, false, true];
        s.total = 15;
        let k = 3.0;
        let n = 4.0;
        let mut total_delta = 0.0;
        let mut player0_delta = 0.0;
        for winner in 0..4 {
            let next = apply_step(&cfg, &s, winner).unwrap();
            total_delta += next.total as f64 - s.total as f64;
            player0_delta += next.weights[0] as f64 - s.weights[0] as f64;
        }
        total_delta /= n;
        player0_delta /= n;
        assert!((total_delta - (-k * 1.0 + k / n * 6.0)).abs() < 1e-12);
        assert!((player0_delta - (6.0 / n - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn winner_draw_is_slot_uniform() {
        let cfg = local(vec![10, 10, 10, 10], 4);
        let mut counts = [0u64; 4];
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let draws = 1_000_000;
        for _ in 0..draws {
            let mut g = Game { config: cfg.clone(), state: init_game(&cfg).unwrap() };
            let w = g.step_random(&mut rng).unwrap();
            counts[w] += 1;
        }
        let expected = draws as f64 / 4.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| {
                let d = c as f64 - expected;
                d * d / expected
            })
            .sum();
        // df = 3, alpha = 0.001
        assert!(chi2 < 16.266, "chi2 = {chi2}");
    }

    #[test]
    fn two_alive_of_four_win_half_the_time() {
        let cfg = local(vec![10, 10, 10, 10], 4);
        let mut s = init_game(&cfg).unwrap();
        s.weights = vec![10, 0, 10, 0];
        s.alive = vec![true, false, true, false];
        s.total = 20;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let draws = 200_000;
        let mut alive_wins = 0u64;
        for _ in 0..draws {
            let mut g = Game { config: cfg.clone(), state: s.clone() };
            let w = g.step_random(&mut rng).unwrap();
            if s.alive[w] {
                alive_wins += 1;
            }
        }
        let frac = alive_wins as f64 / draws as f64;
        assert!((frac - 0.5).abs() < 0.005, "frac = {frac}");
    }

    #[test]
    fn fixed_seed_replays_identically() {
        let cfg = local(vec![6, 6, 6], 3);
        let play = || {
            let mut g = Game::new(cfg.clone()).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(99);
            let mut winners = Vec::new();
            for _ in 0..50 {
                winners.push(g.step_random(&mut rng).unwrap());
            }
            (winners, g.state)
        };
        assert_eq!(play(), play());
    }

    #[test]
    fn run_stops_and_censors() {
        let cfg = local(vec![1, 1], 2);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        // Every step bankrupts the non-winner, so one survivor in one step.
        for _ in 0..200 {
            let mut g = Game::new(cfg.clone()).unwrap();
            let r = g.run(StopCondition::OneSurvivor, 1000, &mut rng).unwrap();
            assert!(r.stopped);
            assert_eq!(r.steps, 1);
        }

        let cfg = local(vec![3, 3], 2);
        let mut g = Game::new(cfg.clone()).unwrap();
        let r = g.run(StopCondition::TotalAtMost(6), 1000, &mut rng).unwrap();
        assert!(r.stopped);
        assert_eq!(r.steps, 0);

        let mut g = Game::new(cfg).unwrap();
        let r = g.run(StopCondition::OneSurvivor, 0, &mut rng).unwrap();
        assert!(!r.stopped);
        assert_eq!(r.steps, 0);
    }

    #[test]
    fn unreachable_stop_on_dead_game_censors() {
        // Duel with conserved total 6: weight 8 is only reachable after
        // one survivor holds everything, and the survivor dies first with
        // probability 1/4. Dead games censor at max_steps instead of
        // erroring.
        let cfg = local(vec![3, 3], 2);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut censored = 0u64;
        let trials = 20_000;
        for _ in 0..trials {
            let mut g = Game::new(cfg.clone()).unwrap();
            let r = g.run(StopCondition::SomeWeightReaches(8), 100_000, &mut rng).unwrap();
            if r.stopped {
                assert!(r.final_state.weights.iter().any(|&w| w >= 8));
            } else {
                censored += 1;
                assert_eq!(r.steps, 100_000);
                assert_eq!(r.final_state.alive_count(), 0);
            }
        }
        let frac = censored as f64 / trials as f64;
        assert!((frac - 0.25).abs() < 0.01, "censored fraction {frac}");
    }

    #[test]
    fn independent_mode_lets_everyone_win() {
        let mut cfg = local(vec![5, 5], 3);
        cfg.coupling = Coupling::Independent;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut both = 0u64;
        let trials = 200_000;
        for _ in 0..trials {
            let mut g = Game::new(cfg.clone()).unwrap();
            g.independent_step(&mut rng).unwrap();
            if g.state.weights == vec![7, 7] {
                both += 1;
            }
        }
        let frac = both as f64 / trials as f64;
        assert!((frac - 0.25).abs() < 0.006, "frac = {frac}");
    }

    #[test]
    fn semilocal_total_capped_over_random_run() {
        let cfg = GameConfig::semilocal(4, 12, 8);
        let mut g = Game::new(cfg.clone()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut steps = 0u64;
        while steps < 1_000_000 {
            if g.state.alive_count() == 0 {
                g = Game::new(cfg.clone()).unwrap();
            }
            g.step_random(&mut rng).unwrap();
            assert!(g.state.total <= cfg.w0);
            let recomputed: u64 = g.state.weights.iter().sum();
            assert_eq!(g.state.total, recomputed);
            for i in 0..cfg.n {
                assert_eq!(g.state.alive[i], g.state.weights[i] > 0);
            }
            steps += 1;
        }
    }
}
