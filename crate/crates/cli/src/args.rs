//! Command-line surface. Every subcommand's parameter record derives both
//! the clap parser and serde, so a JSON experiment file round-trips to the
//! exact flag invocation (`--config PATH` replaces the subcommand).

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug)]
#[command(
    name = "ruin-lab",
    version,
    about = "Weight-transfer game laboratory: simulations, exact walk solvers, bound calculators"
)]
pub struct Cli {
    /// JSON experiment spec; replaces the subcommand and its flags.
    #[arg(long, value_name = "PATH", global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Monte Carlo stop-time estimate of the game, emitted as CSV.
    Simulate(SimulateArgs),
    /// Exact walk quantities by linear solve or recurrence, as JSON.
    #[command(subcommand)]
    Exact(ExactCmd),
    /// Closed-form bound reports, as JSON.
    #[command(subcommand)]
    Bounds(BoundsCmd),
    /// Exact binomial tail checks, as JSON or CSV.
    #[command(subcommand)]
    Tail(TailCmd),
    /// Grid verdicts pairing solvers, bounds and simulation.
    #[command(subcommand)]
    Verify(VerifyCmd),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleArg {
    Local,
    Semilocal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingArg {
    Coupled,
    Independent,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WinnerSelectionArg {
    SlotUniform,
    AliveUniform,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct SimulateArgs {
    /// Player count; inferred from --weights when omitted.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub players: Option<usize>,
    /// Explicit starting weights, comma separated.
    #[arg(long, value_delimiter = ',')]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<u64>>,
    /// Equal starting weight for all players (needs --players).
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<u64>,
    #[arg(long = "c-inc")]
    pub c_inc: u64,
    #[arg(long = "c-dec", default_value_t = 1)]
    #[serde(default = "one")]
    pub c_dec: u64,
    #[arg(long, value_enum, default_value = "local")]
    #[serde(default = "default_rule")]
    pub rule: RuleArg,
    #[arg(long, value_enum, default_value = "coupled")]
    #[serde(default = "default_coupling")]
    pub coupling: CouplingArg,
    #[arg(long = "winner-selection", value_enum, default_value = "slot-uniform")]
    #[serde(default = "default_winner_selection")]
    pub winner_selection: WinnerSelectionArg,
    /// one-survivor | first-bankruptcy | total-half | reach:W
    #[arg(long)]
    pub stop: String,
    #[arg(long, default_value_t = 10_000)]
    #[serde(default = "default_replicas")]
    pub replicas: u64,
    #[arg(long, default_value_t = 0)]
    #[serde(default)]
    pub seed: u64,
    #[arg(long = "max-steps", default_value_t = 1_000_000)]
    #[serde(default = "default_max_steps")]
    pub max_steps: u64,
    #[arg(long = "ci-level", default_value_t = 0.99)]
    #[serde(default = "default_ci_level")]
    pub ci_level: f64,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Also write one CSV record per replica to this path.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<PathBuf>,
}

fn one() -> u64 {
    1
}
fn default_rule() -> RuleArg {
    RuleArg::Local
}
fn default_coupling() -> CouplingArg {
    CouplingArg::Coupled
}
fn default_winner_selection() -> WinnerSelectionArg {
    WinnerSelectionArg::SlotUniform
}
fn default_replicas() -> u64 {
    10_000
}
fn default_max_steps() -> u64 {
    1_000_000
}
fn default_ci_level() -> f64 {
    0.99
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WallKindArg {
    Absorbing,
    Reflecting,
    SwapReflecting,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WalkModelArg {
    /// Poorest-player walk: swap-reflecting cap at w0/k.
    Poorest,
    /// Total-weight walk of k players: reflecting cap at w0.
    Total,
    /// Two-player total walk with halved parameters.
    TotalHalved,
}

/// A walk given either as an explicit spec or as a named game reduction.
#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct WalkArgs {
    #[arg(long, value_enum)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<WalkModelArg>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w0: Option<u64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[arg(long = "c-inc")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_inc: Option<u64>,
    #[arg(long = "up-step")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub up_step: Option<u64>,
    #[arg(long = "up-prob")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub up_prob: Option<f64>,
    #[arg(long = "down-step")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub down_step: Option<u64>,
    /// Start position; models default to their cap.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<u64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall: Option<u64>,
    #[arg(long = "wall-kind", value_enum)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_kind: Option<WallKindArg>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct FirstPassageArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub walk: WalkArgs,
    #[arg(long)]
    pub from: u64,
    #[arg(long)]
    pub to: u64,
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "target", rename_all = "kebab-case")]
pub enum ExactCmd {
    /// Probability of reaching the absorbing upper wall before 0.
    HitProb(WalkArgs),
    /// Expected steps until absorption.
    AbsorbTime(WalkArgs),
    /// Expected first-passage time between two positions.
    FirstPassage(FirstPassageArgs),
    /// Single-step-down passage times e_x with the recurrence residual.
    EVector(WalkArgs),
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "target", rename_all = "kebab-case")]
pub enum BoundsCmd {
    /// Sandwich i/(w+n) <= P <= i/w for the one-player reach probability.
    Ruin(RuinArgs),
    /// Upper bound on {some player reaches w1, fewer than two reach w2}.
    Pstar(PstarArgs),
    /// Expected one-player gain t*(c_inc/n - c_dec).
    Drift(DriftArgs),
    /// Upper bounds on steps to the next bankruptcy among k players.
    Sp(SpArgs),
    /// Lower bound on the two-player total passage time.
    St2(St2Args),
    /// Both chain bounds of the capped-game separation, with conditions.
    Semilocal(SemilocalArgs),
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct RuinArgs {
    #[arg(long)]
    pub initial: u64,
    #[arg(long)]
    pub target: u64,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct PstarArgs {
    #[arg(long)]
    pub initial: u64,
    #[arg(long)]
    pub w1: u64,
    #[arg(long)]
    pub w2: u64,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct DriftArgs {
    #[arg(long)]
    pub t: u64,
    #[arg(long)]
    pub n: usize,
    #[arg(long = "c-inc")]
    pub c_inc: u64,
    #[arg(long = "c-dec", default_value_t = 1)]
    #[serde(default = "one")]
    pub c_dec: u64,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct SpArgs {
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub w0: u64,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct St2Args {
    #[arg(long)]
    pub x: u64,
    #[arg(long)]
    pub y: u64,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub w0: u64,
    #[arg(long = "c-inc")]
    pub c_inc: u64,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct SemilocalArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub initial: u64,
    #[arg(long = "c-inc")]
    pub c_inc: u64,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "target", rename_all = "kebab-case")]
pub enum TailCmd {
    /// Exact tail probability at one (t, n) with the 1/3 verdict.
    Check(TailCheckArgs),
    /// Verdict map over t in [1, t-max], n in [2, n-max], as CSV.
    Region(TailRegionArgs),
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct TailCheckArgs {
    #[arg(long)]
    pub t: u64,
    #[arg(long)]
    pub n: u64,
    /// Defaults to sqrt(pi/12).
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct TailRegionArgs {
    #[arg(long = "t-max")]
    pub t_max: u64,
    #[arg(long = "n-max")]
    pub n_max: u64,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "target", rename_all = "kebab-case")]
pub enum VerifyCmd {
    /// Replay games and check the first-bankruptcy decomposition.
    EffRec(EffRecArgs),
    /// Sandwich check on a (n, target) grid of exact solves.
    FactA(FactAArgs),
    /// Poorest-walk geometric bound and product-form domination grid.
    LemmaA1(LemmaA1Args),
    /// Halved-total-walk lower bound domination grid.
    LemmaA2(LemmaA2Args),
    /// Independent-mode event estimates against their upper bounds.
    Pstar(VerifyPstarArgs),
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct EffRecArgs {
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub players: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<u64>>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<u64>,
    #[arg(long = "c-inc")]
    pub c_inc: u64,
    #[arg(long = "c-dec", default_value_t = 1)]
    #[serde(default = "one")]
    pub c_dec: u64,
    #[arg(long, default_value_t = 10_000)]
    #[serde(default = "default_replicas")]
    pub replicas: u64,
    #[arg(long, default_value_t = 0)]
    #[serde(default)]
    pub seed: u64,
    #[arg(long = "max-steps", default_value_t = 1_000_000)]
    #[serde(default = "default_max_steps")]
    pub max_steps: u64,
    #[arg(long = "ci-level", default_value_t = 0.99)]
    #[serde(default = "default_ci_level")]
    pub ci_level: f64,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct FactAArgs {
    /// Player counts, e.g. `2:6` or `2,4,6`.
    #[arg(long, default_value = "2:6")]
    #[serde(default = "default_fact_a_n")]
    pub n: String,
    /// Targets, e.g. `5,10,20`.
    #[arg(long, default_value = "5,10,20")]
    #[serde(default = "default_fact_a_target")]
    pub target: String,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

fn default_fact_a_n() -> String {
    "2:6".into()
}
fn default_fact_a_target() -> String {
    "5,10,20".into()
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct LemmaA1Args {
    #[arg(long, default_value = "3:6")]
    #[serde(default = "default_a1_n")]
    pub n: String,
    #[arg(long, default_value = "6:60:6")]
    #[serde(default = "default_a1_w0")]
    pub w0: String,
    /// Award list; defaults to {2, n, 2n, 4n} per n.
    #[arg(long = "c-inc")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_inc: Option<String>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

fn default_a1_n() -> String {
    "3:6".into()
}
fn default_a1_w0() -> String {
    "6:60:6".into()
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct LemmaA2Args {
    #[arg(long, default_value = "4,6")]
    #[serde(default = "default_a2_n")]
    pub n: String,
    #[arg(long, default_value = "8:40:4")]
    #[serde(default = "default_a2_w0")]
    pub w0: String,
    /// Award; defaults to 2n per n.
    #[arg(long = "c-inc")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_inc: Option<u64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

fn default_a2_n() -> String {
    "4,6".into()
}
fn default_a2_w0() -> String {
    "8:40:4".into()
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct VerifyPstarArgs {
    #[arg(long, default_value_t = 4000)]
    #[serde(default = "default_pstar_replicas")]
    pub replicas: u64,
    #[arg(long, default_value_t = 0)]
    #[serde(default)]
    pub seed: u64,
    #[arg(long, default_value_t = 1_000_000)]
    #[serde(default = "default_max_steps")]
    pub horizon: u64,
    #[arg(long = "ci-level", default_value_t = 0.99)]
    #[serde(default = "default_ci_level")]
    pub ci_level: f64,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

fn default_pstar_replicas() -> u64 {
    4000
}

/// Parse `a`, `a,b,c`, `a:b`, or `a:b:step` into a list.
pub fn parse_grid(text: &str) -> Result<Vec<u64>, String> {
    let text = text.trim();
    if text.is_empty() {
        return Err("empty grid expression".into());
    }
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() > 3 {
            return Err(format!("bad grid range `{text}`"));
        }
        let nums: Vec<u64> = parts
            .iter()
            .map(|p| p.trim().parse::<u64>().map_err(|e| format!("bad number `{p}`: {e}")))
            .collect::<Result<_, _>>()?;
        let (lo, hi) = (nums[0], nums[1]);
        let step = if nums.len() == 3 { nums[2] } else { 1 };
        if step == 0 || hi < lo {
            return Err(format!("bad grid range `{text}`"));
        }
        Ok((lo..=hi).step_by(step as usize).collect())
    } else {
        text.split(',')
            .map(|p| p.trim().parse::<u64>().map_err(|e| format!("bad number `{p}`: {e}")))
            .collect()
    }
}
