//! Command execution. Every artifact this module writes is a pure function
//! of the invocation, including seeds, so repeated runs are byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ruin_lab_core::bounds;
use ruin_lab_core::game::{Coupling, GameConfig, Rule, StopCondition, WinnerSelection};
use ruin_lab_core::mc;
use ruin_lab_core::tail;
use ruin_lab_core::verify;
use ruin_lab_core::walk::{self, UpperWall, WalkSpec, WallKind};
use serde::Serialize;
use serde_json::json;

use crate::args::*;

/// Failures mapped onto the exit-code contract: 2 usage or domain, 3 I/O,
/// 1 a deterministic verification grid reporting violations.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Io(String),
    ChecksFailed(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::ChecksFailed(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Io(m) | Failure::ChecksFailed(m) => m,
        }
    }
}

fn usage<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Usage(e.to_string())
}

fn write_output(path: Option<&Path>, content: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, content)
            .map_err(|e| Failure::Io(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

pub fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Simulate(args) => simulate(args),
        Command::Exact(cmd) => exact(cmd),
        Command::Bounds(cmd) => bounds_cmd(cmd),
        Command::Tail(cmd) => tail_cmd(cmd),
        Command::Verify(cmd) => verify_cmd(cmd),
    }
}

fn build_weights(
    players: Option<usize>,
    weights: &Option<Vec<u64>>,
    initial: Option<u64>,
) -> Result<Vec<u64>, Failure> {
    match (weights, initial) {
        (Some(_), Some(_)) => Err(Failure::Usage(
            "--weights and --initial are mutually exclusive".into(),
        )),
        (Some(w), None) => {
            if let Some(p) = players {
                if p != w.len() {
                    return Err(Failure::Usage(format!(
                        "--players {} disagrees with {} values in --weights",
                        p,
                        w.len()
                    )));
                }
            }
            Ok(w.clone())
        }
        (None, Some(i)) => {
            let p = players.ok_or_else(|| {
                Failure::Usage("--initial needs --players to fix the count".into())
            })?;
            Ok(vec![i; p])
        }
        (None, None) => Err(Failure::Usage(
            "one of --weights or --initial is required".into(),
        )),
    }
}

fn simulate(args: SimulateArgs) -> Result<(), Failure> {
    let weights = build_weights(args.players, &args.weights, args.initial)?;
    let rule = match args.rule {
        RuleArg::Local => Rule::Local,
        RuleArg::Semilocal => Rule::Semilocal,
    };
    let mut config = GameConfig::with_weights(weights, args.c_inc, rule);
    config.c_dec = args.c_dec;
    config.coupling = match args.coupling {
        CouplingArg::Coupled => Coupling::Coupled,
        CouplingArg::Independent => Coupling::Independent,
    };
    config.winner_selection = match args.winner_selection {
        WinnerSelectionArg::SlotUniform => WinnerSelection::SlotUniform,
        WinnerSelectionArg::AliveUniform => WinnerSelection::AliveUniform,
    };
    config.validate().map_err(usage)?;

    let stop_text = args.stop.trim();
    let (stop, quantity) = match stop_text {
        "one-survivor" => (StopCondition::OneSurvivor, "steps_to_one_survivor".to_string()),
        "first-bankruptcy" => (
            StopCondition::FirstBankruptcy,
            "steps_to_first_bankruptcy".to_string(),
        ),
        "total-half" => {
            if !config.w0.is_multiple_of(2) {
                return Err(Failure::Usage(format!(
                    "--stop total-half needs an even starting total, got {}",
                    config.w0
                )));
            }
            (
                StopCondition::TotalAtMost(config.w0 / 2),
                "steps_to_half_total".to_string(),
            )
        }
        other => match other.strip_prefix("reach:") {
            Some(w) => {
                let w: u64 = w
                    .parse()
                    .map_err(|e| Failure::Usage(format!("bad --stop reach target `{w}`: {e}")))?;
                (StopCondition::SomeWeightReaches(w), format!("steps_to_reach_{w}"))
            }
            None => {
                return Err(Failure::Usage(format!(
                    "--stop must be one-survivor, first-bankruptcy, total-half or reach:W, got `{other}`"
                )))
            }
        },
    };

    let (est, records) = mc::estimate_stop_time_traced(
        &config,
        stop,
        args.replicas,
        args.seed,
        args.max_steps,
        args.ci_level,
    )
    .map_err(usage)?;

    let mut csv = String::from("quantity,mean,stderr,ci_low,ci_high,replicas,censored,seed\n");
    writeln!(
        csv,
        "{},{},{},{},{},{},{},{}",
        quantity, est.mean, est.stderr, est.ci_low, est.ci_high, est.replicas, est.censored,
        est.seed
    )
    .unwrap();
    write_output(args.out.as_deref(), &csv)?;

    if let Some(trace_path) = &args.trace {
        let mut trace = String::from("replica,steps,stopped,final_alive,final_total\n");
        for r in &records {
            writeln!(
                trace,
                "{},{},{},{},{}",
                r.replica, r.steps, r.stopped, r.final_alive, r.final_total
            )
            .unwrap();
        }
        write_output(Some(trace_path), &trace)?;
    }
    Ok(())
}

fn build_walk(args: &WalkArgs) -> Result<(String, WalkSpec), Failure> {
    if let Some(model) = args.model {
        let n = args.n.ok_or_else(|| Failure::Usage("--model needs --n".into()))?;
        let w0 = args.w0.ok_or_else(|| Failure::Usage("--model needs --w0".into()))?;
        let c_inc = args.c_inc.ok_or_else(|| Failure::Usage("--model needs --c-inc".into()))?;
        let mut spec = match model {
            WalkModelArg::Poorest => {
                let k = args.k.ok_or_else(|| Failure::Usage("--model poorest needs --k".into()))?;
                walk::poorest_walk(n, w0, k, c_inc).map_err(usage)?
            }
            WalkModelArg::Total => {
                let k = args.k.ok_or_else(|| Failure::Usage("--model total needs --k".into()))?;
                walk::total_walk(n, w0, k, c_inc).map_err(usage)?
            }
            WalkModelArg::TotalHalved => walk::total_walk_halved(n, w0, c_inc).map_err(usage)?,
        };
        if let Some(start) = args.start {
            spec.start = start;
        }
        spec.validate().map_err(usage)?;
        let name = match model {
            WalkModelArg::Poorest => "poorest",
            WalkModelArg::Total => "total",
            WalkModelArg::TotalHalved => "total-halved",
        };
        Ok((name.to_string(), spec))
    } else {
        let missing = |flag: &str| Failure::Usage(format!("custom walk needs {flag}"));
        let spec = WalkSpec {
            up_step: args.up_step.ok_or_else(|| missing("--up-step"))?,
            up_prob: args.up_prob.ok_or_else(|| missing("--up-prob"))?,
            down_step: args.down_step.unwrap_or(1),
            start: args.start.ok_or_else(|| missing("--start"))?,
            wall: UpperWall {
                position: args.wall.ok_or_else(|| missing("--wall"))?,
                kind: match args.wall_kind.ok_or_else(|| missing("--wall-kind"))? {
                    WallKindArg::Absorbing => WallKind::Absorbing,
                    WallKindArg::Reflecting => WallKind::Reflecting,
                    WallKindArg::SwapReflecting => WallKind::SwapReflecting,
                },
            },
            note: None,
        };
        spec.validate().map_err(usage)?;
        Ok(("custom".to_string(), spec))
    }
}

fn exact(cmd: ExactCmd) -> Result<(), Failure> {
    match cmd {
        ExactCmd::HitProb(args) => {
            let (model, spec) = build_walk(&args)?;
            let result = walk::exact_hit_probability(&spec).map_err(usage)?;
            let report = json!({ "model": model, "inputs": spec, "result": result });
            write_output(args.out.as_deref(), &to_json(&report))
        }
        ExactCmd::AbsorbTime(args) => {
            let (model, spec) = build_walk(&args)?;
            let result = walk::exact_expected_absorption(&spec).map_err(usage)?;
            let report = json!({ "model": model, "inputs": spec, "result": result });
            write_output(args.out.as_deref(), &to_json(&report))
        }
        ExactCmd::FirstPassage(args) => {
            let (model, spec) = build_walk(&args.walk)?;
            let e = walk::solve_e_recurrence(&spec).map_err(usage)?;
            if args.to >= args.from || args.from > spec.wall.position {
                return Err(Failure::Usage(format!(
                    "need to < from <= wall, got from {} to {} wall {}",
                    args.from, args.to, spec.wall.position
                )));
            }
            let result = e.passage(args.from, args.to);
            // For the named total walks the closed-form lower bound on the
            // same passage is printed alongside.
            let companion = match (model.as_str(), args.walk.n, args.walk.w0, args.walk.c_inc) {
                ("total-halved", Some(n), Some(w0), Some(c_inc)) if n > 2 => {
                    bounds::st2_lower(2 * args.from, 2 * args.to, n, w0, c_inc).ok().map(|b| {
                        json!({
                            "lower_bound": b.value,
                            "conditions_met": b.conditions_met,
                            "dominates": result >= b.value.value(),
                        })
                    })
                }
                _ => None,
            };
            let report = json!({
                "model": model,
                "inputs": spec,
                "from": args.from,
                "to": args.to,
                "result": result,
                "residual": e.residual,
                "companion_bound": companion,
            });
            write_output(args.walk.out.as_deref(), &to_json(&report))
        }
        ExactCmd::EVector(args) => {
            let (model, spec) = build_walk(&args)?;
            let e = walk::solve_e_recurrence(&spec).map_err(usage)?;
            let report = json!({
                "model": model,
                "inputs": spec,
                "result": { "e": e.e, "passage_start_to_zero": e.passage(spec.start, 0) },
                "residual": e.residual,
            });
            write_output(args.out.as_deref(), &to_json(&report))
        }
    }
}

fn bounds_cmd(cmd: BoundsCmd) -> Result<(), Failure> {
    match cmd {
        BoundsCmd::Ruin(a) => {
            let report = bounds::ruin_report(a.initial, a.target, a.n).map_err(usage)?;
            write_output(a.out.as_deref(), &to_json(&report))
        }
        BoundsCmd::Pstar(a) => {
            let report = bounds::pstar_report(a.initial, a.w1, a.w2, a.n).map_err(usage)?;
            write_output(a.out.as_deref(), &to_json(&report))
        }
        BoundsCmd::Drift(a) => {
            let report = bounds::drift_report(a.t, a.n, a.c_inc, a.c_dec);
            write_output(a.out.as_deref(), &to_json(&report))
        }
        BoundsCmd::Sp(a) => {
            let report = bounds::sp_report(a.k, a.n, a.w0).map_err(usage)?;
            write_output(a.out.as_deref(), &to_json(&report))
        }
        BoundsCmd::St2(a) => {
            let report = bounds::st2_report(a.x, a.y, a.n, a.w0, a.c_inc).map_err(usage)?;
            write_output(a.out.as_deref(), &to_json(&report))
        }
        BoundsCmd::Semilocal(a) => {
            let report = bounds::semilocal_bound_report(a.n, a.initial, a.c_inc).map_err(usage)?;
            write_output(a.out.as_deref(), &to_json(&report))
        }
    }
}

fn tail_cmd(cmd: TailCmd) -> Result<(), Failure> {
    match cmd {
        TailCmd::Check(a) => {
            let alpha = a.alpha.unwrap_or_else(tail::default_alpha);
            let result = tail::anticb_check(a.t, a.n, alpha).map_err(usage)?;
            write_output(a.out.as_deref(), &to_json(&result))
        }
        TailCmd::Region(a) => {
            let alpha = a.alpha.unwrap_or_else(tail::default_alpha);
            let table = tail::anticb_region(a.t_max, a.n_max, alpha).map_err(usage)?;
            write_output(a.out.as_deref(), &table.to_csv())
        }
    }
}

fn verify_cmd(cmd: VerifyCmd) -> Result<(), Failure> {
    match cmd {
        VerifyCmd::EffRec(a) => {
            let weights = build_weights(a.players, &a.weights, a.initial)?;
            let mut config = GameConfig::with_weights(weights, a.c_inc, Rule::Local);
            config.c_dec = a.c_dec;
            config.validate().map_err(usage)?;
            let report =
                mc::verify_eff_rec(&config, a.replicas, a.seed, a.max_steps, a.ci_level)
                    .map_err(usage)?;
            // Stochastic verdicts never touch the exit code.
            write_output(a.out.as_deref(), &to_json(&report))
        }
        VerifyCmd::FactA(a) => {
            let ns = parse_usize_grid(&a.n)?;
            let targets = parse_grid(&a.target).map_err(Failure::Usage)?;
            let report = verify::check_fact_a(&ns, &targets).map_err(usage)?;
            let all_pass = report.all_pass;
            write_output(a.out.as_deref(), &to_json(&report))?;
            deterministic_verdict(all_pass, "fact-a")
        }
        VerifyCmd::LemmaA1(a) => {
            let ns = parse_usize_grid(&a.n)?;
            let w0s = parse_grid(&a.w0).map_err(Failure::Usage)?;
            let c_incs = match &a.c_inc {
                Some(text) => Some(parse_grid(text).map_err(Failure::Usage)?),
                None => None,
            };
            let report = verify::check_lemma_a1(&ns, &w0s, c_incs.as_deref()).map_err(usage)?;
            let all_pass = report.all_pass;
            write_output(a.out.as_deref(), &to_json(&report))?;
            deterministic_verdict(all_pass, "lemma-a1")
        }
        VerifyCmd::LemmaA2(a) => {
            let ns = parse_usize_grid(&a.n)?;
            let w0s = parse_grid(&a.w0).map_err(Failure::Usage)?;
            let report = verify::check_lemma_a2(&ns, &w0s, a.c_inc).map_err(usage)?;
            let all_pass = report.all_pass;
            write_output(a.out.as_deref(), &to_json(&report))?;
            deterministic_verdict(all_pass, "lemma-a2")
        }
        VerifyCmd::Pstar(a) => {
            let grid = verify::default_pstar_grid();
            let report = verify::check_pstar(&grid, a.replicas, a.seed, a.horizon, a.ci_level)
                .map_err(usage)?;
            write_output(a.out.as_deref(), &to_json(&report))
        }
    }
}

fn parse_usize_grid(text: &str) -> Result<Vec<usize>, Failure> {
    Ok(parse_grid(text)
        .map_err(Failure::Usage)?
        .into_iter()
        .map(|v| v as usize)
        .collect())
}

fn deterministic_verdict(all_pass: bool, what: &str) -> Result<(), Failure> {
    if all_pass {
        Ok(())
    } else {
        Err(Failure::ChecksFailed(format!("{what}: some cells violated the bound")))
    }
}

/// Load a JSON experiment spec.
pub fn load_config(path: &PathBuf) -> Result<Command, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::Usage(format!("bad experiment spec {}: {e}", path.display())))
}
