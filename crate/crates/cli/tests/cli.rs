//! End-to-end checks of the binary: flags, exit codes, output shapes.

use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ruin-lab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_str(&stdout(out)).expect("valid JSON on stdout")
}

#[test]
fn simulate_known_duration() {
    let out = run(&[
        "simulate", "--players", "2", "--initial", "3", "--c-inc", "2", "--stop", "one-survivor",
        "--replicas", "20000", "--seed", "7",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "quantity,mean,stderr,ci_low,ci_high,replicas,censored,seed"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "steps_to_one_survivor");
    let mean: f64 = row[1].parse().unwrap();
    let se: f64 = row[2].parse().unwrap();
    assert!((mean - 9.0).abs() < 3.0 * se, "mean {mean} se {se}");
    assert_eq!(row[5], "20000");
}

#[test]
fn simulate_flag_validation() {
    let out = run(&["simulate", "--players", "2", "--c-inc", "2", "--stop", "one-survivor"]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("--weights") && err.contains("--initial"), "{err}");

    let out = run(&[
        "simulate", "--players", "2", "--initial", "3", "--weights", "3,3", "--c-inc", "2",
        "--stop", "one-survivor",
    ]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&[
        "simulate", "--players", "2", "--initial", "3", "--c-inc", "2", "--stop", "sideways",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--stop"));

    // Odd total cannot halve.
    let out = run(&[
        "simulate", "--players", "3", "--weights", "3,2,2", "--c-inc", "3", "--stop", "total-half",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("even"));

    let out = run(&[
        "simulate", "--players", "2", "--initial", "3", "--c-inc", "2", "--stop", "reach:8",
        "--replicas", "200", "--seed", "2", "--max-steps", "50000",
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("steps_to_reach_8"));

    let out = run(&[
        "simulate", "--players", "2", "--initial", "3", "--c-inc", "2", "--stop", "reach:x",
    ]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["simulate", "--players", "1", "--initial", "3", "--c-inc", "2", "--stop", "one-survivor"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exact_commands() {
    let out = run(&[
        "exact", "hit-prob", "--up-step", "1", "--up-prob", "0.5", "--start", "3", "--wall", "10",
        "--wall-kind", "absorbing",
    ]);
    assert!(out.status.success());
    let v = json(&out);
    assert!((v["result"].as_f64().unwrap() - 0.3).abs() < 1e-10);

    let out = run(&[
        "exact", "e-vector", "--model", "poorest", "--n", "2", "--w0", "8", "--k", "2", "--c-inc",
        "2",
    ]);
    assert!(out.status.success());
    let v = json(&out);
    assert!(v["residual"].as_f64().unwrap() < 1e-9);
    assert_eq!(v["inputs"]["wall"]["kind"], "swap_reflecting");
    assert_eq!(v["result"]["passage_start_to_zero"].as_f64().unwrap(), 13.0);

    let out = run(&[
        "exact", "first-passage", "--model", "total-halved", "--n", "4", "--w0", "72", "--c-inc",
        "8", "--from", "36", "--to", "18",
    ]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["result"].as_f64().unwrap(), 187_406.0);
    assert!(v["companion_bound"]["lower_bound"]["value"].as_f64().unwrap() > 0.0);

    // Degenerate walk: award equals the joint payment.
    let out = run(&[
        "exact", "absorb-time", "--model", "total", "--n", "4", "--w0", "16", "--k", "4",
        "--c-inc", "4",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("degenerate"));
}

#[test]
fn bounds_commands() {
    let out = run(&["bounds", "ruin", "--initial", "2", "--target", "4", "--n", "3"]);
    assert!(out.status.success());
    let v = json(&out);
    assert!((v["lower"]["value"].as_f64().unwrap() - 2.0 / 7.0).abs() < 1e-12);
    assert!((v["upper"]["value"].as_f64().unwrap() - 0.5).abs() < 1e-12);

    let out = run(&[
        "bounds", "semilocal", "--n", "4", "--initial", "30", "--c-inc", "8",
    ]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["conditions_met"], true);

    let out = run(&[
        "bounds", "st2", "--x", "10", "--y", "5", "--n", "2", "--w0", "16", "--c-inc", "8",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("n - 2"));

    let out = run(&["bounds", "drift", "--t", "100", "--n", "4", "--c-inc", "8"]);
    assert!(out.status.success());
    assert_eq!(json(&out)["inputs"]["expected_gain"].as_f64().unwrap(), 100.0);
}

#[test]
fn tail_commands() {
    let out = run(&["tail", "check", "--t", "5", "--n", "5"]);
    assert!(out.status.success());
    let v = json(&out);
    assert!((v["prob"].as_f64().unwrap() - 0.32768).abs() < 1e-12);
    assert_eq!(v["holds"], false);

    let out = run(&["tail", "check", "--t", "2", "--n", "2"]);
    assert!((json(&out)["prob"].as_f64().unwrap() - 0.25).abs() < 1e-12);

    let out = run(&["tail", "region", "--t-max", "100", "--n-max", "20"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 1901);
    assert!(text.starts_with("t,n,threshold,s_max,prob,holds\n"));

    let out = run(&["tail", "region", "--t-max", "1000000", "--n-max", "100"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_commands() {
    let out = run(&["verify", "fact-a", "--n", "2:4", "--target", "5,8"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(json(&out)["all_pass"], true);

    let out = run(&[
        "verify", "lemma-a2", "--n", "4", "--w0", "8:24:4",
    ]);
    assert!(out.status.success());
    assert_eq!(json(&out)["all_pass"], true);

    let out = run(&[
        "verify", "eff-rec", "--players", "2", "--initial", "3", "--c-inc", "2", "--replicas",
        "2000", "--seed", "1",
    ]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["verdict"], "holds");
    assert_eq!(v["lhs"]["mean"], v["t_one"]["mean"]);

    // Deep passages where the closed-form lower bound genuinely overtakes
    // the exact value: the deterministic grid reports it and exits 1.
    let out = run(&["verify", "lemma-a2", "--n", "4", "--w0", "72"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["all_pass"], false);
}

#[test]
fn missing_subcommand_is_usage_error() {
    let out = run(&[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unwritable_output_is_io_error() {
    let out = run(&[
        "bounds", "ruin", "--initial", "2", "--target", "4", "--n", "3", "--out",
        "/nonexistent-dir/report.json",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("cannot write"));
}
