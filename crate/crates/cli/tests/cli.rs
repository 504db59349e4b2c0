//! End-to-end runs of the installed binary: exit codes, output shapes,
//! stdin handling, and flag spellings.

use std::io::Write;
use std::process::{Command, Output, Stdio};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kat-horn"))
}

fn data(name: &str) -> String {
    format!("{}/tests/data/{}", env!("CARGO_MANIFEST_DIR"), name)
}

fn run_stdin(args: &[&str], input: &str) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.as_mut().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[test]
fn check_valid_formula_exits_zero() {
    let out = bin()
        .args(["check", "--normalize-postguards", &data("while_idempotent.kat")])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(stdout(&out).starts_with("valid\n"));
}

#[test]
fn normalize_pbp_alias_is_accepted() {
    let out = bin()
        .args(["check", "--normalize-pbp", &data("while_idempotent.kat")])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
}

#[test]
fn check_invalid_equation_exits_one_with_witness() {
    let out = bin().args(["check", &data("square.kat")]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.starts_with("invalid\n"));
    assert!(text.contains("witness word:"), "{text}");
}

#[test]
fn check_handles_valid_star_identities() {
    let out = bin().args(["check", &data("denesting.kat")]).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
}

#[test]
fn eliminate_exits_zero_and_its_output_reparses() {
    let out = bin().args(["eliminate", &data("zero_sum.kat")]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    // Pull the indented formula block back out and feed it to check.
    let mut formula = String::new();
    let mut in_block = false;
    for line in text.lines() {
        if line == "formula:" {
            in_block = true;
        } else if let Some(rest) = line.strip_prefix("  ") {
            if in_block {
                formula.push_str(rest);
                formula.push('\n');
            }
        } else {
            in_block = false;
        }
    }
    assert!(formula.contains("show"), "no formula block in: {text}");
    let out = run_stdin(&["check", "-"], &formula);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
}

#[test]
fn json_report_is_well_formed() {
    let out = bin().args(["check", "--json", &data("square.kat")]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["command"], "check");
    assert_eq!(v["verdict"]["kind"], "invalid");
    assert_eq!(v["verdict"]["witness"]["type"], "word");
    assert!(v["elapsed_ms"].is_u64());
}

#[test]
fn oracle_reports_countermodel_with_base() {
    let out = bin().args(["oracle", &data("square.kat")]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("countermodel: base"));
}

#[test]
fn prove_settles_simple_inclusions() {
    let out = run_stdin(&["prove", "-"], "program p q\nshow p;q <= p;q + q;p\n");
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let out = run_stdin(&["prove", "-"], "program p q\nshow p <= q\n");
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("countermodel"));
}

#[test]
fn dot_flag_emits_refutation_automaton() {
    let out = run_stdin(&["prove", "--dot", "-"], "program p q\nshow p <= q\n");
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("digraph"));
}

#[test]
fn parse_errors_exit_three_with_position() {
    let out = bin().args(["check", &data("bad_syntax.kat")]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    let err = stderr(&out);
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn missing_file_exits_three() {
    let out = bin().args(["check", "no_such_file.kat"]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn bad_seed_env_exits_three() {
    let out = bin()
        .args(["oracle", &data("square.kat")])
        .env("KAT_HORN_SEED", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("KAT_HORN_SEED"));
}

#[test]
fn seed_env_changes_nothing_about_verdicts() {
    let a = bin()
        .args(["oracle", "--json", &data("square.kat")])
        .env("KAT_HORN_SEED", "7")
        .output()
        .unwrap();
    let b = bin()
        .args(["oracle", "--json", &data("square.kat")])
        .env("KAT_HORN_SEED", "8")
        .output()
        .unwrap();
    let va: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    let vb: serde_json::Value = serde_json::from_str(&stdout(&b)).unwrap();
    assert_eq!(va["verdict"]["kind"], "invalid");
    assert_eq!(vb["verdict"]["kind"], "invalid");
}
