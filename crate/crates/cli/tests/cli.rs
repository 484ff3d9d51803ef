//! End-to-end smoke tests that drive the compiled `puflab` binary: every
//! subcommand, the config-file/flag override order, the documented exit
//! codes, and byte-level determinism of generated artifacts.

use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn puflab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_puflab"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("failed to spawn puflab")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn assert_exit(output: &Output, expected: i32) {
    assert_eq!(
        output.status.code(),
        Some(expected),
        "exit code mismatch\nstdout:\n{}\nstderr:\n{}",
        stdout(output),
        stderr(output)
    );
}

#[test]
fn help_exits_zero() {
    let dir = TempDir::new().unwrap();
    let out = puflab(dir.path(), &["--help"]);
    assert_exit(&out, 0);
    assert!(stdout(&out).contains("reproduce"));
}

#[test]
fn unknown_reproduce_target_exits_one() {
    let dir = TempDir::new().unwrap();
    let out = puflab(dir.path(), &["reproduce", "nosuch"]);
    assert_exit(&out, 1);
    assert!(stderr(&out).contains("nosuch"));
}

#[test]
fn malformed_config_reports_path_and_line() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("bad.cfg"), "n=16\nreplicas=2\nnonsense\n").unwrap();
    let out = puflab(dir.path(), &["run", "broken", "--config", "bad.cfg"]);
    assert_exit(&out, 1);
    let err = stderr(&out);
    assert!(err.contains("bad.cfg:3:"), "missing path:line in {err:?}");
}

#[test]
fn gen_random_writes_deterministic_challenge_file() {
    let dir = TempDir::new().unwrap();
    let args = |out: &str| {
        [
            "gen", "random", "--n", "16", "--count", "10", "--seed", "7", "--out", out,
        ]
        .map(String::from)
    };
    let first = puflab(dir.path(), &args("a.txt").each_ref().map(String::as_str));
    assert_exit(&first, 0);
    let second = puflab(dir.path(), &args("b.txt").each_ref().map(String::as_str));
    assert_exit(&second, 0);

    let a = std::fs::read(dir.path().join("a.txt")).unwrap();
    let b = std::fs::read(dir.path().join("b.txt")).unwrap();
    assert_eq!(a, b, "same seed must produce byte-identical files");

    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# n=16"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 10);
    for row in rows {
        let tokens: Vec<&str> = row.split_whitespace().collect();
        assert_eq!(tokens.len(), 17, "n stage coordinates plus the fixed +1");
        assert_eq!(*tokens.last().unwrap(), "+1");
        assert!(tokens.iter().all(|t| *t == "+1" || *t == "-1"));
    }
}

#[test]
fn gen_hadamard_first_row_is_all_ones() {
    let dir = TempDir::new().unwrap();
    let out = puflab(
        dir.path(),
        &["gen", "hadamard", "--n", "8", "--out", "h.txt"],
    );
    assert_exit(&out, 0);
    let text = std::fs::read_to_string(dir.path().join("h.txt")).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 8, "full set defaults to n rows");
    assert!(rows[0].split_whitespace().all(|t| t == "+1"));
}

#[test]
fn run_applies_config_then_flag_overrides() {
    let dir = TempDir::new().unwrap();
    std::fs::write(
        dir.path().join("smoke.cfg"),
        "# small active run\nn=16\nmode=active\ninitial=20\ncheckpoints=30,60\nreplicas=2\neval_size=400\n",
    )
    .unwrap();
    let args = ["run", "smoke", "--config", "smoke.cfg", "--replicas", "3"];
    let first = puflab(dir.path(), &args);
    assert_exit(&first, 0);
    assert!(
        stdout(&first).contains("replicas=3"),
        "flag must override config"
    );

    let trace = std::fs::read_to_string(dir.path().join("out/smoke_trace.csv")).unwrap();
    let lines: Vec<&str> = trace.lines().collect();
    assert_eq!(
        lines[0],
        "replica,crp_count,k,learner,noise_p,test_accuracy"
    );
    assert_eq!(lines.len(), 1 + 3 * 2, "header plus replicas x checkpoints");

    let summary = std::fs::read_to_string(dir.path().join("out/smoke_summary.csv")).unwrap();
    assert!(summary.starts_with("crp_count,mean_accuracy,std_error\n"));
    assert_eq!(summary.lines().count(), 1 + 2);

    let second = puflab(dir.path(), &args);
    assert_exit(&second, 0);
    let again = std::fs::read_to_string(dir.path().join("out/smoke_trace.csv")).unwrap();
    assert_eq!(
        trace, again,
        "rerun with identical settings must be byte-identical"
    );
}

#[test]
fn reproduce_model_convergence_passes_at_reduced_replicas() {
    let dir = TempDir::new().unwrap();
    let out = puflab(
        dir.path(),
        &["reproduce", "fig4", "--replicas", "6", "--out", "repro"],
    );
    assert_exit(&out, 0);
    assert!(stdout(&out).contains("fig4: PASS"));
    let curves = std::fs::read_to_string(dir.path().join("repro/fig4/curves.csv")).unwrap();
    assert!(curves.starts_with("series,crp_count,mean_accuracy,std_error\n"));
}

#[test]
fn reproduce_band_failure_exits_two() {
    let dir = TempDir::new().unwrap();
    let out = puflab(
        dir.path(),
        &["reproduce", "table3", "--replicas", "2", "--out", "repro"],
    );
    assert_exit(&out, 2);
    let text = stdout(&out);
    assert!(text.contains("table3: FAIL"));
    assert!(
        text.contains("FAIL") && text.contains("PASS"),
        "per-point verdicts printed"
    );
}

#[test]
fn eval_accuracy_of_the_true_weights_is_perfect() {
    let dir = TempDir::new().unwrap();
    let gen = puflab(
        dir.path(),
        &["gen", "puf", "--n", "16", "--seed", "9", "--out", "puf.txt"],
    );
    assert_exit(&gen, 0);
    let eval = puflab(
        dir.path(),
        &[
            "eval",
            "accuracy",
            "--model",
            "puf.txt",
            "--puf",
            "puf.txt",
            "--eval-size",
            "2000",
        ],
    );
    assert_exit(&eval, 0);
    assert!(stdout(&eval).contains("accuracy 1.000000"));
}

#[test]
fn adversarial_set_is_recognized_but_generalizes_poorly() {
    let dir = TempDir::new().unwrap();
    let gen = puflab(
        dir.path(),
        &[
            "gen",
            "adversarial",
            "--count",
            "300",
            "--seed",
            "5",
            "--out",
            "adv",
        ],
    );
    assert_exit(&gen, 0);
    let eval = puflab(
        dir.path(),
        &[
            "eval",
            "recognition",
            "--crps",
            "adv/set.crp",
            "--puf",
            "adv/puf.txt",
            "--prefix",
            "100",
            "--eval-size",
            "2000",
        ],
    );
    assert_exit(&eval, 0);
    let text = stdout(&eval);
    let grab = |key: &str| -> f64 {
        text.split_whitespace()
            .skip_while(|t| *t != key)
            .nth(1)
            .unwrap_or_else(|| panic!("missing {key} in {text:?}"))
            .parse()
            .unwrap()
    };
    assert!(
        grab("internal") >= 0.99,
        "set must be near-perfectly recognized: {text}"
    );
    assert!(
        grab("external") <= 0.80,
        "set must generalize poorly: {text}"
    );
}
