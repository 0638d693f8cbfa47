//! End-to-end tests of the `qrka` binary: exit-code contract, report shape,
//! determinism of reports modulo wall-time fields, and the netlist surface.

use std::path::PathBuf;
use std::process::{Command, Output};

use qrka::revsim::{build_comparator, ReversibleCircuit};

fn qrka(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qrka"))
        .args(args)
        .env_remove("QRKA_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).expect("utf-8 stderr")
}

/// Drops the measured wall-time lines; everything else must be byte-stable.
fn strip_wall_lines(text: &str) -> String {
    text.lines()
        .filter(|line| !line.contains("wall_ms"))
        .collect::<Vec<&str>>()
        .join("\n")
}

#[test]
fn attack_json_report_is_deterministic_modulo_wall_time() {
    let args = [
        "attack",
        "--key-bits",
        "8",
        "--block-bits",
        "8",
        "--trials",
        "5",
        "--seed",
        "42",
    ];
    let first = qrka(&args);
    let second = qrka(&args);
    assert!(first.status.success());
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(
        strip_wall_lines(&stdout(&first)),
        strip_wall_lines(&stdout(&second)),
        "identical flags and seed must reproduce the report byte for byte"
    );

    let report: serde_json::Value = serde_json::from_str(&stdout(&first)).unwrap();
    assert_eq!(report["schema"], 1);
    assert_eq!(report["command"], "attack");
    assert_eq!(report["config"]["seed"], 42);
    assert_eq!(report["trials"].as_array().unwrap().len(), 5);
    assert_eq!(report["aggregate"]["successes"], 5);
    for row in report["trials"].as_array().unwrap() {
        assert_eq!(row["success"], true);
        assert_eq!(row["failure"], serde_json::Value::Null);
        assert_eq!(row["superposition_queries"], row["samples"]);
    }
}

#[test]
fn parallel_jobs_do_not_change_results() {
    let run = |jobs: &str| {
        let out = qrka(&[
            "attack",
            "--key-bits",
            "8",
            "--block-bits",
            "8",
            "--trials",
            "6",
            "--seed",
            "9",
            "--jobs",
            jobs,
        ]);
        assert_eq!(out.status.code(), Some(0));
        let mut report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
        for row in report["trials"].as_array_mut().unwrap() {
            row["wall_ms"] = serde_json::Value::Null;
        }
        report["aggregate"]["mean_wall_ms"] = serde_json::Value::Null;
        (report["trials"].clone(), report["aggregate"].clone())
    };
    assert_eq!(run("1"), run("4"));
}

#[test]
fn seed_env_var_is_a_fallback() {
    let flagged = qrka(&[
        "attack", "--key-bits", "8", "--block-bits", "8", "--trials", "3", "--seed", "77",
    ]);
    let via_env = Command::new(env!("CARGO_BIN_EXE_qrka"))
        .args(["attack", "--key-bits", "8", "--block-bits", "8", "--trials", "3"])
        .env("QRKA_SEED", "77")
        .output()
        .expect("binary runs");
    assert_eq!(via_env.status.code(), Some(0));
    assert_eq!(
        strip_wall_lines(&stdout(&flagged)),
        strip_wall_lines(&String::from_utf8(via_env.stdout).unwrap())
    );
}

#[test]
fn desk_scale_violation_exits_two() {
    let out = qrka(&["attack", "--key-bits", "40", "--block-bits", "8"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("not desk-scale"));
}

#[test]
fn invalid_flags_exit_two() {
    let out = qrka(&["attack", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
    // Invalid cipher geometry is also a usage error.
    let out = qrka(&["attack", "--key-bits", "8", "--block-bits", "6"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("multiple of 4"));
}

#[test]
fn narrow_key_wide_block_path_works() {
    // Exercises the key-shorter-than-block round-key schedule.
    let out = qrka(&[
        "attack", "--key-bits", "4", "--block-bits", "12", "--trials", "2", "--seed", "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["aggregate"]["successes"], 2);
}

#[test]
fn starved_budget_reports_failure_and_exits_one() {
    let out = qrka(&[
        "attack",
        "--key-bits",
        "8",
        "--block-bits",
        "8",
        "--trials",
        "4",
        "--seed",
        "3",
        "--max-samples",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(1), "trial failure is exit 1");
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let rows = report["trials"].as_array().unwrap();
    assert!(rows.iter().any(|r| r["success"] == false));
    assert!(rows
        .iter()
        .filter(|r| r["success"] == false)
        .all(|r| r["failure"].as_str().unwrap().contains("period recovery failed")));
}

#[test]
fn csv_format_and_pairs_override() {
    let out = qrka(&[
        "attack",
        "--key-bits",
        "8",
        "--block-bits",
        "8",
        "--trials",
        "2",
        "--seed",
        "5",
        "--pairs",
        "3",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "trial,seed,stream,success,zero_key,pairs,samples,superposition_queries,classical_queries,wall_ms,failure"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2);
    for row in rows {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields[3], "true");
        assert_eq!(fields[5], "3", "--pairs override must reach the tuple");
    }
}

#[test]
fn analytic_backend_runs_from_the_cli() {
    let out = qrka(&[
        "attack",
        "--key-bits",
        "8",
        "--block-bits",
        "8",
        "--trials",
        "2",
        "--seed",
        "4",
        "--backend",
        "analytic",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["config"]["backend"], "analytic");
    for row in report["trials"].as_array().unwrap() {
        assert_eq!(row["superposition_queries"], 0);
    }
}

#[test]
fn report_can_be_written_to_a_file() {
    let path: PathBuf = std::env::temp_dir().join(format!(
        "qrka-report-{}-{}.json",
        std::process::id(),
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .unwrap()
            .as_nanos()
    ));
    let out = qrka(&[
        "attack",
        "--key-bits",
        "8",
        "--block-bits",
        "8",
        "--trials",
        "2",
        "--seed",
        "6",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).is_empty(), "report goes to the file, not stdout");
    let written = std::fs::read_to_string(&path).unwrap();
    let report: serde_json::Value = serde_json::from_str(&written).unwrap();
    assert_eq!(report["aggregate"]["successes"], 2);
    std::fs::remove_file(&path).ok();
}

#[test]
fn emitted_netlist_parses_back_to_the_gadget() {
    let out = qrka(&["emit-netlist", "--gadget", "comparator", "--width", "6"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("# comparator gadget"));
    let parsed = ReversibleCircuit::from_netlist(&text).unwrap();
    let reference = build_comparator(6);
    assert_eq!(parsed.gates(), reference.gates());
    assert_eq!(parsed.width(), reference.width());
}

#[test]
fn netlist_rejects_zero_width() {
    let out = qrka(&["emit-netlist", "--gadget", "minmax", "--width", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_circuits_passes_and_prints_stats() {
    let out = qrka(&["verify-circuits"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("all gadget checks passed"));
    assert!(text.contains("comparator"));
    assert!(text.contains("controlled-copy"));
    assert!(text.contains("minmax"));
    // Stats header present.
    assert!(text.contains("toffoli"));
    assert!(text.contains("depth"));
}

#[test]
fn unicity_estimates_and_brute_force() {
    // Full-scale parameters: estimate only.
    let out = qrka(&["unicity", "--key-bits", "128", "--block-bits", "128"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("r = 2 pairs"));
    assert!(text.contains("estimate only"));

    // Desk scale: estimate plus brute-force verdicts.
    let out = qrka(&["unicity", "--key-bits", "8", "--block-bits", "8", "--seed", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("r = 2 pairs"));
    assert!(text.contains("brute-force verdict"));
    assert!(text.contains("unicity tuple found"));
}
