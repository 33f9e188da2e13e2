//! End-to-end tests of the charpoly binary: record schema, determinism,
//! precedence of flags over config and environment, and the exit-code
//! contract.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_charpoly"));
    // keep the ambient environment from leaking into precedence tests
    c.env_remove("CHARPOLY_WORKERS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_lines(out: &Output) -> Vec<Value> {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).expect("JSONL line"))
        .collect()
}

#[test]
fn rerun_with_same_config_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let p1 = dir.path().join("a.jsonl");
    let p2 = dir.path().join("b.jsonl");
    for p in [&p1, &p2] {
        let out = run(&[
            "sample", "--n", "4", "--samples", "200", "--seed", "11", "--workers", "3",
            "--no-header", "--out", p.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    let (a, b) = (fs::read(&p1).unwrap(), fs::read(&p2).unwrap());
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn out_files_are_appended_not_truncated() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("a.jsonl");
    for _ in 0..2 {
        let out = run(&["sample", "--samples", "50", "--no-header", "--out", p.to_str().unwrap()]);
        assert!(out.status.success());
    }
    let text = fs::read_to_string(&p).unwrap();
    assert_eq!(text.lines().count(), 100);
}

#[test]
fn unitary_n1_argument_lies_in_principal_half_turn() {
    let out = run(&["sample", "--n", "1", "--samples", "500", "--no-header"]);
    let recs = stdout_lines(&out);
    assert_eq!(recs.len(), 500);
    for r in &recs {
        assert_eq!(r["type"], "draw");
        assert_eq!(r["group"], "unitary");
        let im = r["im_log"].as_f64().unwrap();
        let half = std::f64::consts::FRAC_PI_2;
        assert!(im > -half && im <= half, "im_log = {im}");
    }
}

#[test]
fn so2n_draws_are_real() {
    let out = run(&["sample", "--group", "so2n", "--n", "3", "--samples", "200", "--no-header"]);
    let recs = stdout_lines(&out);
    assert_eq!(recs.len(), 200);
    for r in &recs {
        assert_eq!(r["group"], "so2n");
        assert_eq!(r["sampler"], "so2n-product");
        assert_eq!(r["im_log"].as_f64().unwrap(), 0.0);
    }
}

#[test]
fn every_record_carries_provenance_fields() {
    let out = run(&["sample", "--samples", "10", "--seed", "42"]);
    let recs = stdout_lines(&out);
    // header plus 10 draws
    assert_eq!(recs.len(), 11);
    assert_eq!(recs[0]["type"], "header");
    for r in &recs {
        assert_eq!(r["schema_version"], 1);
        assert_eq!(r["seed"], 42);
        assert!(r["stream_id"].is_u64());
    }
    for (i, r) in recs[1..].iter().enumerate() {
        assert_eq!(r["index"], i as u64);
    }
}

#[test]
fn unknown_suite_is_a_usage_error() {
    let out = run(&["validate", "nosuch"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("invalid value"));
}

#[test]
fn moment_domain_violation_names_the_constraint() {
    let out = run(&["moments", "--n", "5", "--t=-2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Re(t±s) > -1"));
}

#[test]
fn unwritable_out_path_is_an_io_error() {
    let out = run(&["sample", "--samples", "2", "--out", "/no_such_dir_zz/x.jsonl"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn sampler_group_mismatch_is_a_usage_error() {
    let out = run(&["sample", "--group", "so2n", "--sampler", "joint"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("unitary group"), "stderr: {err}");
}

#[test]
fn exact_moments_telescope_to_log_n_plus_one() {
    let out = run(&["moments", "--n", "1,10", "--t", "2", "--s", "0", "--no-header"]);
    let recs = stdout_lines(&out);
    assert_eq!(recs.len(), 2);
    let lm1 = recs[0]["log_moment"].as_f64().unwrap();
    let lm10 = recs[1]["log_moment"].as_f64().unwrap();
    assert!((lm1 - 2f64.ln()).abs() < 1e-14);
    assert!((lm10 - 11f64.ln()).abs() < 1e-13);
}

#[test]
fn empirical_moment_reports_estimate_and_z() {
    let out = run(&[
        "moments", "--n", "2", "--t", "1", "--empirical", "20000", "--seed", "9", "--no-header",
    ]);
    let recs = stdout_lines(&out);
    let r = &recs[0];
    assert_eq!(r["samples"], 20000);
    assert!(r["estimate_re"].is_f64());
    assert!(r["se_re"].as_f64().unwrap() > 0.0);
    assert!(r["z_re"].as_f64().unwrap().abs() < 6.0);
}

#[test]
fn validate_small_sample_run_passes_with_low_power_warning() {
    let out = run(&["validate", "mellin", "--samples", "3000", "--seed", "5"]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("low power"), "stderr: {err}");
    let recs = stdout_lines(&out);
    let checks: Vec<_> = recs.iter().filter(|r| r["type"] == "check").collect();
    assert!(!checks.is_empty());
    assert!(checks.iter().all(|c| c["pass"] == true));
    let suite = recs.iter().find(|r| r["type"] == "suite").unwrap();
    assert_eq!(suite["passed"], true);
    assert_eq!(suite["suite"], "mellin");
}

#[test]
fn validate_failure_exits_nonzero() {
    // an absurd z threshold makes every moment check fail
    let out = run(&[
        "validate", "betagamma", "--samples", "500", "--z-threshold", "0.000001", "--seed", "5",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| {
        let v: Value = serde_json::from_str(l).unwrap();
        v["type"] == "check" && v["pass"] == false
    }));
}

#[test]
fn csv_export_has_one_column_row_then_data() {
    let out = run(&["sample", "--format", "csv", "--samples", "5", "--no-header"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 6);
    assert_eq!(
        lines[0],
        "type,schema_version,seed,stream_id,index,n,group,sampler,re_log,im_log"
    );
    for row in &lines[1..] {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells.len(), 10);
        cells[8].parse::<f64>().unwrap();
        cells[9].parse::<f64>().unwrap();
    }
}

#[test]
fn flags_beat_config_file_and_config_beats_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("charpoly.toml");
    fs::write(&cfg, "seed = 123\nworkers = 2\n").unwrap();

    let out = run(&["sample", "--samples", "4", "--no-header", "--config", cfg.to_str().unwrap()]);
    let recs = stdout_lines(&out);
    assert!(recs.iter().all(|r| r["seed"] == 123));
    let streams: Vec<u64> = recs.iter().map(|r| r["stream_id"].as_u64().unwrap()).collect();
    assert_eq!(streams, [0, 0, 1, 1]);

    let out = run(&[
        "sample", "--samples", "4", "--seed", "9", "--workers", "1", "--no-header", "--config",
        cfg.to_str().unwrap(),
    ]);
    let recs = stdout_lines(&out);
    assert!(recs.iter().all(|r| r["seed"] == 9 && r["stream_id"] == 0));
}

#[test]
fn env_workers_used_when_no_flag_or_config() {
    let out = bin()
        .env("CHARPOLY_WORKERS", "3")
        .args(["sample", "--samples", "6", "--no-header"])
        .output()
        .unwrap();
    let recs = stdout_lines(&out);
    let mut streams: Vec<u64> = recs.iter().map(|r| r["stream_id"].as_u64().unwrap()).collect();
    streams.dedup();
    assert_eq!(streams, [0, 1, 2]);

    // explicit flag wins over the environment
    let out = bin()
        .env("CHARPOLY_WORKERS", "3")
        .args(["sample", "--samples", "6", "--workers", "1", "--no-header"])
        .output()
        .unwrap();
    let recs = stdout_lines(&out);
    assert!(recs.iter().all(|r| r["stream_id"] == 0));
}

#[test]
fn config_file_typo_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "sede = 123\n").unwrap();
    let out = run(&["sample", "--samples", "1", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn lil_marks_undefined_normalizations_with_notes() {
    let out = run(&[
        "lil", "--n-max", "100", "--checkpoints", "10,100", "--trajectories", "2", "--no-header",
    ]);
    let recs = stdout_lines(&out);
    assert_eq!(recs.len(), 4);
    for r in &recs {
        assert_eq!(r["type"], "trajectory");
        match r["n"].as_u64().unwrap() {
            10 => {
                assert!(r["iterated_log_stat"].is_null());
                assert!(r["variance_iterated_log_stat"].is_null());
                assert!(r["note"].as_str().unwrap().contains("n >= 16"));
            }
            100 => {
                assert!(r["iterated_log_stat"].is_f64());
                assert!(r["variance_iterated_log_stat"].is_f64());
                assert!(r["note"].is_null());
            }
            other => panic!("unexpected checkpoint {other}"),
        }
    }
}

#[test]
fn lil_rejects_small_n_max() {
    let out = run(&["lil", "--n-max", "50"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bench_reports_matrix_column_only_up_to_64() {
    let out = run(&["bench", "--n", "8,80", "--samples", "4", "--no-header"]);
    let recs = stdout_lines(&out);
    assert_eq!(recs.len(), 2);
    assert!(recs[0]["matrix_ns_per_draw"].is_f64());
    assert!(recs[0]["product_ns_per_draw"].as_f64().unwrap() > 0.0);
    assert!(recs[1]["matrix_ns_per_draw"].is_null());
}

#[test]
fn header_record_carries_timestamp_and_command() {
    let out = run(&["moments", "--n", "3"]);
    let recs = stdout_lines(&out);
    assert_eq!(recs[0]["type"], "header");
    assert_eq!(recs[0]["command"], "moments");
    assert!(recs[0]["timestamp_unix"].as_u64().unwrap() > 1_700_000_000);
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn global_flags_work_in_any_position() {
    let dir = tempfile::tempdir().unwrap();
    let p1 = dir.path().join("pre.jsonl");
    let p2 = dir.path().join("post.jsonl");
    let pre = run(&["--seed", "3", "--no-header", "--out", path_str(&p1), "sample", "--samples", "5"]);
    let post = run(&["sample", "--samples", "5", "--seed", "3", "--no-header", "--out", path_str(&p2)]);
    assert!(pre.status.success() && post.status.success());
    assert_eq!(fs::read(&p1).unwrap(), fs::read(&p2).unwrap());
}
