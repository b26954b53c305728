use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_csdlab"));
    c.env_remove("CSDLAB_THREADS");
    c
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn write_config(dir: &Path, name: &str, config: &Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_vec_pretty(config).unwrap()).unwrap();
    p
}

fn run(args: &[&str], config: &Path) -> Output {
    bin().args(args).arg("--config").arg(config).output().unwrap()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn divergence_of_equal_pair_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", &json!({ "channel_path": fixture("independent.json") }));
    let out = run(&["divergence"], &cfg);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["experiment"], "divergence");
    for row in v["outputs"]["rows"].as_array().unwrap() {
        assert_eq!(row["d_cs"].as_f64().unwrap(), 0.0);
        assert!(row["gap"].as_f64().unwrap().abs() < 1e-12);
    }
}

#[test]
fn identity_sweep_has_zero_gaps() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        &json!({ "channel_path": fixture("identity.json"), "n_list": [1, 2, 4, 8, 16] }),
    );
    let out = run(&["redundancy-sweep"], &cfg);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    let rows = v["outputs"].as_array().unwrap();
    assert_eq!(rows.len(), 5);
    for row in rows {
        assert!(row["gap_bits"].as_f64().unwrap().abs() < 1e-12, "{row}");
        let n = row["n"].as_f64().unwrap();
        assert!((row["block_mi_bits"].as_f64().unwrap() - n).abs() < 1e-9);
    }
}

#[test]
fn zero_samples_exits_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        &json!({ "channel_path": fixture("bsc_0.11.json"), "samples": 0 }),
    );
    let out = run(&["simulate"], &cfg);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn unknown_config_field_exits_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", &json!({ "channel_path": fixture("bsc_0.11.json"), "sede": 3 }));
    assert_eq!(run(&["divergence"], &cfg).status.code(), Some(2));
}

#[test]
fn experiment_mismatch_exits_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        &json!({ "experiment": "simulate", "channel_path": fixture("bsc_0.11.json"), "samples": 200 }),
    );
    assert_eq!(run(&["divergence"], &cfg).status.code(), Some(2));
}

#[test]
fn corrupted_channel_exits_with_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let good = std::fs::read_to_string(fixture("bsc_0.11.json")).unwrap();
    let truncated = dir.path().join("truncated.json");
    std::fs::write(&truncated, &good[..good.len() / 2]).unwrap();
    let unnormalised = dir.path().join("unnormalised.json");
    std::fs::write(&unnormalised, r#"{"type": "discrete", "joint": [[0.5, 0.5], [0.5, 0.5]]}"#).unwrap();
    for bad in [&truncated, &unnormalised] {
        let cfg = write_config(dir.path(), "c.json", &json!({ "channel_path": bad }));
        let out = run(&["divergence"], &cfg);
        assert_eq!(out.status.code(), Some(3), "{}", bad.display());
    }
}

#[test]
fn missing_channel_file_exits_with_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", &json!({ "channel_path": "nowhere.json" }));
    assert_eq!(run(&["divergence"], &cfg).status.code(), Some(3));
}

#[test]
fn singular_channel_is_rejected_by_tilt_lab() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", &json!({ "channel_path": fixture("identity.json") }));
    let out = run(&["tilt-lab", "typicality"], &cfg);
    assert_eq!(out.status.code(), Some(6), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        &json!({ "channel_path": fixture("random_4x4.json"), "samples": 200, "seed": 11 }),
    );
    let a = run(&["simulate"], &cfg);
    let b = run(&["simulate"], &cfg);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let threaded = bin()
        .env("CSDLAB_THREADS", "1")
        .args(["simulate", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(a.stdout, threaded.stdout);
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        &json!({ "channel_path": fixture("bsc_0.11.json"), "samples": 200, "seed": 1 }),
    );
    let a = stdout_json(&run(&["simulate"], &cfg));
    let out = bin().args(["simulate", "--seed", "2", "--config"]).arg(&cfg).output().unwrap();
    let b = stdout_json(&out);
    assert_eq!(b["inputs"]["config"]["seed"], 2);
    assert_ne!(a["outputs"]["H_index_bits"], b["outputs"]["H_index_bits"]);
}

#[test]
fn wall_clock_is_opt_in() {
    let dir = tempfile::tempdir().unwrap();
    let base = json!({ "channel_path": fixture("bsc_0.11.json") });
    let plain = stdout_json(&run(&["divergence"], &write_config(dir.path(), "a.json", &base)));
    assert!(plain.get("wall_clock_seconds").is_none());
    let mut timed = base.clone();
    timed["record_wall_clock"] = json!(true);
    let v = stdout_json(&run(&["divergence"], &write_config(dir.path(), "b.json", &timed)));
    assert!(v["wall_clock_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn csv_output_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("sweep.csv");
    let cfg = write_config(
        dir.path(),
        "c.json",
        &json!({
            "channel_path": fixture("bsc_0.11.json"),
            "n_list": [2, 4, 8],
            "output_format": "csv",
        }),
    );
    let out = bin()
        .args(["redundancy-sweep", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&target)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&target).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# schema_version=1"));
    assert_eq!(
        lines.next(),
        Some("n,expected_dcs_bits,block_mi_bits,gap_bits,gap_over_lbn,stderr_bits,mode,seed")
    );
    assert_eq!(lines.count(), 3);
}

#[test]
fn unwritable_output_exits_with_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", &json!({ "channel_path": fixture("bsc_0.11.json") }));
    let out = bin()
        .args(["divergence", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("missing/dir/out.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(7));
}

#[test]
fn bad_thread_count_exits_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", &json!({ "channel_path": fixture("bsc_0.11.json") }));
    for v in ["0", "many"] {
        let out = bin()
            .env("CSDLAB_THREADS", v)
            .args(["divergence", "--config"])
            .arg(&cfg)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(2), "CSDLAB_THREADS={v}");
    }
}

#[test]
fn help_lists_exit_codes() {
    let out = bin().arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for code in ["0", "2", "3", "4", "5", "6", "7"] {
        assert!(text.lines().any(|l| l.trim_start().starts_with(code)), "exit code {code} missing:\n{text}");
    }
    assert!(text.contains("CSDLAB_THREADS"));
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut count = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        let v: Value = serde_json::from_slice(&std::fs::read(&p).unwrap()).unwrap();
        if let Some(c) = v.get("channel_path") {
            let channel = p.parent().unwrap().join(c.as_str().unwrap());
            assert!(channel.exists(), "{}", p.display());
        }
        count += 1;
    }
    assert!(count >= 5);
}

#[test]
fn seed_change_moves_monte_carlo_numbers_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        &json!({
            "channel_path": fixture("random_4x4.json"),
            "n_list": [2, 4, 8],
            "mode": "monte_carlo",
            "samples": 300,
        }),
    );
    let runs: Vec<Value> = ["1", "2"]
        .iter()
        .map(|s| {
            let out = bin().args(["redundancy-sweep", "--seed", s, "--config"]).arg(&cfg).output().unwrap();
            assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
            stdout_json(&out)
        })
        .collect();
    let (a, b) = (runs[0]["outputs"].as_array().unwrap(), runs[1]["outputs"].as_array().unwrap());
    for (ra, rb) in a.iter().zip(b) {
        assert_ne!(ra["expected_dcs_bits"], rb["expected_dcs_bits"]);
        assert_eq!(ra["block_mi_bits"], rb["block_mi_bits"]);
    }
}

#[test]
fn tilt_lab_verbs_run_on_bsc() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        &json!({ "channel_path": fixture("bsc_0.11.json"), "n_list": [64], "samples": 500 }),
    );
    for verb in ["cumulant", "dominance", "typicality", "ball"] {
        let out = run(&["tilt-lab", verb], &cfg);
        assert_eq!(out.status.code(), Some(0), "{verb}: {}", String::from_utf8_lossy(&out.stderr));
        let v = stdout_json(&out);
        assert_eq!(v["inputs"]["verb"], verb);
        assert!(v["outputs"]["constants"].is_object());
    }
}
