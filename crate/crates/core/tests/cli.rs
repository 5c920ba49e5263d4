use std::path::Path;
use std::process::{Command, Output};

fn fragrisk(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fragrisk"))
        .args(args)
        .current_dir(dir)
        .env_remove("FRAGRISK_OUT_DIR")
        .output()
        .expect("run fragrisk")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn ratio_prints_six_decimals() {
    let dir = tempfile::tempdir().unwrap();
    let o = fragrisk(
        &["risk", "ratio", "--alpha", "2", "--beta", "1.5", "--K", "2"],
        dir.path(),
    );
    assert!(o.status.success());
    assert_eq!(stdout(&o), "0.629961\n");
}

#[test]
fn built_spine_leaf_has_every_inter_leaf_pair_at_two_hops() {
    let dir = tempfile::tempdir().unwrap();
    let o = fragrisk(
        &[
            "topo",
            "build",
            "--kind",
            "spine-leaf",
            "--spines",
            "2",
            "--leaves",
            "4",
            "--hosts-per-leaf",
            "10",
            "--out",
            "sl.txt",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    let o = fragrisk(&["topo", "hops", "--topology", "sl.txt"], dir.path());
    assert!(o.status.success());
    let rows: Vec<String> = stdout(&o)
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(str::to_owned)
        .collect();
    // 40 hosts: 4 leaves of 10 share a leaf (4*45 pairs), the rest cross
    assert_eq!(rows, ["hops,pairs", "0,180", "2,600"]);
}

#[test]
fn csv_numbers_round_trip_by_default() {
    let dir = tempfile::tempdir().unwrap();
    let o = fragrisk(&["risk", "curve", "--K-values", "2", "--out", "curve.csv"], dir.path());
    assert!(o.status.success());
    let csv = std::fs::read_to_string(dir.path().join("curve.csv")).unwrap();
    let last = csv.lines().last().unwrap();
    let value: f64 = last.split(',').nth(1).unwrap().parse().unwrap();
    assert_eq!(value, 2f64.powf(-2.0 / 3.0));
}

#[test]
fn config_file_feeds_flags_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("s.cfg"),
        "# scenario\npareto.alpha = 3\nharm.beta = 1.5\n",
    )
    .unwrap();
    let from_file = fragrisk(&["--config", "s.cfg", "risk", "ratio", "--K", "2"], dir.path());
    assert_eq!(
        stdout(&from_file),
        format!("{:.6}\n", 2f64.powf(3.0 * (1.0 / 1.5 - 1.0)))
    );
    let overridden = fragrisk(
        &["--config", "s.cfg", "risk", "ratio", "--K", "2", "--alpha", "2"],
        dir.path(),
    );
    assert_eq!(stdout(&overridden), "0.629961\n");
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.cfg"), "harm.gamma = 2\n").unwrap();
    let o = fragrisk(&["--config", "bad.cfg", "growth"], dir.path());
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("harm.gamma"));
}

#[test]
fn domain_error_leaves_no_output_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = fragrisk(
        &["risk", "tail-mean", "--alpha", "1", "--beta", "1.5", "--out", "t.csv"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("diverges"));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn invalid_flags_exit_nonzero_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let o = fragrisk(&["risk", "ratio", "--K", "two"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    assert!(!o.stderr.is_empty());
}

#[test]
fn tail_mean_warns_between_thresholds() {
    let dir = tempfile::tempdir().unwrap();
    let o = fragrisk(&["risk", "tail-mean", "--alpha", "2", "--beta", "1.5"], dir.path());
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    assert_eq!(stdout(&o), "-4.000000\n");
    let quiet = fragrisk(&["risk", "tail-mean", "--alpha", "4", "--beta", "1.5"], dir.path());
    assert!(quiet.stderr.is_empty());
}

#[test]
fn out_dir_env_resolves_relative_paths() {
    let dir = tempfile::tempdir().unwrap();
    let target = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_fragrisk"))
        .args(["growth", "--points", "3", "--out", "g.csv", "--svg", "g.svg"])
        .current_dir(dir.path())
        .env("FRAGRISK_OUT_DIR", target.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(target.path().join("g.csv").exists());
    let svg = std::fs::read_to_string(target.path().join("g.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn json_report_carries_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let o = fragrisk(
        &["--format", "json", "--seed", "42", "--trials", "500", "topo", "harm"],
        dir.path(),
    );
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["command"], "topo harm");
    assert_eq!(v["seed"], 42);
    assert_eq!(v["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn fail_can_emit_the_damaged_topology() {
    let dir = tempfile::tempdir().unwrap();
    let o = fragrisk(
        &[
            "topo",
            "fail",
            "--kind",
            "three-tier",
            "--fail",
            "c0,c1",
            "--emit-topology",
            "damaged.txt",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    assert_eq!(stdout(&o), "0.666667\n");
    let damaged = std::fs::read_to_string(dir.path().join("damaged.txt")).unwrap();
    assert!(damaged.starts_with("topology v1 three-tier\n"));
    assert!(!damaged.lines().any(|l| l.starts_with("c0 ") || l.starts_with("c1 ")));
}

#[test]
fn silent_drop_is_annotated_only_where_cores_exist() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("s.cfg"), "failure.core_silent_drop = 0.02\n").unwrap();
    let tier = fragrisk(
        &[
            "--config",
            "s.cfg",
            "--trials",
            "200",
            "topo",
            "harm",
            "--kind",
            "three-tier",
        ],
        dir.path(),
    );
    assert!(stdout(&tier).contains("# core_silent_drop_probability: 0.02\n"));
    let leaf = fragrisk(&["--config", "s.cfg", "--trials", "200", "topo", "harm"], dir.path());
    assert!(!stdout(&leaf).contains("silent_drop"));
    let bad = fragrisk(&["topo", "harm", "--silent-drop", "1.5"], dir.path());
    assert_eq!(bad.status.code(), Some(1));
}
