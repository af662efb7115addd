use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use crnsim::output::CSV_HEADER;
use crnsim::scenario::Scenario;

fn crnsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crnsim")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn fig5_writes_header_and_eighteen_rows() {
    let o = crnsim(&["fig5", "--trials", "500"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(!text.contains('\r'));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 19);
    assert_eq!(lines[0], CSV_HEADER);
    assert!(lines[1].starts_with("1,markov,"));
    assert!(lines[18].starts_with("9,poisson,"));
    for line in &lines[1..] {
        assert_eq!(line.split(',').count(), 7, "{line}");
    }
}

#[test]
fn out_flag_writes_csv_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig6.csv");
    let o = crnsim(&["fig6", "--trials", "500", "--seed", "9", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    assert!(fs::read_to_string(&out).unwrap().starts_with(CSV_HEADER));
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("fig6.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["master_seed"], 9);
    assert_eq!(meta["trials"], 500);
    assert!(meta["generator"].as_str().unwrap().contains("ChaCha8"));
}

#[test]
fn same_seed_same_bytes() {
    let a = crnsim(&["fig7", "--trials", "800", "--seed", "3"]);
    let b = crnsim(&["fig7", "--trials", "800", "--seed", "3"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = crnsim(&["fig7", "--trials", "800", "--seed", "4"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn p_sweep_has_one_row_per_grid_point_and_model() {
    let o = crnsim(&["fig8", "--trials", "200", "--grid-step", "0.1"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 1 + 2 * 11);
}

#[test]
fn run_accepts_baseline_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    fs::write(&path, Scenario::baseline().to_json()).unwrap();
    let o = crnsim(&["run", path.to_str().unwrap(), "--trials", "300", "--subchannels", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 1 + 2 * 3);
}

fn baseline_with(edit: impl FnOnce(&mut serde_json::Value)) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&Scenario::baseline().to_json()).unwrap();
    edit(&mut v);
    fs::write(dir.path().join("s.json"), v.to_string()).unwrap();
    dir
}

#[test]
fn invalid_q_exits_one_and_names_field() {
    let dir = baseline_with(|v| v["access"]["q"] = 1.2.into());
    let o = crnsim(&["run", dir.path().join("s.json").to_str().unwrap(), "--trials", "10"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("access.q"));
}

#[test]
fn invalid_pool_entry_names_index() {
    let dir = baseline_with(|v| v["pool"]["loss"][6] = (-0.5).into());
    let o = crnsim(&["run", dir.path().join("s.json").to_str().unwrap(), "--trials", "10"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("pool.loss[6]"));
}

#[test]
fn malformed_json_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    fs::write(&path, "{ not json").unwrap();
    let o = crnsim(&["run", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn missing_file_exits_two() {
    let o = crnsim(&["run", "/nonexistent/scenario.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_two() {
    let o = crnsim(&["fig5", "--trials", "10", "--out", "/nonexistent/dir/out.csv"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_flags_exit_one() {
    assert_eq!(crnsim(&["fig5", "--trials", "0"]).status.code(), Some(1));
    assert_eq!(crnsim(&["fig8", "--grid-step", "0"]).status.code(), Some(1));
    assert_eq!(crnsim(&["fig5", "--subchannels", "0"]).status.code(), Some(1));
    assert_eq!(crnsim(&["nonsense"]).status.code(), Some(1));
}

#[test]
fn lt_dep_reports_rate() {
    let o = crnsim(&["lt-dep", "--k", "100", "--overhead", "1.0", "--trials", "20"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("n=200"), "{text}");
    assert!(text.trim_end().ends_with("dep=0"), "{text}");
}

#[test]
fn bundled_scenario_file_matches_baseline() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/baseline.json");
    let o = crnsim(&["run", path.to_str().unwrap(), "--trials", "50", "--subchannels", "2"]);
    assert!(o.status.success());
}
