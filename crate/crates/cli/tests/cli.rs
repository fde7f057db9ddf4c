use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qor(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qor")).args(args).output().expect("spawn qor")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn demo5_single_shot_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = qor(&["demo5", "--shots", "1", "--seed", "7", "--out-dir", path(dir.path())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("recovered key: 213"));
    let csv = fs::read_to_string(dir.path().join("histogram.csv")).unwrap();
    assert!(csv.starts_with("outcome,count\n"));
    let transcript: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("transcript.json")).unwrap()).unwrap();
    assert!(transcript["transcript"].as_array().is_some_and(|t| !t.is_empty()));
}

#[test]
fn corrupted_fixture_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = dir.path().join("broken.json");
    let mut text: serde_json::Value =
        serde_json::from_str(include_str!("../../core/fixtures/cl167_p311.json")).unwrap();
    // repeat a j-invariant inside one cycle
    let cycle = text["cycles"]["a"].as_array_mut().unwrap();
    cycle[1] = cycle[0].clone();
    fs::write(&fixture, text.to_string()).unwrap();
    let out = qor(&["demo5", "--fixture", path(&fixture), "--out-dir", path(dir.path())]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    fs::write(&fixture, "{ not json").unwrap();
    assert!(!qor(&["export-graph", "--fixture", path(&fixture)]).status.success());
}

#[test]
fn run_outputs_are_reproducible() {
    let config_dir = tempfile::tempdir().unwrap();
    let config = config_dir.path().join("run.json");
    fs::write(&config, r#"{"chain": ["a", "c", "e"], "omega": 1, "Omega": 6, "seed": 3, "shots": 64}"#).unwrap();
    let read =
        |dir: &Path| (fs::read(dir.join("transcript.json")).unwrap(), fs::read(dir.join("histogram.csv")).unwrap());
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let out = qor(&["run", "--config", path(&config), "--out-dir", path(d.path())]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(read(dirs[0].path()), read(dirs[1].path()));

    let other = tempfile::tempdir().unwrap();
    qor(&["run", "--config", path(&config), "--seed", "4", "--out-dir", path(other.path())]);
    assert_ne!(read(dirs[0].path()).0, read(other.path()).0);
}

#[test]
fn unknown_config_field_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    fs::write(&config, r#"{"chain": ["a", "b", "e"], "shotz": 3}"#).unwrap();
    let out = qor(&["run", "--config", path(&config), "--out-dir", path(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("shotz"));
}

#[test]
fn attack_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    let plan = dir.path().join("plan.json");
    fs::write(&config, r#"{"chain": ["a", "b", "c", "d", "e"], "omega": 2, "Omega": 5, "shots": 100}"#).unwrap();
    fs::write(&plan, r#"{"hops": [0], "seed": 1}"#).unwrap();
    let out = qor(&["attack", "--config", path(&config), "--plan", path(&plan), "--out-dir", path(dir.path())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("attack.json")).unwrap()).unwrap();
    assert_eq!(report["hops"][0]["support"], serde_json::json!([116, 193, 213, 248, 307]));
    assert_eq!(report["hops"][0]["outside_support"], 0);
}

#[test]
fn export_graph_has_eleven_nodes() {
    let out = qor(&["export-graph", "--cycle", "a", "--format", "dot"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let nodes = text.lines().filter(|l| l.trim_end().ends_with("\";") && !l.contains("->")).count();
    let edges = text.lines().filter(|l| l.contains("->")).count();
    assert_eq!((nodes, edges), (11, 11));
}

#[test]
fn spectra_csv_matches_closed_form() {
    let out = qor(&["spectra", "--n", "11"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("class,k,closed_form,numeric"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 6 * 11);
    assert!(rows.iter().all(|r| (r[2] - r[3]).abs() < 1e-9));
}

#[test]
fn classgroup_subcommands() {
    assert_eq!(stdout(&qor(&["classgroup", "class-number", "-167"])).trim(), "11");
    assert_eq!(stdout(&qor(&["classgroup", "reduce", "21", "-13", "4"])).trim(), "(4, -3, 11)");
    assert_eq!(stdout(&qor(&["classgroup", "power", "2", "1", "21", "5"])).trim(), "(6, 1, 7)");
    assert_eq!(stdout(&qor(&["classgroup", "enumerate", "-167"])).lines().count(), 11);
    assert!(!qor(&["classgroup", "class-number", "-5"]).status.success());
}
