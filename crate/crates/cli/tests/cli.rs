use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ghzsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ghzsim")).args(args).env_remove("GHZSIM_OUT").output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr_json(out: &Output) -> Value {
    assert!(!out.status.success());
    serde_json::from_slice(&out.stderr).expect("stderr is JSON")
}

fn last_value(csv: &str) -> f64 {
    let line = csv.lines().last().unwrap();
    line.rsplit(',').next().unwrap().parse().unwrap()
}

#[test]
fn basis_dump_lists_canonical_states() {
    let closed = stdout_json(&ghzsim(&["basis"]));
    let states = closed.as_array().unwrap();
    assert_eq!(states.len(), 11);
    assert_eq!(states[0]["atoms"], "go gl gr");
    assert_eq!(states[10]["atoms"], "gl gr go");
    assert_eq!(states[2]["photons"]["C1L"], 1);
    let open = stdout_json(&ghzsim(&["basis", "--open"]));
    assert_eq!(open.as_array().unwrap().len(), 16);
    let five = stdout_json(&ghzsim(&["basis", "--n-atoms", "5"]));
    assert_eq!(five.as_array().unwrap().len(), 19);
}

#[test]
fn hamiltonian_matrices_are_hermitian() {
    let doc = stdout_json(&ghzsim(&["hamiltonian", "--time", "36"]));
    assert_eq!(doc["dim"], 11);
    for key in ["coupling", "detuning"] {
        let m = doc[key].as_array().unwrap();
        assert_eq!(m.len(), 11);
        for i in 0..11 {
            for j in 0..11 {
                let (a, b) = (&m[i][j], &m[j][i]);
                assert_eq!(a[0], b[0]);
                assert_eq!(a[1].as_f64().unwrap(), -b[1].as_f64().unwrap());
            }
        }
    }
    assert_eq!(doc["detuning"][1][1][0], 2.3);
    assert!(doc["laser"]["matrix"][1][0][0].as_f64().unwrap() != 0.0);
}

#[test]
fn eigen_reports_agreement() {
    let doc = stdout_json(&ghzsim(&["eigen", "--g", "1", "--v", "1", "--format", "json"]));
    assert!(doc["max_deviation"].as_f64().unwrap() <= 1e-10);
    assert_eq!(doc["levels"].as_array().unwrap().len(), 9);
    assert_eq!(doc["levels"][0]["degeneracy"], 3);
    let text = ghzsim(&["eigen", "--g", "1.3", "--v", "0.7"]);
    assert!(String::from_utf8_lossy(&text.stdout).contains("# max deviation"));
}

#[test]
fn pulses_table_columns() {
    let out = ghzsim(&["pulses", "--kind", "tqd", "--points", "11"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,omega1,omega3,theta,theta_dot,omega_bar");
    assert_eq!(lines.count(), 11);
}

#[test]
fn transitionless_trajectory_reaches_target() {
    let out = ghzsim(&["simulate", "--schedule", "tqd", "--tf", "72", "--observables", "fidelity"]);
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("t,fidelity\n"));
    assert!(last_value(&csv) >= 0.98);
}

#[test]
fn headline_scenario_writes_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let doc = stdout_json(&ghzsim(&["scenario", "headline", "--out", out]));
    let f = doc["values"]["fidelity"].as_f64().unwrap();
    assert!((f - 0.9715).abs() <= 0.01, "{f}");
    let csv = std::fs::read_to_string(doc["csv"].as_str().unwrap()).unwrap();
    let rows: Vec<&str> = csv.lines().filter(|l| l.starts_with("fidelity")).collect();
    assert_eq!(rows.len(), 1);
    let sidecar: Value =
        serde_json::from_str(&std::fs::read_to_string(doc["sidecar"].as_str().unwrap()).unwrap()).unwrap();
    assert_eq!(sidecar["provenance"]["hash"], doc["hash"]);
}

#[test]
fn scenario_list_and_overrides() {
    let list = stdout_json(&ghzsim(&["scenario", "--list"]));
    assert_eq!(list.as_array().unwrap().len(), 12);
    let dir = tempfile::tempdir().unwrap();
    let doc = stdout_json(&ghzsim(&[
        "scenario",
        "fig10a",
        "--points",
        "2",
        "--range",
        "dg=-0.05:0.05",
        "--steps",
        "4000",
        "--out",
        dir.path().to_str().unwrap(),
    ]));
    assert_eq!(doc["cells"], 4);
    assert_eq!(doc["failures"], 0);
    let csv = std::fs::read_to_string(doc["csv"].as_str().unwrap()).unwrap();
    assert!(csv.starts_with("dg,dv,observable,value\n"));
    assert!(csv.contains("-5.00000000000e-2"));
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_ghzsim"))
        .args(["sweep", "--axis", "tf=60:80:2", "--steps", "2000", "--name", "envtest"])
        .env("GHZSIM_OUT", dir.path())
        .output()
        .unwrap();
    let doc = stdout_json(&out);
    assert_eq!(doc["cells"], 2);
    let csv = Path::new(doc["csv"].as_str().unwrap());
    assert_eq!(csv.parent().unwrap(), dir.path());
    assert!(csv.file_name().unwrap().to_str().unwrap().starts_with("envtest-"));
}

#[test]
fn even_atom_count_is_rejected_with_json() {
    let err = stderr_json(&ghzsim(&["simulate", "--n-atoms", "4"]));
    assert_eq!(err["error"]["kind"], "invalid_params");
    let v = err["error"]["violations"].as_array().unwrap();
    assert!(v.iter().any(|x| x["key"] == "n_atoms" && x["message"].as_str().unwrap().contains("odd")));
}

#[test]
fn bad_config_files_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"params": {"tf": 72}, "stepz": 10}"#).unwrap();
    let err = stderr_json(&ghzsim(&["simulate", "--config", path.to_str().unwrap()]));
    assert!(err["error"]["message"].as_str().unwrap().contains("stepz"));

    std::fs::write(&path, r#"{"params": {"omega0": -1, "gamma": "2pi*2.62 MHz", "tf": "3 MHz"}}"#).unwrap();
    let err = stderr_json(&ghzsim(&["simulate", "--config", path.to_str().unwrap()]));
    let keys: Vec<&str> =
        err["error"]["violations"].as_array().unwrap().iter().map(|v| v["key"].as_str().unwrap()).collect();
    for k in ["omega0", "gamma", "tf"] {
        assert!(keys.contains(&k), "{keys:?}");
    }
}

#[test]
fn sidecar_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    std::fs::write(
        &config,
        r#"{"preset": "experimental", "params": {"tf": "15.28 ns", "alpha": "45 deg"}, "steps": 4000, "record_every": 400,
            "observables": ["fidelity", "leakage"]}"#,
    )
    .unwrap();
    let first_dir = dir.path().join("a");
    let first =
        stdout_json(&ghzsim(&["simulate", "--config", config.to_str().unwrap(), "--out", first_dir.to_str().unwrap()]));
    let sidecar = first["config"].as_str().unwrap();
    let text = std::fs::read_to_string(sidecar).unwrap();
    let parsed: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(parsed["preset"], "experimental");
    assert_eq!(parsed["steps"], 4000);

    // re-running from the sidecar reproduces the configuration, its hash and the data
    let second = stdout_json(&ghzsim(&["simulate", "--config", sidecar]));
    assert_eq!(second["config"], first["config"]);
    assert_eq!(second["data"], first["data"]);
    assert_eq!(std::fs::read_to_string(sidecar).unwrap(), text);
    assert_eq!(second["final"], first["final"]);
}
