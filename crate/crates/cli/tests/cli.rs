use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use qdo_core::model::{dense_matrix, HamiltonianSpec};
use qdo_core::PauliSum;

fn qdo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdo")).args(args).env_remove("QDO_SEED").output().unwrap()
}

fn qdo_env(args: &[&str], seed: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdo")).args(args).env("QDO_SEED", seed).output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn decompose_pair_has_21_terms_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let spec_path = path(dir.path(), "spec.json");
    let spec = HamiltonianSpec::pair(4, -1.55).unwrap();
    fs::write(&spec_path, spec.to_json().unwrap()).unwrap();
    let out = path(dir.path(), "h.json");
    let summary = stdout(&qdo(&["decompose", "--spec", &spec_path, "--out", &out]));
    assert!(summary.contains("terms=21"), "{summary}");

    let h = PauliSum::from_json(&fs::read_to_string(&out).unwrap()).unwrap();
    let m = h.to_matrix();
    let direct = dense_matrix(&spec).unwrap();
    for (a, b) in m.iter().zip(direct.iter()) {
        assert!((a.re - b).abs() < 1e-10 && a.im.abs() < 1e-10);
    }
}

#[test]
fn decompose_single_two_level_oscillator() {
    let o = qdo(&["decompose", "--n", "1", "--d", "2"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("terms=2 "));
    let h = PauliSum::from_json(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert_eq!(h.len(), 2);
}

#[test]
fn malformed_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = path(dir.path(), "bad.json");
    fs::write(&bad, r#"{"d": 4, "N": 2"#).unwrap();
    let o = qdo(&["decompose", "--spec", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("malformed JSON"));

    fs::write(&bad, r#"{"d": 4, "N": 2, "edges": [], "colour": 1}"#).unwrap();
    assert_eq!(qdo(&["decompose", "--spec", &bad]).status.code(), Some(2));

    let o = qdo(&["oracle", "--grid", "4,abc"]);
    assert_eq!(o.status.code(), Some(2));

    let o = qdo(&["decompose", "--spec", &path(dir.path(), "missing.json")]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn domain_errors_exit_1() {
    let o = qdo(&["decompose", "--d", "3", "--gamma", "0.5"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn group_pair_is_ten() {
    let csv = stdout(&qdo(&["group", "--d", "4", "--gamma", "-1.55"]));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,d,terms,exact,greedy,bound,method"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[3], "10");
    assert_eq!(row[6], "exact");
}

#[test]
fn group_grid_and_groups_json() {
    let csv = stdout(&qdo(&["group", "--n-list", "2,3", "--d-list", "2,4"]));
    assert_eq!(csv.lines().count(), 5);
    let dir = tempfile::tempdir().unwrap();
    let g = path(dir.path(), "groups.json");
    stdout(&qdo(&["group", "--d", "4", "--gamma", "-1.0", "--groups-out", &g]));
    let groups = qdo_core::grouping::groups_from_json(&fs::read_to_string(&g).unwrap()).unwrap();
    assert_eq!(groups.len(), 10);
}

#[test]
fn shots_table() {
    let csv = stdout(&qdo(&["shots", "--n-list", "2", "--d-list", "2", "--gamma", "1", "--eps", "0.1"]));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "n,d,model,grouped,epsilon,shots,bound");
    assert_eq!(lines.len(), 5);
    // uncoupled, d=2: direct estimate equals the closed form
    let row: Vec<f64> = lines[3].split(',').skip(5).map(|v| v.parse().unwrap()).collect();
    assert!((row[0] - row[1]).abs() < 1e-9 * row[1]);

    let csv = stdout(&qdo(&["shots", "--eps-rel", "0.01", "--r-vdw", "4.0", "--alpha", "14.5", "--model", "uncoupled"]));
    assert!(csv.lines().nth(1).unwrap().contains("uncoupled"));
}

#[test]
fn vqe_needs_a_seed_and_flag_wins() {
    let args = ["vqe", "--d", "4", "--gamma", "-1.0", "--steps", "3", "--shots", "256"];
    assert!(!qdo(&args).status.success());

    let mut with_flag = args.to_vec();
    with_flag.extend(["--seed", "11"]);
    let flag = stdout(&qdo(&with_flag));
    let env_and_flag = stdout(&qdo_env(&with_flag, "12"));
    let env_only = stdout(&qdo_env(&args, "12"));
    assert_eq!(flag, env_and_flag);
    assert_ne!(flag, env_only);
}

#[test]
fn vqe_outputs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str| {
        let json = path(dir.path(), &format!("{tag}.json"));
        let csv = path(dir.path(), &format!("{tag}.csv"));
        stdout(&qdo(&[
            "vqe", "--d", "4", "--gamma", "-1.2", "--steps", "10", "--shots", "512", "--lambda", "0.2", "--seed", "5",
            "--json-out", &json, "--out", &csv,
        ]));
        (fs::read(json).unwrap(), fs::read(csv).unwrap())
    };
    let (j1, c1) = run("a");
    let (j2, c2) = run("b");
    assert_eq!(j1, j2);
    assert_eq!(c1, c2);
    let csv = String::from_utf8(c1).unwrap();
    assert_eq!(csv.lines().next(), Some("step,energy"));
    assert_eq!(csv.lines().count(), 11);
}

#[test]
fn vqe_extended_model_approaches_exact() {
    let dir = tempfile::tempdir().unwrap();
    let json = path(dir.path(), "run.json");
    stdout(&qdo(&["vqe", "--d", "4", "--gamma", "0.5", "--extended", "--seed", "1", "--json-out", &json]));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(json).unwrap()).unwrap();
    let exact = v["exact_ground_energy"].as_f64().unwrap();
    let got = v["run"]["exact_final_energy"].as_f64().unwrap();
    assert!((got - exact).abs() < 0.02 * exact.abs(), "{got} vs {exact}");
    let trace = v["run"]["trace"].as_array().unwrap();
    assert_eq!(trace.len(), 200);
    assert!(trace.last().unwrap().as_f64().unwrap() < trace[0].as_f64().unwrap());
}

#[test]
fn dispersion_rows_and_reruns() {
    let args = [
        "dispersion", "--seed", "4", "--grid", "4,6,inf", "--steps", "60", "--lambda", "0.3", "--shots", "1024",
        "--reps", "20",
    ];
    let a = stdout(&qdo(&args));
    let b = stdout(&qdo(&args));
    assert_eq!(a, b);
    let lines: Vec<&str> = a.lines().collect();
    assert!(lines[0].starts_with("r,gamma,e_exact,e_vqe,de_exact_ev,de_vqe_ev,de_noisy_ev,de_noisy_stderr_ev"));
    assert_eq!(lines.len(), 4);
    let last: Vec<&str> = lines[3].split(',').collect();
    assert_eq!(last[0], "inf");
    assert_eq!(last[1], "0.0");
    assert_eq!(last[4], "0.0");
    assert!(!last[7].is_empty());
}

#[test]
fn truncation_and_oracle_tables() {
    let csv = stdout(&qdo(&["truncation", "--gammas", "0,1.55", "--ds", "2,4"]));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "gamma,d,energy,analytic,error");
    assert_eq!(lines.len(), 5);

    let csv = stdout(&qdo(&["oracle", "--grid", "10,inf"]));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "r,gamma,de_normal_mode_ev,london_ev");
    let london: f64 = lines[1].split(',').nth(3).unwrap().parse().unwrap();
    assert!((london + 1.0103e-3).abs() < 1e-6);
    assert_eq!(lines[2], "inf,0.0,0.0,0.0");

    let csv = stdout(&qdo(&["oracle", "--table", "truncated", "--gammas", "2.5", "--ds", "2"]));
    assert!(csv.lines().nth(1).unwrap().ends_with(",,"));
}
