//! End-to-end runs of the command-line binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const HEADER: &str =
    "regime,n,b,c,L,delta,alpha,pi_star,pi_o,q,omega_star,omega_star2,informativeness,pi,residual,status";

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_deterrence-lab")).args(args).output().expect("binary runs")
}

fn lab_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_deterrence-lab")).args(args).env(key, value).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const DESK: &[&str] = &["--n", "2", "--b", "0.1", "--c", "0.02", "--delta", "0.999", "--L", "1000"];

fn solve_to(path: &Path) {
    let mut args = vec!["solve", "--regime", "app", "--output", p(path)];
    args.extend_from_slice(DESK);
    assert_eq!(code(&lab(&args)), 0);
}

#[test]
fn single_agent_solve_reports_headline_numbers() {
    let out = lab(&["solve", "--regime", "single", "--n", "1", "--L", "1000"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["status"], "Solved");
    for key in ["q", "omega_star", "omega_star2", "pi", "informativeness", "residual"] {
        assert!(v[key].is_number(), "missing {key}");
    }
    let gap = v["omega_star"].as_f64().unwrap() - v["omega_star2"].as_f64().unwrap();
    assert!((gap - 1.0).abs() < 1e-10);
}

#[test]
fn distinct_rule_is_linear_in_accusations() {
    let out = lab(&["solve", "--regime", "dpp", "--n", "3", "--b", "3", "--c", "0.01", "--alpha", "0.1", "--L", "1000"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v = json(&out);
    let q: Vec<f64> =
        v["equilibrium"]["profile"]["rule"]["q"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert_eq!(q.len(), 4);
    for (m, qm) in q.iter().enumerate() {
        assert!((qm - m as f64 * q[1]).abs() < 1e-15, "{q:?}");
    }
}

#[test]
fn missing_equilibrium_is_exit_two_with_record() {
    let out = lab(&["solve", "--regime", "app", "--n", "2", "--L", "50"]);
    assert_eq!(code(&out), 2);
    let v = json(&out);
    assert_eq!(v["status"], "NoEquilibrium");
    assert_eq!(v["schema_version"], 1);
}

#[test]
fn invalid_values_name_the_key() {
    let out = lab(&["solve", "--regime", "single", "--delta", "1.5"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("delta"));
    let out = lab(&["solve", "--regime", "nonsense"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("regime"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# single agent\nregime = single\nn = 1\nL = 10 # overridden below\n").unwrap();
    let out = lab(&["solve", "--config", p(&cfg), "--L", "1000"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(json(&out)["equilibrium"]["profile"]["params"]["L"], 1000.0);

    std::fs::write(&cfg, "regime = single\nbogus_key = 3\n").unwrap();
    let out = lab(&["solve", "--config", p(&cfg)]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("bogus_key"));
}

#[test]
fn verify_round_trip_and_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let solved = dir.path().join("eq.json");
    solve_to(&solved);
    let out = lab(&["verify", "--profile", p(&solved)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(json(&out)["pass"], true);

    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&solved).unwrap()).unwrap();
    let cut = &mut v["equilibrium"]["profile"]["cutoffs"]["shared"]["omega_star"];
    *cut = Value::from(cut.as_f64().unwrap() + 0.1);
    let edited = dir.path().join("edited.json");
    std::fs::write(&edited, serde_json::to_string(&v).unwrap()).unwrap();
    let out = lab(&["verify", "--profile", p(&edited)]);
    assert_eq!(code(&out), 3);
    let agent_gap = json(&out)["diagnostics"]["agent_gap"].as_f64().unwrap();
    assert!(agent_gap > 0.05, "{agent_gap}");

    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&solved).unwrap()).unwrap();
    v["equilibrium"]["profile"]["rule"]["q"][0] = Value::from(0.2);
    std::fs::write(&edited, serde_json::to_string(&v).unwrap()).unwrap();
    let out = lab(&["verify", "--profile", p(&edited)]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("rule"));
}

#[test]
fn simulation_is_seeded_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let solved = dir.path().join("eq.json");
    solve_to(&solved);
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        let o = lab(&["simulate", "--profile", p(&solved), "--draws", "20000", "--seed", seed, "--output", p(&out)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        (std::fs::read(&out).unwrap(), std::fs::read(out.with_extension("csv")).unwrap())
    };
    let a = run("a.json", "7");
    let b = run("b.json", "7");
    let c = run("c.json", "8");
    assert_eq!(a, b);
    assert_ne!(a.0, c.0);
    let csv = String::from_utf8(a.1).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "reports,convicted,count,frequency,probability,std_error,z");
    let v: Value = serde_json::from_slice(&a.0).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert!(v["max_z"].as_f64().unwrap() < 5.0);

    let out = lab(&["simulate", "--profile", p(&solved)]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("seed"));
}

#[test]
fn sweep_csv_format() {
    let out = lab(&["sweep", "--regime", "app", "--grid", ""]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(stdout(&out), format!("{HEADER}\n"));

    let mut args = vec!["sweep", "--regime", "app", "--grid", "1e2:1e4:3"];
    args.extend_from_slice(&DESK[..8]);
    let out = lab(&args);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), HEADER);
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3);
    for row in rows {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 16);
        assert_eq!(fields[15], "Solved");
        let mantissa = fields[9].split('e').next().unwrap();
        assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17, "{}", fields[9]);
    }
}

#[test]
fn thread_count_does_not_change_output() {
    let mut args = vec!["sweep", "--regime", "dpp", "--grid", "1e2:1e4:4", "--b", "3", "--c", "0.001", "--alpha", "0.001"];
    args.extend_from_slice(&["--n", "2", "--delta", "0.999"]);
    let one = lab_env(&args, "DETERRENCE_LAB_THREADS", "1");
    let four = lab_env(&args, "DETERRENCE_LAB_THREADS", "4");
    assert_eq!(code(&one), 0, "{}", stderr(&one));
    assert_eq!(one.stdout, four.stdout);
    let bad = lab_env(&args, "DETERRENCE_LAB_THREADS", "many");
    assert_eq!(code(&bad), 1);
    assert!(stderr(&bad).contains("DETERRENCE_LAB_THREADS"));
}

#[test]
fn population_comparison() {
    let out = lab(&[
        "compare-n", "--n_small", "1", "--n_large", "2", "--b", "0.1", "--c", "0.005", "--delta", "0.999", "--L", "10000",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 3);
    assert!(stderr(&out).contains("Ordered"));
}

#[test]
fn demo_prints_both_examples() {
    let out = lab(&["demo-intro"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("0.96"));
    assert!(text.contains("0.99"));
    assert!(text.contains("defendant 2 convict"));
}

#[test]
fn usage_errors() {
    assert_eq!(code(&lab(&[])), 1);
    assert_eq!(code(&lab(&["--help"])), 0);
    assert_eq!(code(&lab(&["solve", "--unknown", "1"])), 1);
}

#[test]
fn committed_scenarios_run() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_stem().unwrap().to_str().unwrap().to_string();
        let command = ["solve", "sweep", "compare-n"].into_iter().find(|c| name.starts_with(&format!("{c}-"))).unwrap();
        let out = lab(&[command, "--config", p(&path)]);
        assert_eq!(code(&out), 0, "{name}: {}", stderr(&out));
        seen += 1;
    }
    assert!(seen >= 7);
}
