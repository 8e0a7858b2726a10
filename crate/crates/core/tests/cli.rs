use std::process::Command;

use conf_lab::cli::{parse_spec, ExperimentSpec};
use conf_lab::simulator::SimResult;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_conf-lab"))
}

fn stdout(args: &[&str]) -> (i32, String, String) {
    let o = bin().args(args).output().unwrap();
    (o.status.code().unwrap(), String::from_utf8(o.stdout).unwrap(), String::from_utf8(o.stderr).unwrap())
}

const E1: &str = r#"{
  "name": "worked example",
  "instance": {"mu": 0.5, "c": 1, "dist": {"kind": "uniform", "lo": 0, "hi": 1},
               "estimator": {"kind": "beta_mean", "a": 1, "b": 1}},
  "price": 1.0,
  "ordering": "newest",
  "simulation": {"rounds": 50000, "replications": 8, "seed": 3}
}"#;

fn write_config(dir: &tempfile::TempDir, name: &str, body: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn analyze_worked_example() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "e1.json", E1);
    let (code, out, _) = stdout(&["analyze", "--config", &cfg]);
    assert_eq!(code, 0);
    assert!(out.contains("rev_random=0.5\n") && out.contains("rev_newest=0.444444\n") && out.contains("chi=1.125\n"), "{out}");
}

#[test]
fn malformed_config_exits_one_with_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "bad.json", &E1.replace("\"c\": 1", "\"c\": -1"));
    let (code, _, err) = stdout(&["analyze", "--config", &cfg]);
    assert_eq!(code, 1);
    assert!(err.contains("instance.c"), "{err}");
    let (code, _, _) = stdout(&["analyze", "--config", "/nonexistent.json"]);
    assert_eq!(code, 1);
    let (code, _, _) = stdout(&["frobnicate"]);
    assert_eq!(code, 1);
}

#[test]
fn simulate_result_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "e1.json", E1);
    let out = dir.path().join("res.json");
    let traj = dir.path().join("traj.csv");
    let (code, _, err) = stdout(&[
        "simulate", "--config", &cfg, "--out", out.to_str().unwrap(), "--trajectory", traj.to_str().unwrap(), "--rounds", "2000",
    ]);
    assert_eq!(code, 0, "{err}");
    let text = std::fs::read_to_string(&out).unwrap();
    let res: SimResult = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_string_pretty(&res).unwrap() + "\n", text);
    assert_eq!(res.rounds, 2000);
    let csv = std::fs::read_to_string(&traj).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("round,mean_revenue,mean_displayed_rating"));
    assert_eq!(lines.count(), 2000);

    // same seed, same bytes
    let out2 = dir.path().join("res2.json");
    stdout(&["simulate", "--config", &cfg, "--out", out2.to_str().unwrap(), "--trajectory", traj.to_str().unwrap(), "--rounds", "2000"]);
    assert_eq!(std::fs::read_to_string(&out2).unwrap(), text);
}

#[test]
fn spec_round_trips() {
    let spec = parse_spec(E1).unwrap();
    let again: ExperimentSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
    assert_eq!(spec, again);
}

#[test]
fn limited_attention_sweep() {
    let (code, out, _) = stdout(&[
        "sweep", "--axis", "c", "--values", "1..50", "--mu", "0.1", "--dist", "uniform:-1:1", "--estimator", "beta_mean:0.1:0.9",
        "--price", "1",
    ]);
    assert_eq!(code, 0);
    let rows: Vec<Vec<f64>> = out.lines().skip(1).map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 50);
    assert!(rows.iter().all(|r| (r[1] - 0.05).abs() < 1e-11));
    let newest: Vec<f64> = rows.iter().map(|r| r[2]).collect();
    let argmin = (0..50).min_by(|&a, &b| newest[a].total_cmp(&newest[b])).unwrap();
    assert!(argmin > 0 && argmin < 49);
}

fn epsilon_rows(a: &str) -> Vec<Vec<f64>> {
    let est = format!("beta_mean:{a}:{a}");
    let (code, out, _) = stdout(&["sweep", "--axis", "epsilon", "--values", "0.01..3:0.01", "--dist", "uniform:-1:1", "--estimator", &est]);
    assert_eq!(code, 0);
    out.lines().skip(1).map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect()
}

#[test]
fn dynamic_vs_static_conf_sweep() {
    // columns: epsilon, static (random, newest, chi), dynamic (random, newest, chi)
    for a in ["0.05", "0.5", "5"] {
        for r in epsilon_rows(a) {
            assert!(r[6] <= r[3] + 1e-12, "a = {a}: {r:?}");
            assert!(r[6] >= 1.0 - 1e-12 && r[6] <= 2.0 / 0.5);
        }
    }
    // strong priors keep dynamic CoNF under 1.1 across the whole range
    assert!(epsilon_rows("5").iter().all(|r| r[6] < 1.1));
    // weak priors do not: the peak sits at moderate spreads
    let peak = epsilon_rows("0.05").iter().map(|r| r[6]).fold(0.0, f64::max);
    assert!(peak > 1.3 && peak < 1.34, "{peak}");
}

#[test]
fn sweep_csv_is_ordered_and_written_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let (code, stdout_text, _) = stdout(&["sweep", "--axis", "w", "--values", "8,1,2,4", "--price", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(stdout_text.is_empty());
    let csv = std::fs::read_to_string(out).unwrap();
    let first: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(first, ["8", "1", "2", "4"]);
    assert!(csv.contains("\n2,0.470588235294,"));
}

#[test]
fn xi_sweep_needs_levels() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"{"instance": {"mu": 0.5, "c": 1, "dist": {"kind": "uniform", "lo": 0, "hi": 1},
                  "estimator": {"kind": "table", "values": [0.25, 0.75]}},
                  "price": 1, "nonstationary": {"mu_lo": 0.25, "mu_hi": 0.75},
                  "sweep": {"axis": "xi", "values": "0.1..1:0.1"}}"#;
    let cfg = write_config(&dir, "ns.json", body);
    let (code, out, err) = stdout(&["sweep", "--config", &cfg]);
    assert_eq!(code, 0, "{err}");
    for l in out.lines().skip(1) {
        let r: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
        assert!(r[1] <= r[2] && r[3] <= r[4] + 1e-15, "{l}");
    }
    let cfg = write_config(&dir, "ns2.json", &body.replace(r#""nonstationary": {"mu_lo": 0.25, "mu_hi": 0.75},"#, ""));
    assert_eq!(stdout(&["sweep", "--config", &cfg]).0, 1);
}

#[test]
fn optimize_reports_both_classes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o.json");
    let (code, text, _) = stdout(&["optimize", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(text.contains("dynamic_newest: revenue=0.5625"), "{text}");
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(v["dynamic_newest"]["diagnostics"]["offset"], 0.25);
}

#[test]
fn verify_is_deterministic() {
    let args = ["verify", "--price", "1", "--rounds", "20000", "--reps", "8", "--seed", "5"];
    let (c1, o1, _) = stdout(&args);
    let (c2, o2, _) = stdout(&args);
    assert_eq!((c1, &o1), (c2, &o2));
    assert_eq!(c1, 0, "{o1}");
}
