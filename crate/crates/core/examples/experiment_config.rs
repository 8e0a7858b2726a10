//! Drive the command-line front end from a JSON document.
use conf_lab::cli::main_with_args;

const CONFIG: &str = r#"{
  "name": "two reviews, window of four",
  "instance": {"mu": 0.6, "c": 2, "dist": {"kind": "normal", "mean": 0, "sd": 0.5},
               "estimator": {"kind": "beta_quantile", "a": 1, "b": 1, "phi": 0.5}},
  "price": 0.6,
  "ordering": {"kind": "window", "w": 4},
  "simulation": {"rounds": 100000, "replications": 8, "seed": 7},
  "sweep": {"axis": "price", "values": "0.2..1:0.2"}
}"#;

fn main() {
    let path = std::env::temp_dir().join("conf_lab_example.json");
    std::fs::write(&path, CONFIG).unwrap();
    let p = path.to_str().unwrap();
    for cmd in ["analyze", "optimize", "simulate", "sweep"] {
        println!("$ conf-lab {cmd} --config {p}");
        let code = main_with_args(["conf-lab", cmd, "--config", p]);
        println!("(exit {code})\n");
    }
}
