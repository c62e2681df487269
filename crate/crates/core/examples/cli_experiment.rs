//! Drives the experiment layer the way the command-line tool does: parse a
//! config text plus flags, run it, and list the files written.
//!
//!     cargo run --release --example cli_experiment -- [out-dir]

use ultimatum_ql::experiment::{parse_config, run_experiment};

const CONFIG: &str = "\
# short transition study
alpha = 0.1
gamma = 0.9
epsilon = 0.1
ensemble = 4
";

fn main() {
    let out = std::env::args().nth(1).unwrap_or_else(|| {
        std::env::temp_dir()
            .join("ultimatum-ql-example")
            .display()
            .to_string()
    });
    let flags: Vec<String> = ["transitions", "--windows", "0:1e4,9e4:1e5", "--out", &out]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let spec = parse_config(Some(CONFIG), &flags).expect("valid config");
    println!(
        "mode {} with {} realizations, {} steps",
        spec.mode, spec.ensemble, spec.run.steps
    );

    let summary = run_experiment(&spec).expect("experiment");
    for f in &summary.files {
        let lines = std::fs::read_to_string(f)
            .map(|t| t.lines().count())
            .unwrap_or(0);
        println!("{} ({lines} lines)", f.display());
    }
}
