use std::process::ExitCode;

use ultimatum_ql::experiment::{run_experiment, spec_from_args};

const USAGE: &str = "\
usage: ultimatum-ql <mode> [--config FILE] [--key value ...]

modes: run, scan-learning, scan-game, transitions, lattice, theory-boundary

common flags:
  --alpha --gamma --epsilon --l --h --scheme rotating|random|fixed
  --steps --transient --window --seed --ensemble --out DIR
  --every --snapshot-every
mode flags:
  scan-learning   --alpha-grid a0:a1:n --gamma-grid g0:g1:n
  scan-game       --l-grid l0:l1:n --h-grid h0:h1:n
  transitions     --windows start:end[,start:end...]
  lattice         --n N
  theory-boundary --l --gamma-grid g0:g1:n

Grids also accept comma lists. The same keys work in a key = value file.
";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.is_empty() || args.iter().any(|a| a == "--help" || a == "-h") {
        print!("{USAGE}");
        return ExitCode::SUCCESS;
    }
    match spec_from_args(&args).and_then(|spec| run_experiment(&spec)) {
        Ok(summary) => {
            for f in &summary.files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
