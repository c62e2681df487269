//! Sweeps the low and high offer levels at fixed learning parameters and
//! prints fair versus rational shares.
//!
//!     cargo run --release --example game_scan -- [steps] [realizations]

use ultimatum_ql::engine::RunConfig;
use ultimatum_ql::experiment::{simulate, Plan};
use ultimatum_ql::game::GameParams;

fn main() {
    let mut args = std::env::args().skip(1);
    let steps: u64 = args.next().map_or(300_000, |s| s.parse().expect("steps"));
    let m: u64 = args.next().map_or(8, |s| s.parse().expect("realizations"));

    println!("   l     h   f_pl   f_pm   f_ph   f_ql   f_qm   f_qh");
    let mut g = 0;
    for low in [0.1, 0.25, 0.45] {
        for high in [0.65, 0.9] {
            let run = RunConfig {
                game: GameParams::new(low, high).unwrap(),
                steps,
                transient: steps - 1_000,
                window: 1_000,
                ..RunConfig::default()
            };
            let f = simulate(&run, &Plan::window_only(&run), 2, g, m)
                .expect("simulation")
                .fractions();
            g += 1;
            println!(
                "{low:>5.2} {high:>5.2} {}",
                f.proposer
                    .iter()
                    .chain(&f.responder)
                    .map(|v| format!("{v:.3}"))
                    .collect::<Vec<_>>()
                    .join("  ")
            );
        }
    }
}
