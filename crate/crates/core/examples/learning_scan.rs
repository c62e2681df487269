//! A coarse (alpha, gamma) scan printed as a heatmap table. The fair offer
//! gains ground toward small alpha and large gamma.
//!
//!     cargo run --release --example learning_scan -- [steps] [realizations]

use ultimatum_ql::engine::RunConfig;
use ultimatum_ql::experiment::{simulate, Plan};
use ultimatum_ql::game::LearningParams;

fn main() {
    let mut args = std::env::args().skip(1);
    let steps: u64 = args.next().map_or(300_000, |s| s.parse().expect("steps"));
    let m: u64 = args.next().map_or(8, |s| s.parse().expect("realizations"));
    let grid = [0.1, 0.5, 0.9];

    println!("f_pm (fair offer share); rows alpha, columns gamma = {grid:?}");
    for (i, &alpha) in grid.iter().enumerate() {
        let mut line = format!("alpha {alpha:.1} |");
        for (j, &gamma) in grid.iter().enumerate() {
            let run = RunConfig {
                learn: LearningParams::new(alpha, gamma, 0.01).unwrap(),
                steps,
                transient: steps - 1_000,
                window: 1_000,
                ..RunConfig::default()
            };
            let cell = simulate(
                &run,
                &Plan::window_only(&run),
                1,
                (i * grid.len() + j) as u64,
                m,
            )
            .expect("simulation");
            line += &format!(" {:.3}", cell.fractions().proposer[1]);
        }
        println!("{line}");
    }
}
