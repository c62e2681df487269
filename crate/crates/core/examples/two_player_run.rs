//! One two-player realization: watch the first rounds, then report the
//! option fractions over the measurement window.
//!
//!     cargo run --release --example two_player_run -- [steps] [seed]

use ultimatum_ql::engine::{run_with, RunConfig};
use ultimatum_ql::metrics::{DealStats, FractionCounts};

fn main() {
    let mut args = std::env::args().skip(1);
    let steps: u64 = args.next().map_or(200_000, |s| s.parse().expect("steps"));
    let seed: u64 = args.next().map_or(1, |s| s.parse().expect("seed"));
    let config = RunConfig {
        steps,
        transient: steps - steps.min(1_000),
        window: steps.min(1_000),
        seed,
        ..RunConfig::default()
    };

    let window = config.window_range();
    let mut counts = FractionCounts::default();
    let mut deals = DealStats::default();
    let sim = run_with(&config, |rec, _| {
        if rec.round < 8 {
            println!(
                "round {}: agent {} offers {} to agent {} (threshold {}) -> {} ({:.2}, {:.2})",
                rec.round,
                rec.proposer_id,
                rec.proposer_action,
                rec.responder_id,
                rec.responder_action,
                if rec.success { "deal" } else { "no deal" },
                rec.proposer_payoff,
                rec.responder_payoff,
            );
        }
        if window.contains(&rec.round) {
            counts.record(rec);
            deals.record(rec);
        }
    })
    .expect("valid configuration");

    let f = counts.fractions();
    println!(
        "\nafter {steps} rounds (window {window:?}), final state {}",
        sim.state()
    );
    println!("proposer  l/m/h: {:.3?}", f.proposer);
    println!("responder l/m/h: {:.3?}", f.responder);
    println!("deal rate: {:.3}", deals.deal_rate().unwrap_or(f64::NAN));
}
