//! How the argmax of the Q-tables shifts over time in a few states, for the
//! fair-leaning parameters.
//!
//!     cargo run --release --example preference_snapshots -- [steps] [realizations]

use ultimatum_ql::engine::RunConfig;
use ultimatum_ql::experiment::{simulate, Plan};
use ultimatum_ql::game::{Role, SimState};

fn main() {
    let mut args = std::env::args().skip(1);
    let steps: u64 = args.next().map_or(400_000, |s| s.parse().expect("steps"));
    let m: u64 = args.next().map_or(10, |s| s.parse().expect("realizations"));
    let run = RunConfig {
        steps,
        transient: steps - 1_000,
        window: 1_000,
        ..RunConfig::default()
    };
    let plan = Plan {
        snapshot_every: Some((steps / 8).max(1)),
        ..Plan::window_only(&run)
    };
    let c = simulate(&run, &plan, 5, 0, m).expect("simulation");

    let rows = [
        (SimState::s(1), Role::Proposer),
        (SimState::s(4), Role::Responder),
        (SimState::s(5), Role::Proposer),
        (SimState::s(5), Role::Responder),
    ];
    for snap in &c.snapshots {
        let mut line = format!("round {:>8}:", snap.round);
        for (s, role) in rows {
            let d = snap.unconditional.distribution(s, role).unwrap();
            line += &format!("  {s}/{} l,m,h={:.2?}", &role.as_str()[..4], d);
        }
        println!("{line}");
    }
}
