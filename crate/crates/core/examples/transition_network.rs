//! State-transition network with frequent exploration: conditional
//! probabilities above 0.05, node occupancy, and the strongest net flows.
//!
//!     cargo run --release --example transition_network -- [alpha] [gamma] [steps]

use ultimatum_ql::engine::RunConfig;
use ultimatum_ql::experiment::{simulate, Plan, Window};
use ultimatum_ql::game::{LearningParams, SimState};
use ultimatum_ql::metrics::{joint_probabilities, net_flow, transition_network};

fn main() {
    let mut args = std::env::args().skip(1);
    let alpha: f64 = args.next().map_or(0.1, |s| s.parse().expect("alpha"));
    let gamma: f64 = args.next().map_or(0.1, |s| s.parse().expect("gamma"));
    let steps: u64 = args.next().map_or(500_000, |s| s.parse().expect("steps"));

    let run = RunConfig {
        learn: LearningParams::new(alpha, gamma, 0.1).unwrap(),
        steps,
        transient: steps / 2,
        window: steps / 2,
        ..RunConfig::default()
    };
    let window = Window::new(run.transient, run.steps);
    let plan = Plan {
        transitions: vec![window],
        ..Plan::window_only(&run)
    };
    let c = simulate(&run, &plan, 3, 0, 10).expect("simulation");
    let stats = &c.transitions[0];

    let net = transition_network(stats, 0.05);
    println!("occupancy:");
    for s in SimState::all() {
        println!("  {s} {:.3}", net.occupancy[s.index()]);
    }
    println!("edges p(s'|s) >= 0.05:");
    for e in &net.edges {
        println!("  {} -> {} {:.3}", e.from, e.to, e.probability);
    }

    let flow = net_flow(&joint_probabilities(stats).expect("non-empty window"));
    let mut flows: Vec<(f64, SimState, SimState)> = SimState::all()
        .flat_map(|a| SimState::all().map(move |b| (a, b)))
        .map(|(a, b)| (flow[a.index()][b.index()], a, b))
        .filter(|(v, _, _)| *v > 0.0)
        .collect();
    flows.sort_by(|x, y| y.0.total_cmp(&x.0));
    println!("largest net flows:");
    for (v, a, b) in flows.iter().take(5) {
        println!("  {a} -> {b} {v:.5}");
    }
}
