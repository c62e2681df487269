//! A ring population where each agent keeps separate tables for each of its
//! two neighbours. Prints the population option fractions over time.
//!
//!     cargo run --release --example ring_lattice -- [n] [steps]

use ultimatum_ql::lattice::{lattice_fractions, Lattice, LatticeConfig};
use ultimatum_ql::rng::SimRng;

fn main() {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(50, |s| s.parse().expect("n"));
    let steps: u64 = args.next().map_or(200_000, |s| s.parse().expect("steps"));
    let config = LatticeConfig {
        n,
        steps,
        transient: steps - 1,
        window: 1,
        ..LatticeConfig::default()
    };
    config.validate().expect("valid lattice");

    let mut lattice = Lattice::with_rng(&config, SimRng::for_stream(4, 0, 0));
    let report_every = (steps / 10).max(1);
    for t in 0..steps {
        let records = lattice.step();
        if (t + 1) % report_every == 0 {
            let f = lattice_fractions(&records);
            println!(
                "step {:>8}: proposer l/m/h {:.2?}  responder l/m/h {:.2?}",
                t + 1,
                f.proposer,
                f.responder
            );
        }
    }
}
