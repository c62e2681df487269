//! Closed-form stabilized Q-values and the learning-rate boundary, checked
//! against direct iteration of the update rule.
//!
//!     cargo run --example theory_boundary -- [l]

use ultimatum_ql::game::{q_update, Action, GameParams, LearningParams, QTable, SimState};
use ultimatum_ql::theory::{balance_residual, boundary_curve, fixed_points};

fn main() {
    let low: f64 = std::env::args()
        .nth(1)
        .map_or(0.3, |s| s.parse().expect("l"));
    let game = GameParams::new(low, 0.8).expect("0 < l < 0.5");

    let gammas: Vec<f64> = (0..=19).map(|k| k as f64 * 0.05).collect();
    let curve = boundary_curve(&game, &gammas).unwrap();
    println!("gamma  alpha_boundary  residual");
    for (g, b) in &curve.points {
        let a = b.alpha().unwrap_or(f64::NAN);
        let r = balance_residual(&game, *g, a).unwrap();
        println!("{g:5.2}  {a:14.6}  {r:9.2e}");
    }

    // The fair self-loop s5 -> s5 converges to 0.5 / (1 - gamma).
    let gamma = 0.9;
    let learn = LearningParams::new(0.1, gamma, 0.0).unwrap();
    let s5 = SimState::s(5);
    let mut table = QTable::zeros();
    for _ in 0..5_000 {
        q_update(&mut table, s5, Action::Mid, 0.5, s5, &learn);
    }
    let fp = fixed_points(&game, gamma).unwrap();
    println!(
        "\nQ*[s5, p_m]: closed form {:.9}, iterated {:.9}",
        fp.fair_self_loop,
        table.get(s5, Action::Mid)
    );
    println!("Q*[s1, p_l]: closed form {:.9}", fp.rational_self_loop);
}
