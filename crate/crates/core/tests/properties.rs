mod common;

use proptest::prelude::*;

use common::{close, levels, oracle, replay, script};
use ultimatum_ql::engine::{RoleScheme, RoundRecord, TwoPlayerGame};
use ultimatum_ql::game::{
    deal_succeeds, payoff, q_update, Action, Agent, GameParams, LearningParams, QTable, Role,
    SimState,
};
use ultimatum_ql::metrics::{
    joint_probabilities, net_flow, DealStats, EnsembleAverage, FractionCounts, PreferenceStats,
    TimeSeries, TransitionStats,
};
use ultimatum_ql::rng::SimRng;

fn game() -> impl Strategy<Value = GameParams> {
    (0.01f64..0.49, 0.51f64..0.99).prop_map(|(l, h)| GameParams::new(l, h).unwrap())
}

fn learning() -> impl Strategy<Value = LearningParams> {
    (0.001f64..=1.0, 0.0f64..0.99).prop_map(|(a, g)| LearningParams::new(a, g, 0.0).unwrap())
}

fn moves(max: usize) -> impl Strategy<Value = Vec<(usize, usize)>> {
    prop::collection::vec((0usize..3, 0usize..3), 1..max)
}

fn table() -> impl Strategy<Value = QTable> {
    prop::array::uniform9(prop::array::uniform3(-5.0f64..5.0)).prop_map(QTable::from_rows)
}

fn records(g: &GameParams, start: usize, mv: &[(usize, usize)]) -> Vec<RoundRecord> {
    script(SimState::from_index(start), mv, levels(g.low(), g.high()))
}

proptest! {
    #[test]
    fn payoffs_split_the_unit_or_vanish(g in game(), p in 0usize..3, q in 0usize..3) {
        let (p, q) = (Action::from_index(p), Action::from_index(q));
        let pp = payoff(Role::Proposer, p, q, &g);
        let pr = payoff(Role::Responder, q, p, &g);
        if deal_succeeds(p, q) {
            prop_assert!(close(pp + pr, 1.0, 1e-15));
            prop_assert_eq!(pr, g.value(p));
        } else {
            prop_assert_eq!((pp, pr), (0.0, 0.0));
        }
        prop_assert_eq!(deal_succeeds(p, q), g.value(p) >= g.value(q));
    }

    #[test]
    fn update_moves_one_cell_toward_its_target(
        t in table(), l in learning(), s in 0usize..9, a in 0usize..3, next in 0usize..9, r in -1.0f64..1.0,
    ) {
        let (s, a, next) = (SimState::from_index(s), Action::from_index(a), SimState::from_index(next));
        let mut u = t.clone();
        q_update(&mut u, s, a, r, next, &l);
        let old = t.get(s, a);
        let target = r + l.gamma() * t.max_value(next);
        let new = u.get(s, a);
        let slack = 1e-12 * (1.0 + old.abs() + target.abs());
        prop_assert!(new >= old.min(target) - slack && new <= old.max(target) + slack);
        for st in SimState::all() {
            for b in Action::ALL {
                if (st, b) != (s, a) {
                    prop_assert_eq!(u.get(st, b), t.get(st, b));
                }
            }
        }
    }

    #[test]
    fn values_stay_in_the_reward_range(
        l in learning(), seed in any::<u64>(), steps in 1usize..400,
    ) {
        let mut rng = SimRng::from_seed_u64(seed);
        let bound = 1.0 / (1.0 - l.gamma());
        let mut t = QTable::random(&mut rng);
        for _ in 0..steps {
            let s = SimState::random(&mut rng);
            let next = SimState::random(&mut rng);
            let a = Action::from_index((seed as usize + steps) % 3);
            let r = [0.0, 0.2, 0.5, 0.7, 1.0][steps % 5];
            q_update(&mut t, s, a, r, next, &l);
        }
        for v in t.rows().iter().flatten() {
            prop_assert!(*v >= 0.0 && *v <= bound + 1e-12);
        }
    }

    #[test]
    fn self_loop_converges_to_discounted_reward(
        r in 0.0f64..1.0, alpha in 0.05f64..=1.0, gamma in 0.0f64..0.95, start in 0.0f64..1.0,
    ) {
        let l = LearningParams::new(alpha, gamma, 0.0).unwrap();
        let s = SimState::s(5);
        let mut t = QTable::zeros();
        t.set(s, Action::Mid, start);
        for _ in 0..200_000 {
            let before = t.get(s, Action::Mid);
            q_update(&mut t, s, Action::Mid, r, s, &l);
            if (t.get(s, Action::Mid) - before).abs() < 1e-15 {
                break;
            }
        }
        prop_assert!(close(t.get(s, Action::Mid), r / (1.0 - gamma), 1e-9));
    }

    #[test]
    fn merging_split_histories_equals_one_pass(
        g in game(), start in 0usize..9, mv in moves(300), cut in 0usize..300,
    ) {
        let recs = records(&g, start, &mv);
        let cut = cut % (recs.len() + 1);
        let (a, b) = recs.split_at(cut);
        let fold = |rs: &[RoundRecord]| {
            let mut f = FractionCounts::default();
            let mut d = DealStats::default();
            let mut t = TransitionStats::default();
            let mut ts = TimeSeries::new(7, recs.len() as u64);
            for r in rs {
                f.record(r);
                d.record(r);
                t.record_round(r);
                ts.record(r);
            }
            (f, d, t, ts)
        };
        let (mut f, mut d, mut t, mut ts) = fold(a);
        let rest = fold(b);
        f.merge(&rest.0);
        d.merge(&rest.1);
        t.merge(&rest.2);
        ts.merge(&rest.3);
        prop_assert_eq!((f, d, t, ts), fold(&recs));
    }

    #[test]
    fn ensemble_sums_are_order_free(values in prop::collection::vec(-1e6f64..1e6, 1..60), cut in 0usize..60) {
        let cut = cut % values.len();
        let whole: EnsembleAverage = values.iter().copied().collect();
        let mut left: EnsembleAverage = values[cut..].iter().copied().collect();
        left.merge(&values[..cut].iter().copied().collect());
        prop_assert_eq!(whole.mean().unwrap().to_bits(), left.mean().unwrap().to_bits());
        prop_assert_eq!(whole.variance().unwrap().to_bits(), left.variance().unwrap().to_bits());
    }

    #[test]
    fn preference_merge_is_additive(seed in any::<u64>()) {
        let mut rng = SimRng::from_seed_u64(seed);
        let tables: Vec<QTable> = (0..4).map(|_| QTable::random(&mut rng)).collect();
        let mut all = PreferenceStats::default();
        let mut a = PreferenceStats::default();
        let mut b = PreferenceStats::default();
        for (i, t) in tables.iter().enumerate() {
            all.add_table(t, Role::Proposer);
            if i < 2 { a.add_table(t, Role::Proposer) } else { b.add_table(t, Role::Proposer) }
        }
        a.merge(&b);
        prop_assert_eq!(a, all);
    }

    #[test]
    fn net_flow_is_antisymmetric(g in game(), start in 0usize..9, mv in moves(200)) {
        let mut t = TransitionStats::default();
        for r in records(&g, start, &mv) {
            t.record_round(&r);
        }
        let dp = net_flow(&joint_probabilities(&t).unwrap());
        for i in 0..9 {
            prop_assert_eq!(dp[i][i], 0.0);
            for j in 0..9 {
                prop_assert_eq!(dp[i][j], -dp[j][i]);
            }
        }
    }

    #[test]
    fn conditional_rows_are_distributions(g in game(), start in 0usize..9, mv in moves(200)) {
        let mut t = TransitionStats::default();
        for r in records(&g, start, &mv) {
            t.record_round(&r);
        }
        for (i, row) in t.conditional().iter().enumerate() {
            let visits: u64 = t.counts()[i].iter().sum();
            match row {
                Some(p) => prop_assert!(close(p.iter().sum::<f64>(), 1.0, 1e-12)),
                None => prop_assert_eq!(visits, 0),
            }
        }
    }

    /// Library metrics on scripted 20-round histories agree with the naive
    /// recomputation.
    #[test]
    fn metrics_match_brute_force(g in game(), start in 0usize..9, mv in prop::collection::vec((0usize..3, 0usize..3), 20)) {
        let recs = records(&g, start, &mv);
        let want = oracle(&recs);
        let mut f = FractionCounts::default();
        let mut d = DealStats::default();
        let mut t = TransitionStats::default();
        for r in &recs {
            f.record(r);
            d.record(r);
            t.record_round(r);
            prop_assert_eq!(r.proposer_payoff, payoff(Role::Proposer, r.proposer_action, r.responder_action, &g));
        }
        let got = f.fractions();
        for k in 0..3 {
            prop_assert!(close(got.proposer[k], want.proposer[k], 1e-12));
            prop_assert!(close(got.responder[k], want.responder[k], 1e-12));
        }
        for k in 0..9 {
            prop_assert!(close(got.states[k], want.states[k], 1e-12));
        }
        prop_assert!(close(d.deal_rate().unwrap(), want.deal_rate, 1e-12));
        for (ri, role) in Role::ALL.into_iter().enumerate() {
            for a in Action::ALL {
                let (sr, mp) = (want.success_rate[ri][a.index()], want.mean_payoff[ri][a.index()]);
                prop_assert_eq!(d.success_rate(role, a).is_some(), sr.is_some());
                if let (Some(x), Some(y)) = (d.success_rate(role, a), sr) {
                    prop_assert!(close(x, y, 1e-12));
                }
                if let (Some(x), Some(y)) = (d.mean_payoff(role, a, &g), mp) {
                    prop_assert!(close(x, y, 1e-12));
                }
            }
        }
        prop_assert_eq!(*t.counts(), want.transitions);
        let dp = net_flow(&joint_probabilities(&t).unwrap());
        for i in 0..9 {
            prop_assert_eq!(t.conditional()[i].is_some(), want.conditional[i].is_some());
            if let (Some(x), Some(y)) = (t.conditional()[i], want.conditional[i]) {
                for j in 0..9 {
                    prop_assert!(close(x[j], y[j], 1e-12));
                }
            }
            for j in 0..9 {
                prop_assert!(close(dp[i][j], want.net_flow[i][j], 1e-12));
            }
        }
    }

    /// The engine's tables equal a naive replay of its own action history.
    #[test]
    fn engine_updates_match_replay(
        seed in any::<u64>(), g in game(), alpha in 0.01f64..=1.0, gamma in 0.0f64..0.99,
        eps in 0.0f64..=1.0, scheme in prop::sample::select(vec![RoleScheme::Rotating, RoleScheme::Random, RoleScheme::Fixed]),
    ) {
        let learn = LearningParams::new(alpha, gamma, eps).unwrap();
        let mut rng = SimRng::from_seed_u64(seed ^ 0x5eed);
        let agents = [Agent::random(&mut rng), Agent::random(&mut rng)];
        let start = SimState::random(&mut rng);
        let mut engine = TwoPlayerGame::with_agents(agents.clone(), start, g, learn, scheme, rng);
        let recs: Vec<RoundRecord> = (0..20).map(|_| engine.step()).collect();
        let mut state = start;
        for r in &recs {
            prop_assert_eq!(r.state_before, state);
            prop_assert_eq!(r.state_after, SimState::new(r.proposer_action, r.responder_action));
            state = r.state_after;
        }
        let want = replay(&agents, &recs, &learn);
        for (i, a) in engine.agents().iter().enumerate() {
            prop_assert_eq!(a.proposer.rows(), &want[i][0]);
            prop_assert_eq!(a.responder.rows(), &want[i][1]);
        }
    }
}
