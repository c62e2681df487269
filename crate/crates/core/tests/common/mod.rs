//! Brute-force reference computations used to cross-check the library.
//!
//! Everything here is written from the game rules directly, without calling
//! the library's payoff, metric or update code.

#![allow(dead_code)]

use ultimatum_ql::engine::RoundRecord;
use ultimatum_ql::game::{Action, Agent, LearningParams, SimState};

/// Option values `[l, m, h]`.
pub fn levels(low: f64, high: f64) -> [f64; 3] {
    [low, 0.5, high]
}

/// Builds the record of a scripted round from first principles.
pub fn scripted_record(
    round: u64,
    before: SimState,
    p: usize,
    q: usize,
    v: [f64; 3],
) -> RoundRecord {
    let success = p >= q;
    let (pp, pr) = if success {
        (1.0 - v[p], v[p])
    } else {
        (0.0, 0.0)
    };
    RoundRecord {
        round,
        proposer_id: (round % 2) as usize,
        responder_id: 1 - (round % 2) as usize,
        proposer_action: Action::from_index(p),
        responder_action: Action::from_index(q),
        success,
        proposer_payoff: pp,
        responder_payoff: pr,
        state_before: before,
        state_after: SimState::from_index(3 * p + q),
        explored: [false, false],
    }
}

/// Chains scripted `(p, q)` index pairs into records starting from `start`.
pub fn script(start: SimState, moves: &[(usize, usize)], v: [f64; 3]) -> Vec<RoundRecord> {
    let mut state = start;
    moves
        .iter()
        .enumerate()
        .map(|(t, &(p, q))| {
            let r = scripted_record(t as u64, state, p, q, v);
            state = r.state_after;
            r
        })
        .collect()
}

/// Every metric of a record sequence, recomputed naively.
#[derive(Debug, Clone)]
pub struct Oracle {
    pub proposer: [f64; 3],
    pub responder: [f64; 3],
    pub states: [f64; 9],
    pub deal_rate: f64,
    /// `[role][option]`, `None` when never played.
    pub success_rate: [[Option<f64>; 3]; 2],
    pub mean_payoff: [[Option<f64>; 3]; 2],
    pub transitions: [[u64; 9]; 9],
    pub conditional: [Option<[f64; 9]>; 9],
    pub net_flow: [[f64; 9]; 9],
}

pub fn oracle(records: &[RoundRecord]) -> Oracle {
    let n = records.len() as f64;
    let mut proposer = [0.0; 3];
    let mut responder = [0.0; 3];
    let mut states = [0.0; 9];
    let mut deals = 0.0;
    let mut tries = [[0u64; 3]; 2];
    let mut wins = [[0u64; 3]; 2];
    let mut pay = [[0.0f64; 3]; 2];
    let mut transitions = [[0u64; 9]; 9];
    for r in records {
        let p = r.proposer_action.index();
        let q = r.responder_action.index();
        proposer[p] += 1.0 / n;
        responder[q] += 1.0 / n;
        states[r.state_after.index()] += 1.0 / n;
        if r.success {
            deals += 1.0;
        }
        for (role, opt, payoff) in [(0, p, r.proposer_payoff), (1, q, r.responder_payoff)] {
            tries[role][opt] += 1;
            wins[role][opt] += r.success as u64;
            pay[role][opt] += payoff;
        }
        transitions[r.state_before.index()][r.state_after.index()] += 1;
    }
    let mut success_rate = [[None; 3]; 2];
    let mut mean_payoff = [[None; 3]; 2];
    for role in 0..2 {
        for opt in 0..3 {
            if tries[role][opt] > 0 {
                success_rate[role][opt] = Some(wins[role][opt] as f64 / tries[role][opt] as f64);
                mean_payoff[role][opt] = Some(pay[role][opt] / tries[role][opt] as f64);
            }
        }
    }
    let mut conditional = [None; 9];
    for i in 0..9 {
        let row: u64 = transitions[i].iter().sum();
        if row > 0 {
            let mut c = [0.0; 9];
            for j in 0..9 {
                c[j] = transitions[i][j] as f64 / row as f64;
            }
            conditional[i] = Some(c);
        }
    }
    let total: u64 = transitions.iter().flatten().sum();
    let mut net_flow = [[0.0; 9]; 9];
    for i in 0..9 {
        for j in 0..9 {
            net_flow[i][j] =
                (transitions[i][j] as f64 - transitions[j][i] as f64) / total.max(1) as f64;
        }
    }
    Oracle {
        proposer,
        responder,
        states,
        deal_rate: deals / n,
        success_rate,
        mean_payoff,
        transitions,
        conditional,
        net_flow,
    }
}

/// `[agent][role][state][action]` values.
pub type Tables = [[[[f64; 3]; 9]; 2]; 2];

/// Replays the learning rule on plain arrays: the table of the acting role
/// updates `(state_before, own action)` and bootstraps from its own row at
/// `state_after`.
pub fn replay(start: &[Agent; 2], records: &[RoundRecord], learn: &LearningParams) -> Tables {
    let mut q = [[[[0.0; 3]; 9]; 2]; 2];
    for (agent, a) in start.iter().enumerate() {
        q[agent][0] = *a.proposer.rows();
        q[agent][1] = *a.responder.rows();
    }
    let (alpha, gamma) = (learn.alpha(), learn.gamma());
    for r in records {
        let moves = [
            (
                r.proposer_id,
                0,
                r.proposer_action.index(),
                r.proposer_payoff,
            ),
            (
                r.responder_id,
                1,
                r.responder_action.index(),
                r.responder_payoff,
            ),
        ];
        for (agent, role, action, reward) in moves {
            let table = &mut q[agent][role];
            let next = table[r.state_after.index()];
            let best = next[0].max(next[1]).max(next[2]);
            let cell = &mut table[r.state_before.index()][action];
            *cell = (1.0 - alpha) * *cell + alpha * (reward + gamma * best);
        }
    }
    q
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}
