//! Ultimatum-game kernel: option levels, roles, joint-action states, payoffs,
//! epsilon-greedy selection and the tabular Q-value update.
//!
//! Nothing in here schedules rounds or touches I/O. The engines in
//! `engine` and `lattice` modules drive these pieces.

use std::fmt;

use rand::distr::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// The fair split. Fixed for every game.
pub const FAIR_SHARE: f64 = 0.5;

/// One of the three option levels. A proposer reads it as an offer, a
/// responder as an acceptance threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Action {
    Low = 0,
    Mid = 1,
    High = 2,
}

impl Action {
    pub const ALL: [Action; 3] = [Action::Low, Action::Mid, Action::High];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    /// Panics if `index > 2`.
    #[inline]
    pub fn from_index(index: usize) -> Action {
        Action::ALL[index]
    }

    /// Single-letter label used in CSV column names.
    pub fn letter(self) -> char {
        match self {
            Action::Low => 'l',
            Action::Mid => 'm',
            Action::High => 'h',
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    Proposer,
    Responder,
}

impl Role {
    pub const ALL: [Role; 2] = [Role::Proposer, Role::Responder];

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Proposer => "proposer",
            Role::Responder => "responder",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The three levels `l < 0.5 < h` of a unit pie.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameParams {
    low: f64,
    high: f64,
}

impl GameParams {
    pub fn new(low: f64, high: f64) -> Result<Self, ConfigError> {
        if !(low > 0.0 && low < FAIR_SHARE) {
            return Err(ConfigError::range("l", low, "0 < l < 0.5"));
        }
        if !(high > FAIR_SHARE && high < 1.0) {
            return Err(ConfigError::range("h", high, "0.5 < h < 1"));
        }
        Ok(GameParams { low, high })
    }

    pub fn low(&self) -> f64 {
        self.low
    }

    pub fn mid(&self) -> f64 {
        FAIR_SHARE
    }

    pub fn high(&self) -> f64 {
        self.high
    }

    #[inline]
    pub fn value(&self, action: Action) -> f64 {
        match action {
            Action::Low => self.low,
            Action::Mid => FAIR_SHARE,
            Action::High => self.high,
        }
    }
}

impl Default for GameParams {
    fn default() -> Self {
        GameParams {
            low: 0.3,
            high: 0.8,
        }
    }
}

/// Learning rate, discount factor and exploration probability.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearningParams {
    alpha: f64,
    gamma: f64,
    epsilon: f64,
}

impl LearningParams {
    pub fn new(alpha: f64, gamma: f64, epsilon: f64) -> Result<Self, ConfigError> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(ConfigError::range("alpha", alpha, "0 < alpha <= 1"));
        }
        if !(0.0..1.0).contains(&gamma) {
            return Err(ConfigError::range("gamma", gamma, "0 <= gamma < 1"));
        }
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(ConfigError::range("epsilon", epsilon, "0 <= epsilon <= 1"));
        }
        Ok(LearningParams {
            alpha,
            gamma,
            epsilon,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

impl Default for LearningParams {
    fn default() -> Self {
        LearningParams {
            alpha: 0.1,
            gamma: 0.9,
            epsilon: 0.01,
        }
    }
}

/// The previous round's joint action, shared by both players.
///
/// Indexed `s1..s9` as `3 * proposer + responder + 1`, so `s1 = (l, l)`,
/// `s2 = (l, m)`, ..., `s9 = (h, h)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SimState {
    pub proposer: Action,
    pub responder: Action,
}

impl SimState {
    pub const COUNT: usize = 9;

    pub fn new(proposer: Action, responder: Action) -> Self {
        SimState {
            proposer,
            responder,
        }
    }

    /// Zero-based index, `0..9`.
    #[inline]
    pub fn index(self) -> usize {
        3 * self.proposer.index() + self.responder.index()
    }

    /// Panics if `index >= 9`.
    #[inline]
    pub fn from_index(index: usize) -> SimState {
        SimState {
            proposer: Action::from_index(index / 3),
            responder: Action::from_index(index % 3),
        }
    }

    /// One-based label number, `1..=9`.
    pub fn number(self) -> usize {
        self.index() + 1
    }

    /// `s_k` with `k` one-based. Panics outside `1..=9`.
    pub fn s(number: usize) -> SimState {
        assert!(
            (1..=9).contains(&number),
            "state number {number} out of range"
        );
        SimState::from_index(number - 1)
    }

    pub fn all() -> impl Iterator<Item = SimState> {
        (0..Self::COUNT).map(SimState::from_index)
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> SimState {
        SimState::from_index(rng.random_range(0..Self::COUNT))
    }
}

impl fmt::Display for SimState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.number())
    }
}

/// Success predicate of a single deal: offer at least the threshold.
#[inline]
pub fn deal_succeeds(proposer_action: Action, responder_action: Action) -> bool {
    // l < m < h, so level order and value order agree.
    proposer_action >= responder_action
}

/// Reward of the focal player in `role`, given its own level and the
/// opponent's level.
#[inline]
pub fn payoff(role: Role, own_action: Action, opponent_action: Action, params: &GameParams) -> f64 {
    let (offer, threshold) = match role {
        Role::Proposer => (own_action, opponent_action),
        Role::Responder => (opponent_action, own_action),
    };
    if !deal_succeeds(offer, threshold) {
        return 0.0;
    }
    let p = params.value(offer);
    match role {
        Role::Proposer => 1.0 - p,
        Role::Responder => p,
    }
}

/// 9 states x 3 actions of action values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QTable {
    values: [[f64; 3]; 9],
}

impl QTable {
    pub fn from_rows(values: [[f64; 3]; 9]) -> Self {
        QTable { values }
    }

    pub fn zeros() -> Self {
        QTable {
            values: [[0.0; 3]; 9],
        }
    }

    /// Every entry drawn i.i.d. from the open interval (0, 1).
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut values = [[0.0; 3]; 9];
        for row in values.iter_mut() {
            for v in row.iter_mut() {
                *v = rng.sample(Open01);
            }
        }
        QTable { values }
    }

    #[inline]
    pub fn get(&self, state: SimState, action: Action) -> f64 {
        self.values[state.index()][action.index()]
    }

    pub fn set(&mut self, state: SimState, action: Action, value: f64) {
        self.values[state.index()][action.index()] = value;
    }

    #[inline]
    pub fn row(&self, state: SimState) -> &[f64; 3] {
        &self.values[state.index()]
    }

    pub fn row_mut(&mut self, state: SimState) -> &mut [f64; 3] {
        &mut self.values[state.index()]
    }

    pub fn rows(&self) -> &[[f64; 3]; 9] {
        &self.values
    }

    #[inline]
    pub fn max_value(&self, state: SimState) -> f64 {
        let [a, b, c] = *self.row(state);
        let ab = if a >= b { a } else { b };
        if ab >= c {
            ab
        } else {
            c
        }
    }

    /// Actions attaining the row maximum, in level order.
    pub fn maximizers(&self, state: SimState) -> impl Iterator<Item = Action> + '_ {
        let max = self.max_value(state);
        Action::ALL
            .into_iter()
            .filter(move |a| self.get(state, *a) == max)
    }

    /// One Bellman step on the `(state, action)` cell:
    /// `Q <- (1 - alpha) Q + alpha (reward + gamma * max_a' Q[next_state, a'])`.
    ///
    /// The bootstrap maximum is read from this same table before the write.
    #[inline]
    pub fn update(
        &mut self,
        state: SimState,
        action: Action,
        reward: f64,
        next_state: SimState,
        learn: &LearningParams,
    ) {
        let target = reward + learn.gamma * self.max_value(next_state);
        let cell = &mut self.values[state.index()][action.index()];
        *cell = (1.0 - learn.alpha) * *cell + learn.alpha * target;
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().flatten().all(|v| v.is_finite())
    }
}

/// Greedy row argmax with uniform tie-breaking among exact maximizers.
#[inline]
pub fn greedy_action<R: Rng + ?Sized>(table: &QTable, state: SimState, rng: &mut R) -> Action {
    let [a, b, c] = *table.row(state);
    let best = if a >= b {
        if a >= c {
            0
        } else {
            2
        }
    } else if b >= c {
        1
    } else {
        2
    };
    let max = [a, b, c][best];
    let ties = (a == max) as usize + (b == max) as usize + (c == max) as usize;
    if ties == 1 {
        return Action::from_index(best);
    }
    let mut pick = rng.random_range(0..ties);
    for (i, v) in [a, b, c].into_iter().enumerate() {
        if v == max {
            if pick == 0 {
                return Action::from_index(i);
            }
            pick -= 1;
        }
    }
    unreachable!("at least one entry equals the row maximum")
}

/// Epsilon-greedy choice. Returns the action and whether it was an
/// exploration draw. Exploration is uniform over all three levels.
///
/// The exploration coin is one 32-bit draw compared against
/// `epsilon * 2^32`, so `epsilon = 1` always explores.
#[inline]
pub fn select_action<R: Rng + ?Sized>(
    table: &QTable,
    state: SimState,
    epsilon: f64,
    rng: &mut R,
) -> (Action, bool) {
    let threshold = (epsilon * 4_294_967_296.0) as u64;
    if (rng.next_u32() as u64) < threshold {
        (Action::from_index(rng.random_range(0..3)), true)
    } else {
        (greedy_action(table, state, rng), false)
    }
}

/// Standalone form of [`QTable::update`].
pub fn q_update(
    table: &mut QTable,
    state: SimState,
    action: Action,
    reward: f64,
    next_state: SimState,
    learn: &LearningParams,
) {
    table.update(state, action, reward, next_state, learn);
}

/// Fresh table with entries uniform on (0, 1).
pub fn init_qtable<R: Rng + ?Sized>(rng: &mut R) -> QTable {
    QTable::random(rng)
}

/// A learner with one table per role.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Agent {
    pub proposer: QTable,
    pub responder: QTable,
}

impl Agent {
    /// Draws the proposer table first, then the responder table.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let proposer = QTable::random(rng);
        let responder = QTable::random(rng);
        Agent {
            proposer,
            responder,
        }
    }

    pub fn table(&self, role: Role) -> &QTable {
        match role {
            Role::Proposer => &self.proposer,
            Role::Responder => &self.responder,
        }
    }

    pub fn table_mut(&mut self, role: Role) -> &mut QTable {
        match role {
            Role::Proposer => &mut self.proposer,
            Role::Responder => &mut self.responder,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SimRng;

    fn game() -> GameParams {
        GameParams::default()
    }

    #[test]
    fn payoff_examples() {
        let g = game();
        assert!((payoff(Role::Proposer, Action::Low, Action::Low, &g) - 0.7).abs() < 1e-15);
        assert_eq!(payoff(Role::Proposer, Action::Low, Action::Mid, &g), 0.0);
        assert_eq!(payoff(Role::Responder, Action::Mid, Action::High, &g), 0.8);
    }

    #[test]
    fn boundary_offer_is_a_deal() {
        assert!(deal_succeeds(Action::Mid, Action::Mid));
        assert!(!deal_succeeds(Action::Low, Action::High));
        assert!(deal_succeeds(Action::High, Action::Low));
        let g = game();
        assert_eq!(payoff(Role::Responder, Action::Mid, Action::Mid, &g), 0.5);
    }

    #[test]
    fn state_numbering_follows_table_order() {
        assert_eq!(SimState::new(Action::Low, Action::Low).number(), 1);
        assert_eq!(SimState::new(Action::Low, Action::Mid).number(), 2);
        assert_eq!(SimState::new(Action::Mid, Action::Low).number(), 4);
        assert_eq!(SimState::new(Action::Mid, Action::Mid).number(), 5);
        assert_eq!(SimState::new(Action::High, Action::High).number(), 9);
        for s in SimState::all() {
            assert_eq!(SimState::from_index(s.index()), s);
        }
    }

    #[test]
    fn params_reject_out_of_range() {
        assert!(GameParams::new(0.6, 0.8).is_err());
        assert!(GameParams::new(0.3, 0.5).is_err());
        assert!(GameParams::new(0.0, 0.8).is_err());
        assert!(LearningParams::new(0.0, 0.9, 0.01).is_err());
        assert!(LearningParams::new(0.1, 1.0, 0.01).is_err());
        assert!(LearningParams::new(0.1, 0.9, 1.5).is_err());
        assert!(LearningParams::new(1.0, 0.0, 1.0).is_ok());
    }

    #[test]
    fn greedy_unique_max() {
        let mut t = QTable::zeros();
        let s = SimState::s(3);
        *t.row_mut(s) = [0.2, 0.9, 0.1];
        let mut rng = SimRng::from_seed_u64(1);
        for _ in 0..100 {
            assert_eq!(select_action(&t, s, 0.0, &mut rng), (Action::Mid, false));
        }
    }

    #[test]
    fn greedy_ties_split_evenly() {
        let mut t = QTable::zeros();
        let s = SimState::s(1);
        *t.row_mut(s) = [0.5, 0.5, 0.1];
        let mut rng = SimRng::from_seed_u64(2);
        let n = 20_000;
        let lows = (0..n)
            .filter(|_| {
                let (a, _) = select_action(&t, s, 0.0, &mut rng);
                assert_ne!(a, Action::High);
                a == Action::Low
            })
            .count();
        let frac = lows as f64 / n as f64;
        // 5 sigma for a fair coin at n = 20000 is about 0.018.
        assert!((frac - 0.5).abs() < 0.02, "{frac}");
    }

    #[test]
    fn full_exploration_is_uniform() {
        let mut t = QTable::zeros();
        let s = SimState::s(5);
        *t.row_mut(s) = [0.0, 10.0, 0.0];
        let mut rng = SimRng::from_seed_u64(3);
        let mut counts = [0usize; 3];
        let n = 30_000;
        for _ in 0..n {
            let (a, explored) = select_action(&t, s, 1.0, &mut rng);
            assert!(explored);
            counts[a.index()] += 1;
        }
        for c in counts {
            assert!(
                (c as f64 / n as f64 - 1.0 / 3.0).abs() < 0.015,
                "{counts:?}"
            );
        }
    }

    #[test]
    fn update_examples() {
        let learn = LearningParams::new(0.1, 0.9, 0.0).unwrap();
        let mut t = QTable::zeros();
        t.update(SimState::s(1), Action::Low, 0.5, SimState::s(2), &learn);
        assert!((t.get(SimState::s(1), Action::Low) - 0.05).abs() < 1e-15);

        let overwrite = LearningParams::new(1.0, 0.9, 0.0).unwrap();
        let mut t = QTable::zeros();
        t.set(SimState::s(4), Action::High, 123.0);
        *t.row_mut(SimState::s(7)) = [0.1, 2.0, 0.3];
        t.update(
            SimState::s(4),
            Action::High,
            0.25,
            SimState::s(7),
            &overwrite,
        );
        assert!((t.get(SimState::s(4), Action::High) - (0.25 + 0.9 * 2.0)).abs() < 1e-15);
    }

    #[test]
    fn update_touches_exactly_one_cell() {
        let mut rng = SimRng::from_seed_u64(9);
        let before = QTable::random(&mut rng);
        let mut after = before.clone();
        let learn = LearningParams::default();
        after.update(SimState::s(2), Action::High, 0.3, SimState::s(8), &learn);
        let changed = before
            .rows()
            .iter()
            .flatten()
            .zip(after.rows().iter().flatten())
            .filter(|(a, b)| a != b)
            .count();
        assert_eq!(changed, 1);
    }

    #[test]
    fn self_loop_converges_to_geometric_value() {
        let learn = LearningParams::new(0.1, 0.9, 0.0).unwrap();
        let s5 = SimState::s(5);
        let mut t = QTable::zeros();
        // Contraction rate 1 - alpha (1 - gamma) = 0.99 per step.
        for _ in 0..3000 {
            t.update(s5, Action::Mid, 0.5, s5, &learn);
        }
        assert!((t.get(s5, Action::Mid) - 5.0).abs() < 1e-9);
    }

    #[test]
    fn init_table_is_seeded_and_open_unit() {
        let a = init_qtable(&mut SimRng::from_seed_u64(7));
        let b = init_qtable(&mut SimRng::from_seed_u64(7));
        let c = init_qtable(&mut SimRng::from_seed_u64(8));
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.rows().iter().flatten().all(|v| *v > 0.0 && *v < 1.0));
    }
}
