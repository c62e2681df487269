//! Two-agent repeated ultimatum game.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::game::{
    deal_succeeds, payoff, select_action, Action, Agent, GameParams, LearningParams, QTable, Role,
    SimState,
};
use crate::rng::SimRng;

/// How the proposer is chosen each round.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoleScheme {
    /// Agent 0 proposes on even rounds, agent 1 on odd rounds.
    #[default]
    Rotating,
    /// Proposer drawn uniformly every round.
    Random,
    /// Agent 0 always proposes.
    Fixed,
}

impl RoleScheme {
    pub fn as_str(self) -> &'static str {
        match self {
            RoleScheme::Rotating => "rotating",
            RoleScheme::Random => "random",
            RoleScheme::Fixed => "fixed",
        }
    }

    #[inline]
    fn proposer<R: Rng + ?Sized>(self, round: u64, rng: &mut R) -> usize {
        match self {
            RoleScheme::Rotating => (round % 2) as usize,
            RoleScheme::Random => rng.random_range(0..2),
            RoleScheme::Fixed => 0,
        }
    }
}

impl fmt::Display for RoleScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RoleScheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rotating" => Ok(RoleScheme::Rotating),
            "random" => Ok(RoleScheme::Random),
            "fixed" => Ok(RoleScheme::Fixed),
            other => Err(format!(
                "unknown role scheme `{other}` (expected rotating, random or fixed)"
            )),
        }
    }
}

/// Everything that happened in one round.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: u64,
    pub proposer_id: usize,
    pub responder_id: usize,
    pub proposer_action: Action,
    pub responder_action: Action,
    pub success: bool,
    pub proposer_payoff: f64,
    pub responder_payoff: f64,
    pub state_before: SimState,
    pub state_after: SimState,
    /// `[proposer, responder]` exploration flags.
    pub explored: [bool; 2],
}

/// One realization of the two-player game.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub game: GameParams,
    pub learn: LearningParams,
    pub scheme: RoleScheme,
    pub steps: u64,
    pub transient: u64,
    pub window: u64,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            game: GameParams::default(),
            learn: LearningParams::default(),
            scheme: RoleScheme::Rotating,
            steps: 2_001_000,
            transient: 2_000_000,
            window: 1_000,
            seed: 0,
        }
    }
}

impl RunConfig {
    /// Measurement window `[transient, transient + window)`.
    pub fn window_range(&self) -> std::ops::Range<u64> {
        self.transient..self.transient + self.window
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        validate_schedule(self.steps, self.transient, self.window)
    }
}

/// `steps == 0` is the empty run and carries no window. Otherwise
/// `window >= 1` and `transient + window <= steps`.
pub(crate) fn validate_schedule(
    steps: u64,
    transient: u64,
    window: u64,
) -> Result<(), ConfigError> {
    if steps == 0 {
        return Ok(());
    }
    if window == 0 {
        return Err(ConfigError::range("window", window, "window >= 1"));
    }
    match transient.checked_add(window) {
        Some(end) if end <= steps => Ok(()),
        _ => Err(ConfigError::Invalid(format!(
            "transient ({transient}) + window ({window}) exceeds steps ({steps})"
        ))),
    }
}

/// Plays one round between `agents` in `state` and applies both updates.
///
/// Each player picks from its role table at the shared state, then both
/// update the `(state, own action)` cell of that table with the joint action
/// as the next state.
#[inline]
#[allow(clippy::too_many_arguments)]
pub fn step<R: Rng + ?Sized>(
    agents: &mut [Agent; 2],
    state: SimState,
    scheme: RoleScheme,
    game: &GameParams,
    learn: &LearningParams,
    rng: &mut R,
    round: u64,
) -> RoundRecord {
    let proposer_id = scheme.proposer(round, rng);
    let responder_id = 1 - proposer_id;
    let record = play_pair(
        &mut agents[proposer_id].proposer,
        &mut agents[responder_id].responder,
        state,
        game,
        learn,
        rng,
        round,
    );
    RoundRecord {
        proposer_id,
        responder_id,
        ..record
    }
}

/// Core of a round given the two role tables in play. Ids are left at 0/1.
#[inline]
pub(crate) fn play_pair<R: Rng + ?Sized>(
    proposer_table: &mut QTable,
    responder_table: &mut QTable,
    state: SimState,
    game: &GameParams,
    learn: &LearningParams,
    rng: &mut R,
    round: u64,
) -> RoundRecord {
    let (proposer_action, p_explored) = select_action(proposer_table, state, learn.epsilon(), rng);
    let (responder_action, r_explored) =
        select_action(responder_table, state, learn.epsilon(), rng);
    let success = deal_succeeds(proposer_action, responder_action);
    let proposer_payoff = payoff(Role::Proposer, proposer_action, responder_action, game);
    let responder_payoff = payoff(Role::Responder, responder_action, proposer_action, game);
    let next = SimState::new(proposer_action, responder_action);

    proposer_table.update(state, proposer_action, proposer_payoff, next, learn);
    responder_table.update(state, responder_action, responder_payoff, next, learn);

    RoundRecord {
        round,
        proposer_id: 0,
        responder_id: 1,
        proposer_action,
        responder_action,
        success,
        proposer_payoff,
        responder_payoff,
        state_before: state,
        state_after: next,
        explored: [p_explored, r_explored],
    }
}

/// A live two-player realization.
#[derive(Clone, Debug)]
pub struct TwoPlayerGame {
    agents: [Agent; 2],
    state: SimState,
    round: u64,
    game: GameParams,
    learn: LearningParams,
    scheme: RoleScheme,
    rng: SimRng,
}

impl TwoPlayerGame {
    /// Draws agent 0's tables, agent 1's tables, then the initial state.
    pub fn new(
        game: GameParams,
        learn: LearningParams,
        scheme: RoleScheme,
        mut rng: SimRng,
    ) -> Self {
        let a0 = Agent::random(&mut rng);
        let a1 = Agent::random(&mut rng);
        let state = SimState::random(&mut rng);
        TwoPlayerGame {
            agents: [a0, a1],
            state,
            round: 0,
            game,
            learn,
            scheme,
            rng,
        }
    }

    /// Starts from explicit tables and state.
    pub fn with_agents(
        agents: [Agent; 2],
        state: SimState,
        game: GameParams,
        learn: LearningParams,
        scheme: RoleScheme,
        rng: SimRng,
    ) -> Self {
        TwoPlayerGame {
            agents,
            state,
            round: 0,
            game,
            learn,
            scheme,
            rng,
        }
    }

    pub fn from_config(config: &RunConfig) -> Self {
        Self::new(
            config.game,
            config.learn,
            config.scheme,
            SimRng::from_seed_u64(config.seed),
        )
    }

    #[inline]
    pub fn step(&mut self) -> RoundRecord {
        let record = step(
            &mut self.agents,
            self.state,
            self.scheme,
            &self.game,
            &self.learn,
            &mut self.rng,
            self.round,
        );
        self.state = record.state_after;
        self.round += 1;
        record
    }

    pub fn agents(&self) -> &[Agent; 2] {
        &self.agents
    }

    pub fn state(&self) -> SimState {
        self.state
    }

    /// Index of the next round to be played.
    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn scheme(&self) -> RoleScheme {
        self.scheme
    }

    /// Tables that actually play `role`. Under fixed roles agent 1 never
    /// proposes and agent 0 never responds, so those tables are left out.
    pub fn active_tables(&self, role: Role) -> Vec<&QTable> {
        match (self.scheme, role) {
            (RoleScheme::Fixed, Role::Proposer) => vec![&self.agents[0].proposer],
            (RoleScheme::Fixed, Role::Responder) => vec![&self.agents[1].responder],
            _ => self.agents.iter().map(|a| a.table(role)).collect(),
        }
    }
}

/// Runs `config.steps` rounds and hands every record to `observe`.
pub fn run_with<F>(config: &RunConfig, mut observe: F) -> Result<TwoPlayerGame, ConfigError>
where
    F: FnMut(&RoundRecord, &TwoPlayerGame),
{
    config.validate()?;
    let mut sim = TwoPlayerGame::from_config(config);
    for _ in 0..config.steps {
        let rec = sim.step();
        observe(&rec, &sim);
    }
    Ok(sim)
}

/// Collects the full record stream of one realization.
pub fn run(config: &RunConfig) -> Result<Vec<RoundRecord>, ConfigError> {
    let mut out = Vec::with_capacity(config.steps.min(1 << 24) as usize);
    run_with(config, |r, _| out.push(*r))?;
    Ok(out)
}
