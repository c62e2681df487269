//! Ring population: every agent plays the ultimatum game with its two
//! nearest neighbours, keeping a separate pair of role tables and a separate
//! game state for each neighbour.
//!
//! Edge `i` joins agents `i` and `(i + 1) mod n`. Each step plays every edge
//! once, in increasing edge index. On an edge, the endpoint with the lower
//! agent index proposes on even rounds and responds on odd rounds. Edges share
//! nothing except the random stream, which they consume in edge order.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{play_pair, validate_schedule, RoundRecord};
use crate::error::ConfigError;
use crate::game::{Agent, GameParams, LearningParams, QTable, Role, SimState};
use crate::metrics::{FractionCounts, FractionPoint};
use crate::rng::SimRng;

/// Neighbours per agent on the ring.
pub const NEIGHBOURS: usize = 2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeConfig {
    pub n: usize,
    pub game: GameParams,
    pub learn: LearningParams,
    pub steps: u64,
    pub transient: u64,
    pub window: u64,
    pub seed: u64,
}

impl Default for LatticeConfig {
    fn default() -> Self {
        LatticeConfig {
            n: 50,
            game: GameParams::default(),
            learn: LearningParams::default(),
            steps: 1_000_000,
            transient: 999_000,
            window: 1_000,
            seed: 0,
        }
    }
}

impl LatticeConfig {
    pub fn k(&self) -> usize {
        NEIGHBOURS
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n < 3 {
            return Err(ConfigError::range("n", self.n, "n >= 3"));
        }
        validate_schedule(self.steps, self.transient, self.window)
    }

    pub fn window_range(&self) -> std::ops::Range<u64> {
        self.transient..self.transient + self.window
    }
}

/// One ring edge with its own state and the four tables used on it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeContext {
    /// Endpoints, lower agent index first.
    pub endpoints: [usize; 2],
    pub state: SimState,
    /// `tables[j]` belongs to `endpoints[j]`.
    pub tables: [Agent; 2],
}

impl EdgeContext {
    /// Draws the lower endpoint's tables, the upper endpoint's tables, then
    /// the state.
    pub fn random<R: Rng + ?Sized>(a: usize, b: usize, rng: &mut R) -> Self {
        let endpoints = [a.min(b), a.max(b)];
        let lower = Agent::random(rng);
        let upper = Agent::random(rng);
        let state = SimState::random(rng);
        EdgeContext {
            endpoints,
            state,
            tables: [lower, upper],
        }
    }

    /// Plays one round on this edge and advances its state.
    #[inline]
    pub fn play<R: Rng + ?Sized>(
        &mut self,
        game: &GameParams,
        learn: &LearningParams,
        rng: &mut R,
        round: u64,
    ) -> RoundRecord {
        let p = (round % 2) as usize;
        let r = 1 - p;
        let [t0, t1] = &mut self.tables;
        let (prop, resp) = if p == 0 {
            (&mut t0.proposer, &mut t1.responder)
        } else {
            (&mut t1.proposer, &mut t0.responder)
        };
        let rec = play_pair(prop, resp, self.state, game, learn, rng, round);
        self.state = rec.state_after;
        RoundRecord {
            proposer_id: self.endpoints[p],
            responder_id: self.endpoints[r],
            ..rec
        }
    }
}

/// Builds the `n` edges of the ring in edge order.
pub fn ring_edges<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<EdgeContext> {
    (0..n)
        .map(|i| EdgeContext::random(i, (i + 1) % n, rng))
        .collect()
}

/// Plays every edge once and hands each record to `observe`, in edge order.
#[inline]
pub fn lattice_step_with<R, F>(
    edges: &mut [EdgeContext],
    game: &GameParams,
    learn: &LearningParams,
    rng: &mut R,
    round: u64,
    mut observe: F,
) where
    R: Rng + ?Sized,
    F: FnMut(&RoundRecord),
{
    for edge in edges.iter_mut() {
        let rec = edge.play(game, learn, rng, round);
        observe(&rec);
    }
}

/// Plays every edge once; one record per edge, in edge order.
pub fn lattice_step<R: Rng + ?Sized>(
    edges: &mut [EdgeContext],
    game: &GameParams,
    learn: &LearningParams,
    rng: &mut R,
    round: u64,
) -> Vec<RoundRecord> {
    let mut out = Vec::with_capacity(edges.len());
    lattice_step_with(edges, game, learn, rng, round, |r| out.push(*r));
    out
}

/// Option fractions over the proposer (and responder) instances of one
/// step, i.e. normalised by the number of edges. State fractions are the
/// share of edges ending in each state.
pub fn lattice_fractions(records: &[RoundRecord]) -> FractionPoint {
    let mut counts = FractionCounts::default();
    for r in records {
        counts.record(r);
    }
    counts.fractions()
}

/// A live ring realization.
#[derive(Clone, Debug)]
pub struct Lattice {
    edges: Vec<EdgeContext>,
    n: usize,
    round: u64,
    game: GameParams,
    learn: LearningParams,
    rng: SimRng,
}

impl Lattice {
    pub fn new(n: usize, game: GameParams, learn: LearningParams, mut rng: SimRng) -> Self {
        let edges = ring_edges(n, &mut rng);
        Lattice {
            edges,
            n,
            round: 0,
            game,
            learn,
            rng,
        }
    }

    pub fn from_config(config: &LatticeConfig) -> Self {
        Self::new(
            config.n,
            config.game,
            config.learn,
            SimRng::from_seed_u64(config.seed),
        )
    }

    pub fn with_rng(config: &LatticeConfig, rng: SimRng) -> Self {
        Self::new(config.n, config.game, config.learn, rng)
    }

    pub fn step_with<F: FnMut(&RoundRecord)>(&mut self, observe: F) {
        lattice_step_with(
            &mut self.edges,
            &self.game,
            &self.learn,
            &mut self.rng,
            self.round,
            observe,
        );
        self.round += 1;
    }

    pub fn step(&mut self) -> Vec<RoundRecord> {
        let mut out = Vec::with_capacity(self.edges.len());
        self.step_with(|r| out.push(*r));
        out
    }

    pub fn edges(&self) -> &[EdgeContext] {
        &self.edges
    }

    pub fn edges_mut(&mut self) -> &mut [EdgeContext] {
        &mut self.edges
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    /// All tables of `role` across the population.
    pub fn tables(&self, role: Role) -> impl Iterator<Item = &QTable> {
        self.edges
            .iter()
            .flat_map(move |e| e.tables.iter().map(move |a| a.table(role)))
    }

    /// Tables owned by `agent`, one proposer and one responder per incident
    /// edge.
    pub fn tables_of(&self, agent: usize) -> Vec<&QTable> {
        self.edges
            .iter()
            .flat_map(|e| {
                e.endpoints
                    .iter()
                    .zip(&e.tables)
                    .filter(move |(id, _)| **id == agent)
                    .flat_map(|(_, a)| [&a.proposer, &a.responder])
            })
            .collect()
    }
}
