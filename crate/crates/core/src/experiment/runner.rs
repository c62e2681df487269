//! Per-realization collection and deterministic ensemble aggregation.

use std::panic::{catch_unwind, AssertUnwindSafe};

use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{RoundRecord, RunConfig, TwoPlayerGame};
use crate::error::{Error, Result};
use crate::game::{QTable, Role};
use crate::lattice::{Lattice, LatticeConfig};
use crate::metrics::{
    DealStats, EnsembleAverage, FractionCounts, FractionPoint, PreferenceStats, TimeSeries,
    TransitionStats,
};
use crate::rng::SimRng;

use super::config::Window;

/// Names of the fifteen per-realization window means, in output order.
pub const FRACTION_NAMES: [&str; 15] = [
    "f_pl", "f_pm", "f_ph", "f_ql", "f_qm", "f_qh", "s1", "s2", "s3", "s4", "s5", "s6", "s7", "s8",
    "s9",
];

/// Flattens a fraction point into [`FRACTION_NAMES`] order.
pub fn fraction_values(f: &FractionPoint) -> [f64; 15] {
    let mut out = [0.0; 15];
    out[..3].copy_from_slice(&f.proposer);
    out[3..6].copy_from_slice(&f.responder);
    out[6..].copy_from_slice(&f.states);
    out
}

/// What to record while a realization runs.
#[derive(Clone, Debug, PartialEq)]
pub struct Plan {
    /// Time-series bin width; `None` skips the series.
    pub series_every: Option<u64>,
    /// Window over which option and state fractions are measured.
    pub window: Window,
    /// Windows of consecutive-state statistics.
    pub transitions: Vec<Window>,
    /// Preference snapshot spacing; `None` skips snapshots.
    pub snapshot_every: Option<u64>,
}

impl Plan {
    /// Only the measurement window of `run`.
    pub fn window_only(run: &RunConfig) -> Self {
        let r = run.window_range();
        Plan {
            series_every: None,
            window: Window::new(r.start, r.end),
            transitions: Vec::new(),
            snapshot_every: None,
        }
    }
}

/// Preference masses at one snapshot time.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Snapshot {
    /// Rounds played before the snapshot.
    pub round: u64,
    /// Every row of every active table.
    pub unconditional: PreferenceStats,
    /// Only the row of the state each realization (or edge) occupies.
    pub conditional: PreferenceStats,
}

/// Everything collected from one or more realizations. Merging is exact, so
/// the result does not depend on the order realizations finish in.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Collected {
    pub realizations: u64,
    pub series: Option<TimeSeries>,
    /// Pooled counts over the measurement window.
    pub window: FractionCounts,
    pub window_deals: DealStats,
    /// Per-realization window fractions, one accumulator per
    /// [`FRACTION_NAMES`] entry.
    pub window_means: Vec<EnsembleAverage>,
    /// One accumulator per planned transition window.
    pub transitions: Vec<TransitionStats>,
    pub snapshots: Vec<Snapshot>,
}

impl Collected {
    fn empty(plan: &Plan, steps: u64) -> Self {
        Collected {
            realizations: 1,
            series: plan.series_every.map(|every| TimeSeries::new(every, steps)),
            window: FractionCounts::default(),
            window_deals: DealStats::default(),
            window_means: Vec::new(),
            transitions: vec![TransitionStats::default(); plan.transitions.len()],
            snapshots: Vec::new(),
        }
    }

    #[inline]
    fn record(&mut self, plan: &Plan, r: &RoundRecord) {
        if let Some(series) = &mut self.series {
            series.record(r);
        }
        if plan.window.contains(r.round) {
            self.window.record(r);
            self.window_deals.record(r);
        }
        for (stats, w) in self.transitions.iter_mut().zip(&plan.transitions) {
            if w.contains(r.round) {
                stats.record_round(r);
            }
        }
    }

    fn finish(&mut self) {
        let values = fraction_values(&self.window.fractions());
        self.window_means = values
            .iter()
            .map(|&v| {
                let mut acc = EnsembleAverage::new();
                if self.window.instances() > 0 {
                    acc.push(v);
                }
                acc
            })
            .collect();
    }

    pub fn merge(&mut self, other: &Collected) {
        self.realizations += other.realizations;
        match (&mut self.series, &other.series) {
            (Some(a), Some(b)) => a.merge(b),
            (None, Some(b)) => self.series = Some(b.clone()),
            _ => {}
        }
        self.window.merge(&other.window);
        self.window_deals.merge(&other.window_deals);
        if self.window_means.len() < other.window_means.len() {
            self.window_means
                .resize(other.window_means.len(), EnsembleAverage::new());
        }
        for (a, b) in self.window_means.iter_mut().zip(&other.window_means) {
            a.merge(b);
        }
        if self.transitions.len() < other.transitions.len() {
            self.transitions
                .resize(other.transitions.len(), TransitionStats::default());
        }
        for (a, b) in self.transitions.iter_mut().zip(&other.transitions) {
            a.merge(b);
        }
        if self.snapshots.is_empty() {
            self.snapshots = other.snapshots.clone();
        } else {
            assert_eq!(
                self.snapshots.len(),
                other.snapshots.len(),
                "snapshot schedules differ"
            );
            for (a, b) in self.snapshots.iter_mut().zip(&other.snapshots) {
                debug_assert_eq!(a.round, b.round);
                a.unconditional.merge(&b.unconditional);
                a.conditional.merge(&b.conditional);
            }
        }
    }

    /// Pooled window fractions.
    pub fn fractions(&self) -> FractionPoint {
        self.window.fractions()
    }
}

fn due(every: Option<u64>, played: u64) -> bool {
    every.is_some_and(|e| played.is_multiple_of(e))
}

fn snapshot_two_player(sim: &TwoPlayerGame, played: u64) -> Snapshot {
    let mut snap = Snapshot {
        round: played,
        ..Snapshot::default()
    };
    for role in Role::ALL {
        for t in sim.active_tables(role) {
            snap.unconditional.add_table(t, role);
            snap.conditional.add_row(t, role, sim.state());
        }
    }
    snap
}

fn snapshot_lattice(sim: &Lattice, played: u64) -> Snapshot {
    let mut snap = Snapshot {
        round: played,
        ..Snapshot::default()
    };
    for edge in sim.edges() {
        for agent in &edge.tables {
            for role in Role::ALL {
                let t = agent.table(role);
                snap.unconditional.add_table(t, role);
                snap.conditional.add_row(t, role, edge.state);
            }
        }
    }
    snap
}

fn check_tables<'a>(tables: impl IntoIterator<Item = &'a QTable>) -> Result<(), String> {
    if tables.into_iter().all(QTable::is_finite) {
        Ok(())
    } else {
        Err("a Q-table holds a non-finite value".into())
    }
}

/// Plays one two-player realization from `rng`.
pub fn collect_two_player(run: &RunConfig, plan: &Plan, rng: SimRng) -> Result<Collected, String> {
    let mut sim = TwoPlayerGame::new(run.game, run.learn, run.scheme, rng);
    let mut out = Collected::empty(plan, run.steps);
    for played in 0..run.steps {
        if due(plan.snapshot_every, played) {
            out.snapshots.push(snapshot_two_player(&sim, played));
        }
        let rec = sim.step();
        out.record(plan, &rec);
    }
    if due(plan.snapshot_every, run.steps) {
        out.snapshots.push(snapshot_two_player(&sim, run.steps));
    }
    check_tables(
        sim.agents()
            .iter()
            .flat_map(|a| [&a.proposer, &a.responder]),
    )?;
    out.finish();
    Ok(out)
}

/// Plays one ring realization from `rng`.
pub fn collect_lattice(cfg: &LatticeConfig, plan: &Plan, rng: SimRng) -> Result<Collected, String> {
    let mut sim = Lattice::with_rng(cfg, rng);
    let mut out = Collected::empty(plan, cfg.steps);
    for played in 0..cfg.steps {
        if due(plan.snapshot_every, played) {
            out.snapshots.push(snapshot_lattice(&sim, played));
        }
        sim.step_with(|rec| out.record(plan, rec));
    }
    if due(plan.snapshot_every, cfg.steps) {
        out.snapshots.push(snapshot_lattice(&sim, cfg.steps));
    }
    check_tables(
        sim.tables(Role::Proposer)
            .chain(sim.tables(Role::Responder)),
    )?;
    out.finish();
    Ok(out)
}

fn panic_message(payload: &(dyn std::any::Any + Send)) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        (*s).to_string()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "panic".into()
    }
}

/// Runs realizations `0..m` of grid point `grid_index` in parallel, each on
/// its own stream, and merges them. A failing or panicking realization
/// aborts with an error naming its seed triple.
pub fn ensemble<F>(master_seed: u64, grid_index: u64, m: u64, realize: F) -> Result<Collected>
where
    F: Fn(SimRng) -> Result<Collected, String> + Sync,
{
    let fail = |realization, message| Error::Realization {
        master_seed,
        grid_index,
        realization,
        message,
    };
    (0..m)
        .into_par_iter()
        .map(|r| {
            let rng = SimRng::for_stream(master_seed, grid_index, r);
            match catch_unwind(AssertUnwindSafe(|| realize(rng))) {
                Ok(Ok(c)) => Ok(c),
                Ok(Err(message)) => Err(fail(r, message)),
                Err(payload) => Err(fail(r, panic_message(payload.as_ref()))),
            }
        })
        .try_reduce_with(|mut a, b| {
            a.merge(&b);
            Ok(a)
        })
        .unwrap_or_else(|| Ok(Collected::default()))
}

/// `m` two-player realizations of `run` at grid point `grid_index`.
pub fn simulate(
    run: &RunConfig,
    plan: &Plan,
    master_seed: u64,
    grid_index: u64,
    m: u64,
) -> Result<Collected> {
    run.validate()?;
    ensemble(master_seed, grid_index, m, |rng| {
        collect_two_player(run, plan, rng)
    })
}

/// `m` ring realizations of `cfg`.
pub fn simulate_lattice(
    cfg: &LatticeConfig,
    plan: &Plan,
    master_seed: u64,
    grid_index: u64,
    m: u64,
) -> Result<Collected> {
    cfg.validate()?;
    ensemble(master_seed, grid_index, m, |rng| {
        collect_lattice(cfg, plan, rng)
    })
}
