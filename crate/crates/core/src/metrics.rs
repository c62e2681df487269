//! Observables computed from round records.
//!
//! Every accumulator here is built from integer counts (or exact float sums),
//! so merging partial accumulators in any order gives bit-identical results
//! to accumulating the concatenated input.

use serde::{Deserialize, Serialize};

use crate::engine::RoundRecord;
use crate::error::MetricsError;
use crate::game::{deal_succeeds, Action, GameParams, QTable, Role, SimState};

/// Option and state fractions at one sample point.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FractionPoint {
    /// `f_{p_l}, f_{p_m}, f_{p_h}`
    pub proposer: [f64; 3],
    /// `f_{q_l}, f_{q_m}, f_{q_h}`
    pub responder: [f64; 3],
    /// `f_{s1} .. f_{s9}`
    pub states: [f64; 9],
}

impl FractionPoint {
    pub fn proposer_of(&self, a: Action) -> f64 {
        self.proposer[a.index()]
    }

    pub fn responder_of(&self, a: Action) -> f64 {
        self.responder[a.index()]
    }

    pub fn state(&self, s: SimState) -> f64 {
        self.states[s.index()]
    }
}

/// Indicator fractions of a single record. One proposer and one responder
/// play per record, so each triple is normalised per role instance.
pub fn fractions(record: &RoundRecord) -> FractionPoint {
    let mut counts = FractionCounts::default();
    counts.record(record);
    counts.fractions()
}

/// Action counts per role and `state_after` counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FractionCounts {
    pub proposer: [u64; 3],
    pub responder: [u64; 3],
    pub states: [u64; 9],
}

impl FractionCounts {
    #[inline]
    pub fn record(&mut self, r: &RoundRecord) {
        self.proposer[r.proposer_action.index()] += 1;
        self.responder[r.responder_action.index()] += 1;
        self.states[r.state_after.index()] += 1;
    }

    pub fn merge(&mut self, other: &FractionCounts) {
        add_into(&mut self.proposer, &other.proposer);
        add_into(&mut self.responder, &other.responder);
        add_into(&mut self.states, &other.states);
    }

    /// Number of role instances (records) seen.
    pub fn instances(&self) -> u64 {
        self.proposer.iter().sum()
    }

    /// All zeros when nothing was recorded.
    pub fn fractions(&self) -> FractionPoint {
        FractionPoint {
            proposer: normalise(&self.proposer),
            responder: normalise(&self.responder),
            states: normalise(&self.states),
        }
    }
}

fn add_into<const N: usize>(acc: &mut [u64; N], other: &[u64; N]) {
    for (a, b) in acc.iter_mut().zip(other) {
        *a += *b;
    }
}

fn normalise<const N: usize>(counts: &[u64; N]) -> [f64; N] {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return [0.0; N];
    }
    counts.map(|c| c as f64 / total as f64)
}

/// Order-independent exact sum of `f64` values (Shewchuk partials, with the
/// correctly rounded read-out used by Python's `math.fsum`).
///
/// Two sums compare equal when they round to the same value; the internal
/// partials depend on insertion order and are not compared.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ExactSum {
    partials: Vec<f64>,
}

impl PartialEq for ExactSum {
    fn eq(&self, other: &Self) -> bool {
        self.value().to_bits() == other.value().to_bits()
    }
}

impl ExactSum {
    pub fn add(&mut self, value: f64) {
        debug_assert!(value.is_finite());
        let mut x = value;
        let mut kept = 0;
        for j in 0..self.partials.len() {
            let mut y = self.partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                self.partials[kept] = lo;
                kept += 1;
            }
            x = hi;
        }
        self.partials.truncate(kept);
        self.partials.push(x);
    }

    pub fn merge(&mut self, other: &ExactSum) {
        for p in &other.partials {
            self.add(*p);
        }
    }

    /// The exact sum rounded once to the nearest `f64`.
    pub fn value(&self) -> f64 {
        let p = &self.partials;
        let Some(&last) = p.last() else {
            return 0.0;
        };
        let mut n = p.len() - 1;
        let mut hi = last;
        let mut lo = 0.0;
        while n > 0 {
            let x = hi;
            let y = p[n - 1];
            n -= 1;
            hi = x + y;
            lo = y - (hi - x);
            if lo != 0.0 {
                break;
            }
        }
        if n > 0 && ((lo < 0.0 && p[n - 1] < 0.0) || (lo > 0.0 && p[n - 1] > 0.0)) {
            let y = lo * 2.0;
            let x = hi + y;
            if y == x - hi {
                hi = x;
            }
        }
        hi
    }
}

/// Mean (and variance) of per-realization values.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnsembleAverage {
    count: u64,
    sum: ExactSum,
    sum_sq: ExactSum,
}

impl EnsembleAverage {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, value: f64) {
        self.count += 1;
        self.sum.add(value);
        self.sum_sq.add(value * value);
    }

    pub fn merge(&mut self, other: &EnsembleAverage) {
        self.count += other.count;
        self.sum.merge(&other.sum);
        self.sum_sq.merge(&other.sum_sq);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> Result<f64, MetricsError> {
        if self.count == 0 {
            return Err(MetricsError::EmptyInput);
        }
        Ok(self.sum.value() / self.count as f64)
    }

    /// Unbiased sample variance; zero for a single realization.
    pub fn variance(&self) -> Result<f64, MetricsError> {
        let mean = self.mean()?;
        if self.count < 2 {
            return Ok(0.0);
        }
        let n = self.count as f64;
        Ok(((self.sum_sq.value() - n * mean * mean) / (n - 1.0)).max(0.0))
    }
}

impl FromIterator<f64> for EnsembleAverage {
    fn from_iter<T: IntoIterator<Item = f64>>(iter: T) -> Self {
        let mut acc = EnsembleAverage::new();
        for v in iter {
            acc.push(v);
        }
        acc
    }
}

/// Arithmetic mean over realizations.
pub fn ensemble_average(values: &[f64]) -> Result<f64, MetricsError> {
    values.iter().copied().collect::<EnsembleAverage>().mean()
}

/// Deal outcomes per role and option.
///
/// Stored as counts of joint `(offer, threshold)` plays. Success is implied
/// by the pair and payoffs are fixed per pair, so every per-option statistic
/// is derived from these nine integers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DealStats {
    joint: [[u64; 3]; 3],
}

impl DealStats {
    #[inline]
    pub fn record(&mut self, r: &RoundRecord) {
        self.joint[r.proposer_action.index()][r.responder_action.index()] += 1;
    }

    pub fn merge(&mut self, other: &DealStats) {
        for (a, b) in self.joint.iter_mut().zip(&other.joint) {
            add_into(a, b);
        }
    }

    fn pairs(role: Role, option: Action) -> impl Iterator<Item = (Action, Action)> {
        Action::ALL.into_iter().map(move |other| match role {
            Role::Proposer => (option, other),
            Role::Responder => (other, option),
        })
    }

    fn count(&self, offer: Action, threshold: Action) -> u64 {
        self.joint[offer.index()][threshold.index()]
    }

    pub fn attempts(&self, role: Role, option: Action) -> u64 {
        Self::pairs(role, option)
            .map(|(p, q)| self.count(p, q))
            .sum()
    }

    pub fn successes(&self, role: Role, option: Action) -> u64 {
        Self::pairs(role, option)
            .filter(|(p, q)| deal_succeeds(*p, *q))
            .map(|(p, q)| self.count(p, q))
            .sum()
    }

    pub fn payoff_sum(&self, role: Role, option: Action, game: &GameParams) -> f64 {
        Self::pairs(role, option)
            .filter(|(p, q)| deal_succeeds(*p, *q))
            .map(|(p, q)| {
                let share = game.value(p);
                let pay = match role {
                    Role::Proposer => 1.0 - share,
                    Role::Responder => share,
                };
                self.count(p, q) as f64 * pay
            })
            .sum()
    }

    /// `None` when the option was never played.
    pub fn success_rate(&self, role: Role, option: Action) -> Option<f64> {
        let n = self.attempts(role, option);
        (n > 0).then(|| self.successes(role, option) as f64 / n as f64)
    }

    pub fn mean_payoff(&self, role: Role, option: Action, game: &GameParams) -> Option<f64> {
        let n = self.attempts(role, option);
        (n > 0).then(|| self.payoff_sum(role, option, game) / n as f64)
    }

    pub fn total(&self) -> u64 {
        self.joint.iter().flatten().sum()
    }

    /// Fraction of all rounds that closed a deal.
    pub fn deal_rate(&self) -> Option<f64> {
        let total = self.total();
        let ok: u64 = Action::ALL
            .into_iter()
            .map(|p| self.successes(Role::Proposer, p))
            .sum();
        (total > 0).then(|| ok as f64 / total as f64)
    }
}

/// Adds one record to `stats`.
pub fn deal_stats_update(stats: &mut DealStats, record: &RoundRecord) {
    stats.record(record);
}

pub type Matrix9 = [[f64; 9]; 9];

/// Counts of consecutive state pairs `(s_t, s_{t+1})`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionStats {
    counts: [[u64; 9]; 9],
}

impl TransitionStats {
    #[inline]
    pub fn record(&mut self, from: SimState, to: SimState) {
        self.counts[from.index()][to.index()] += 1;
    }

    #[inline]
    pub fn record_round(&mut self, r: &RoundRecord) {
        self.record(r.state_before, r.state_after);
    }

    /// Counts every consecutive pair of a state sequence.
    pub fn from_sequence(states: &[SimState]) -> Self {
        let mut stats = Self::default();
        for w in states.windows(2) {
            stats.record(w[0], w[1]);
        }
        stats
    }

    pub fn merge(&mut self, other: &TransitionStats) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            add_into(a, b);
        }
    }

    pub fn count(&self, from: SimState, to: SimState) -> u64 {
        self.counts[from.index()][to.index()]
    }

    pub fn counts(&self) -> &[[u64; 9]; 9] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// `p(s' | s)`; rows without outgoing counts are `None`.
    pub fn conditional(&self) -> [Option<[f64; 9]>; 9] {
        let mut out = [None; 9];
        for (i, row) in self.counts.iter().enumerate() {
            let n: u64 = row.iter().sum();
            if n > 0 {
                out[i] = Some(row.map(|c| c as f64 / n as f64));
            }
        }
        out
    }

    /// Marginal distribution of `s_t` over the window.
    pub fn occupancy(&self) -> [f64; 9] {
        normalise(&self.counts.map(|row| row.iter().sum::<u64>()))
    }
}

/// `P_{ij} = count_{ij} / total`.
pub fn joint_probabilities(stats: &TransitionStats) -> Result<Matrix9, MetricsError> {
    let total = stats.total();
    if total == 0 {
        return Err(MetricsError::EmptyWindow);
    }
    Ok(stats.counts.map(|row| row.map(|c| c as f64 / total as f64)))
}

/// `dP_{ij} = P_{ij} - P_{ji}`.
pub fn net_flow(p: &Matrix9) -> Matrix9 {
    let mut out = [[0.0; 9]; 9];
    for i in 0..9 {
        for j in 0..9 {
            out[i][j] = p[i][j] - p[j][i];
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkEdge {
    pub from: SimState,
    pub to: SimState,
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionNetwork {
    pub edges: Vec<NetworkEdge>,
    pub occupancy: [f64; 9],
}

impl TransitionNetwork {
    pub fn edge(&self, from: SimState, to: SimState) -> Option<f64> {
        self.edges
            .iter()
            .find(|e| e.from == from && e.to == to)
            .map(|e| e.probability)
    }
}

/// Conditional transition graph keeping edges with `p(s'|s) >= threshold`.
pub fn transition_network(stats: &TransitionStats, threshold: f64) -> TransitionNetwork {
    let edges = stats
        .conditional()
        .iter()
        .enumerate()
        .filter_map(|(i, row)| row.map(|r| (i, r)))
        .flat_map(|(i, row)| {
            row.into_iter()
                .enumerate()
                .filter(move |(_, p)| *p > 0.0 && *p >= threshold)
                .map(move |(j, p)| NetworkEdge {
                    from: SimState::from_index(i),
                    to: SimState::from_index(j),
                    probability: p,
                })
        })
        .collect();
    TransitionNetwork {
        edges,
        occupancy: stats.occupancy(),
    }
}

/// Mass units per table row: ties over 2 or 3 actions split 6 evenly.
const PREF_UNIT: u64 = 6;

/// Which action holds the row maximum, per state and role.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreferenceStats {
    /// `[state][role][action]` in units of 1/6 of a table row.
    mass: [[[u64; 3]; 2]; 9],
}

fn role_slot(role: Role) -> usize {
    match role {
        Role::Proposer => 0,
        Role::Responder => 1,
    }
}

impl PreferenceStats {
    /// Adds the argmax of one row of `table`.
    pub fn add_row(&mut self, table: &QTable, role: Role, state: SimState) {
        let maximizers: Vec<Action> = table.maximizers(state).collect();
        let share = PREF_UNIT / maximizers.len() as u64;
        let slot = &mut self.mass[state.index()][role_slot(role)];
        for a in maximizers {
            slot[a.index()] += share;
        }
    }

    /// Adds every row of `table`.
    pub fn add_table(&mut self, table: &QTable, role: Role) {
        for s in SimState::all() {
            self.add_row(table, role, s);
        }
    }

    pub fn merge(&mut self, other: &PreferenceStats) {
        for (a, b) in self.mass.iter_mut().zip(&other.mass) {
            for (x, y) in a.iter_mut().zip(b) {
                add_into(x, y);
            }
        }
    }

    /// Number of table rows contributing to `(state, role)`.
    pub fn samples(&self, state: SimState, role: Role) -> u64 {
        self.mass[state.index()][role_slot(role)]
            .iter()
            .sum::<u64>()
            / PREF_UNIT
    }

    /// Share of rows whose maximum sits on each action; `None` if empty.
    pub fn distribution(&self, state: SimState, role: Role) -> Option<[f64; 3]> {
        let m = &self.mass[state.index()][role_slot(role)];
        let total: u64 = m.iter().sum();
        (total > 0).then(|| m.map(|c| c as f64 / total as f64))
    }
}

/// Unconditional argmax snapshot over every row of the given role tables.
pub fn preference_snapshot<'a, I>(tables: I, role: Role) -> PreferenceStats
where
    I: IntoIterator<Item = &'a QTable>,
{
    let mut stats = PreferenceStats::default();
    for t in tables {
        stats.add_table(t, role);
    }
    stats
}

/// Bin of a time series: fraction counts plus deal outcomes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesBin {
    pub counts: FractionCounts,
    pub deals: DealStats,
}

impl SeriesBin {
    #[inline]
    pub fn record(&mut self, r: &RoundRecord) {
        self.counts.record(r);
        self.deals.record(r);
    }

    pub fn merge(&mut self, other: &SeriesBin) {
        self.counts.merge(&other.counts);
        self.deals.merge(&other.deals);
    }
}

/// Time-binned fractions and deal statistics; bin `k` covers rounds
/// `[k * every, (k + 1) * every)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    every: u64,
    bins: Vec<SeriesBin>,
}

impl TimeSeries {
    /// Panics if `every == 0`.
    pub fn new(every: u64, rounds: u64) -> Self {
        assert!(every > 0, "bin width must be positive");
        TimeSeries {
            every,
            bins: vec![SeriesBin::default(); rounds.div_ceil(every) as usize],
        }
    }

    pub fn every(&self) -> u64 {
        self.every
    }

    #[inline]
    pub fn record(&mut self, r: &RoundRecord) {
        let k = (r.round / self.every) as usize;
        if k >= self.bins.len() {
            self.bins.resize(k + 1, SeriesBin::default());
        }
        self.bins[k].record(r);
    }

    pub fn merge(&mut self, other: &TimeSeries) {
        assert_eq!(self.every, other.every, "bin widths differ");
        if other.bins.len() > self.bins.len() {
            self.bins.resize(other.bins.len(), SeriesBin::default());
        }
        for (a, b) in self.bins.iter_mut().zip(&other.bins) {
            a.merge(b);
        }
    }

    pub fn bins(&self) -> &[SeriesBin] {
        &self.bins
    }

    /// `(first round of bin, bin)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (u64, &SeriesBin)> {
        self.bins
            .iter()
            .enumerate()
            .map(move |(k, b)| (k as u64 * self.every, b))
    }
}
