//! Experiment orchestration: configuration, ensembles over grids, and file
//! output.
//!
//! Each mode writes a fixed set of files into `spec.out`:
//!
//! | mode | files |
//! |---|---|
//! | `run` | `time_series.csv`, `preferences.csv`, `preferences_conditional.csv` |
//! | `scan-learning`, `scan-game` | `heatmap.csv` |
//! | `transitions` | `transitions.csv`, `time_series.csv` |
//! | `lattice` | `time_series.csv`, `preferences.csv`, `preferences_conditional.csv` |
//! | `theory-boundary` | `boundary.csv` |
//!
//! Every CSV gets a `.meta.json` sidecar, and every mode writes
//! `summary.json`.

pub mod config;
pub mod output;
pub mod runner;

use std::path::PathBuf;

use serde::Serialize;

use crate::error::Result;
use crate::game::{Action, GameParams, Role, SimState};
use crate::lattice::LatticeConfig;
use crate::metrics::{joint_probabilities, net_flow, TimeSeries, TransitionStats};
use crate::theory::{boundary_curve, fixed_points, BoundaryCurve, FixedPointReport};

pub use config::{linspace, parse_config, parse_grid, parse_windows, ExperimentSpec, Mode, Window};
pub use output::{format_number, write_atomic, CsvTable};
pub use runner::{simulate, simulate_lattice, Collected, Plan, Snapshot, FRACTION_NAMES};

/// Exact column order of `time_series.csv`.
pub const TIME_SERIES_COLUMNS: [&str; 29] = [
    "round",
    "f_pl",
    "f_pm",
    "f_ph",
    "f_ql",
    "f_qm",
    "f_qh",
    "s1",
    "s2",
    "s3",
    "s4",
    "s5",
    "s6",
    "s7",
    "s8",
    "s9",
    "deal_rate",
    "pay_p_l",
    "pay_p_m",
    "pay_p_h",
    "pay_q_l",
    "pay_q_m",
    "pay_q_h",
    "succ_p_l",
    "succ_p_m",
    "succ_p_h",
    "succ_q_l",
    "succ_q_m",
    "succ_q_h",
];

pub const HEATMAP_COLUMNS: [&str; 17] = [
    "axis1", "axis2", "f_pl", "f_pm", "f_ph", "f_ql", "f_qm", "f_qh", "s1", "s2", "s3", "s4", "s5",
    "s6", "s7", "s8", "s9",
];

pub const TRANSITION_COLUMNS: [&str; 7] = [
    "window_start",
    "window_end",
    "from_state",
    "to_state",
    "joint_p",
    "cond_p",
    "net_flow",
];

pub const PREFERENCE_COLUMNS: [&str; 6] = ["round", "state", "role", "mass_l", "mass_m", "mass_h"];

pub const BOUNDARY_COLUMNS: [&str; 2] = ["gamma", "alpha_boundary"];

/// One row per time-series bin, labelled by the bin's first round.
pub fn time_series_table(series: &TimeSeries, game: &GameParams) -> CsvTable {
    let mut t = CsvTable::new(&TIME_SERIES_COLUMNS);
    for (round, bin) in series.iter() {
        let mut row: Vec<output::Cell> = vec![round.into()];
        let f = bin.counts.fractions();
        row.extend(runner::fraction_values(&f).map(Into::into));
        row.push(bin.deals.deal_rate().into());
        for role in Role::ALL {
            for a in Action::ALL {
                row.push(bin.deals.mean_payoff(role, a, game).into());
            }
        }
        for role in Role::ALL {
            for a in Action::ALL {
                row.push(bin.deals.success_rate(role, a).into());
            }
        }
        t.push(row);
    }
    t
}

/// One row per grid cell.
pub fn heatmap_table(cells: &[CellSummary]) -> CsvTable {
    let mut t = CsvTable::new(&HEATMAP_COLUMNS);
    for c in cells {
        let mut row: Vec<output::Cell> = vec![c.axis1.into(), c.axis2.into()];
        row.extend(c.fractions.iter().map(|&v| v.into()));
        t.push(row);
    }
    t
}

/// 81 rows per window: joint, conditional (`nan` for unvisited origin
/// states) and net flow for every ordered state pair.
pub fn transitions_table(windows: &[Window], stats: &[TransitionStats]) -> Result<CsvTable> {
    let mut t = CsvTable::new(&TRANSITION_COLUMNS);
    for (w, s) in windows.iter().zip(stats) {
        let joint = joint_probabilities(s)?;
        let flow = net_flow(&joint);
        let cond = s.conditional();
        for from in SimState::all() {
            for to in SimState::all() {
                let (i, j) = (from.index(), to.index());
                t.push(vec![
                    w.start.into(),
                    w.end.into(),
                    from.to_string().into(),
                    to.to_string().into(),
                    joint[i][j].into(),
                    cond[i].map(|row| row[j]).into(),
                    flow[i][j].into(),
                ]);
            }
        }
    }
    Ok(t)
}

/// Rows ordered by snapshot, state, role. `conditional` picks the variant
/// restricted to the occupied state; rows without samples are skipped there.
pub fn preferences_table(snapshots: &[Snapshot], conditional: bool) -> CsvTable {
    let mut t = CsvTable::new(&PREFERENCE_COLUMNS);
    for snap in snapshots {
        let stats = if conditional {
            &snap.conditional
        } else {
            &snap.unconditional
        };
        for s in SimState::all() {
            for role in Role::ALL {
                let Some(d) = stats.distribution(s, role) else {
                    continue;
                };
                t.push(vec![
                    snap.round.into(),
                    s.to_string().into(),
                    role.as_str().into(),
                    d[0].into(),
                    d[1].into(),
                    d[2].into(),
                ]);
            }
        }
    }
    t
}

/// `nan` marks a gamma whose boundary lies above 1.
pub fn boundary_table(curve: &BoundaryCurve) -> CsvTable {
    let mut t = CsvTable::new(&BOUNDARY_COLUMNS);
    for (g, b) in &curve.points {
        t.push(vec![(*g).into(), b.alpha().into()]);
    }
    t
}

/// Mean and ensemble variance of one per-realization quantity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Stat {
    pub name: &'static str,
    pub mean: f64,
    pub variance: f64,
}

/// Measurement-window results of one grid point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellSummary {
    pub axis1: f64,
    pub axis2: f64,
    pub realizations: u64,
    /// Pooled fractions in heatmap order (`f_pl .. f_qh, s1 .. s9`).
    pub fractions: [f64; 15],
    pub deal_rate: Option<f64>,
    /// Spread over realizations of the per-realization window fractions.
    pub ensemble: Vec<Stat>,
}

impl CellSummary {
    pub fn from_collected(axis: (f64, f64), c: &Collected) -> Self {
        let ensemble = FRACTION_NAMES
            .iter()
            .zip(&c.window_means)
            .map(|(&name, acc)| Stat {
                name,
                mean: acc.mean().unwrap_or(f64::NAN),
                variance: acc.variance().unwrap_or(f64::NAN),
            })
            .collect();
        CellSummary {
            axis1: axis.0,
            axis2: axis.1,
            realizations: c.realizations,
            fractions: runner::fraction_values(&c.fractions()),
            deal_rate: c.window_deals.deal_rate(),
            ensemble,
        }
    }
}

/// Contents of `summary.json`.
#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub mode: Mode,
    pub master_seed: u64,
    pub code_version: &'static str,
    pub rng: &'static str,
    pub files: Vec<PathBuf>,
    pub cells: Vec<CellSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary: Option<BoundaryCurve>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub fixed_points: Vec<FixedPointReport>,
}

fn plan_for(spec: &ExperimentSpec) -> Plan {
    let base = Plan::window_only(&spec.run);
    match spec.mode {
        Mode::Run | Mode::Lattice => Plan {
            series_every: Some(spec.every),
            snapshot_every: Some(spec.snapshot_every),
            ..base
        },
        Mode::Transitions => Plan {
            series_every: Some(spec.every),
            transitions: spec.transition_windows(),
            ..base
        },
        _ => base,
    }
}

pub fn lattice_config(spec: &ExperimentSpec) -> LatticeConfig {
    LatticeConfig {
        n: spec.n,
        game: spec.run.game,
        learn: spec.run.learn,
        steps: spec.run.steps,
        transient: spec.run.transient,
        window: spec.run.window,
        seed: spec.run.seed,
    }
}

/// Runs the experiment, writes its files and returns the summary.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Summary> {
    spec.validate()?;
    let dir = &spec.out;
    let seed = spec.seed();
    let plan = plan_for(spec);
    let mut files = Vec::new();
    let mut cells = Vec::new();
    let mut boundary = None;
    let mut fixed = Vec::new();

    match spec.mode {
        Mode::Run | Mode::Lattice | Mode::Transitions => {
            let c = if spec.mode == Mode::Lattice {
                simulate_lattice(&lattice_config(spec), &plan, seed, 0, spec.ensemble)?
            } else {
                simulate(&spec.run, &plan, seed, 0, spec.ensemble)?
            };
            let series = c
                .series
                .clone()
                .unwrap_or_else(|| TimeSeries::new(spec.every, 0));
            let table = time_series_table(&series, &spec.run.game);
            files.push(output::write_csv(dir, "time_series.csv", &table, spec)?);
            if spec.mode == Mode::Transitions {
                let table = transitions_table(&plan.transitions, &c.transitions)?;
                files.push(output::write_csv(dir, "transitions.csv", &table, spec)?);
            } else {
                let table = preferences_table(&c.snapshots, false);
                files.push(output::write_csv(dir, "preferences.csv", &table, spec)?);
                let table = preferences_table(&c.snapshots, true);
                files.push(output::write_csv(
                    dir,
                    "preferences_conditional.csv",
                    &table,
                    spec,
                )?);
            }
            cells.push(CellSummary::from_collected((f64::NAN, f64::NAN), &c));
        }
        Mode::ScanLearning | Mode::ScanGame => {
            for (g, axis) in spec.grid().into_iter().enumerate() {
                let run = spec.cell_config(axis)?;
                let cell_plan = Plan::window_only(&run);
                let c = simulate(&run, &cell_plan, seed, g as u64, spec.ensemble)?;
                cells.push(CellSummary::from_collected(axis, &c));
            }
            files.push(output::write_csv(
                dir,
                "heatmap.csv",
                &heatmap_table(&cells),
                spec,
            )?);
        }
        Mode::TheoryBoundary => {
            let curve = boundary_curve(&spec.run.game, &spec.gamma_grid)?;
            files.push(output::write_csv(
                dir,
                "boundary.csv",
                &boundary_table(&curve),
                spec,
            )?);
            fixed = spec
                .gamma_grid
                .iter()
                .map(|&g| fixed_points(&spec.run.game, g))
                .collect::<Result<_, _>>()?;
            boundary = Some(curve);
        }
    }

    let summary_path = dir.join("summary.json");
    files.push(summary_path.clone());
    let summary = Summary {
        mode: spec.mode,
        master_seed: seed,
        code_version: env!("CARGO_PKG_VERSION"),
        rng: crate::rng::RNG_ALGORITHM,
        files,
        cells,
        boundary,
        fixed_points: fixed,
    };
    output::write_json(&summary_path, &summary)?;
    Ok(summary)
}

/// Builds a spec from command-line arguments. `--config PATH` (or
/// `--config=PATH`) loads a key=value file first; all other flags override it.
pub fn spec_from_args(args: &[String]) -> Result<ExperimentSpec> {
    let mut rest = Vec::with_capacity(args.len());
    let mut config = None;
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            let path = it.next().ok_or_else(|| crate::error::ConfigError::Parse {
                location: "flag --config".into(),
                message: "missing value".into(),
            })?;
            config = Some(PathBuf::from(path));
        } else if let Some(path) = a.strip_prefix("--config=") {
            config = Some(PathBuf::from(path));
        } else {
            rest.push(a.clone());
        }
    }
    let text = match &config {
        Some(path) => {
            Some(
                std::fs::read_to_string(path).map_err(|source| crate::error::Error::Io {
                    path: path.clone(),
                    source,
                })?,
            )
        }
        None => None,
    };
    Ok(parse_config(text.as_deref(), &rest)?)
}
