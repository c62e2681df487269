//! Flat `key = value` configuration with `--key value` overrides.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::engine::{validate_schedule, RunConfig};
use crate::error::ConfigError;
use crate::game::{GameParams, LearningParams};

/// What an invocation computes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Run,
    ScanLearning,
    ScanGame,
    Transitions,
    Lattice,
    TheoryBoundary,
}

impl Mode {
    pub const ALL: [Mode; 6] = [
        Mode::Run,
        Mode::ScanLearning,
        Mode::ScanGame,
        Mode::Transitions,
        Mode::Lattice,
        Mode::TheoryBoundary,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Run => "run",
            Mode::ScanLearning => "scan-learning",
            Mode::ScanGame => "scan-game",
            Mode::Transitions => "transitions",
            Mode::Lattice => "lattice",
            Mode::TheoryBoundary => "theory-boundary",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Mode::ALL.iter().map(|m| m.as_str()).collect();
                format!("unknown mode `{s}` (expected one of {})", names.join(", "))
            })
    }
}

/// A half-open round window `[start, end)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Window {
    pub start: u64,
    pub end: u64,
}

impl Window {
    pub fn new(start: u64, end: u64) -> Self {
        Window { start, end }
    }

    #[inline]
    pub fn contains(&self, round: u64) -> bool {
        self.start <= round && round < self.end
    }

    pub fn len(&self) -> u64 {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// One fully resolved experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub mode: Mode,
    /// Base configuration; `seed` is the master seed.
    pub run: RunConfig,
    /// Ring size for `lattice`.
    pub n: usize,
    /// Realizations per grid point.
    pub ensemble: u64,
    pub out: PathBuf,
    pub alpha_grid: Vec<f64>,
    pub gamma_grid: Vec<f64>,
    pub l_grid: Vec<f64>,
    pub h_grid: Vec<f64>,
    /// Transition windows; empty means the measurement window.
    pub windows: Vec<Window>,
    /// Time-series bin width in rounds.
    pub every: u64,
    /// Rounds between Q-table preference snapshots.
    pub snapshot_every: u64,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        let run = RunConfig::default();
        ExperimentSpec {
            mode: Mode::Run,
            every: default_every(run.steps),
            run,
            n: 50,
            ensemble: 100,
            out: PathBuf::from("out"),
            alpha_grid: linspace(0.1, 0.9, 9),
            gamma_grid: linspace(0.1, 0.9, 9),
            l_grid: linspace(0.1, 0.45, 8),
            h_grid: linspace(0.55, 0.9, 8),
            windows: Vec::new(),
            snapshot_every: 1_000,
        }
    }
}

/// About a thousand time-series rows for any run length.
pub fn default_every(steps: u64) -> u64 {
    steps.div_ceil(1_000).max(1)
}

/// `n` evenly spaced values from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    b
                } else {
                    a + (b - a) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

impl ExperimentSpec {
    /// Master seed of the experiment.
    pub fn seed(&self) -> u64 {
        self.run.seed
    }

    /// Windows used by `transitions`, falling back to the measurement window.
    pub fn transition_windows(&self) -> Vec<Window> {
        if self.windows.is_empty() {
            let r = self.run.window_range();
            vec![Window::new(r.start, r.end)]
        } else {
            self.windows.clone()
        }
    }

    /// The `(axis1, axis2)` grid of a scan mode, first axis outermost.
    pub fn grid(&self) -> Vec<(f64, f64)> {
        let (a, b) = match self.mode {
            Mode::ScanLearning => (&self.alpha_grid, &self.gamma_grid),
            Mode::ScanGame => (&self.l_grid, &self.h_grid),
            _ => return Vec::new(),
        };
        a.iter()
            .flat_map(|&x| b.iter().map(move |&y| (x, y)))
            .collect()
    }

    /// Run configuration of one scan cell.
    pub fn cell_config(&self, axis: (f64, f64)) -> Result<RunConfig, ConfigError> {
        let mut run = self.run.clone();
        match self.mode {
            Mode::ScanLearning => {
                run.learn = LearningParams::new(axis.0, axis.1, run.learn.epsilon())?;
            }
            Mode::ScanGame => run.game = GameParams::new(axis.0, axis.1)?,
            _ => {}
        }
        Ok(run)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.ensemble == 0 {
            return Err(ConfigError::range("ensemble", 0, "ensemble >= 1"));
        }
        if self.every == 0 {
            return Err(ConfigError::range("every", 0, "every >= 1"));
        }
        if self.snapshot_every == 0 {
            return Err(ConfigError::range(
                "snapshot-every",
                0,
                "snapshot-every >= 1",
            ));
        }
        validate_schedule(self.run.steps, self.run.transient, self.run.window)?;
        match self.mode {
            Mode::ScanLearning | Mode::ScanGame => {
                let (k1, k2) = if self.mode == Mode::ScanLearning {
                    ("alpha-grid", "gamma-grid")
                } else {
                    ("l-grid", "h-grid")
                };
                for (key, grid) in [(k1, self.grid_axis(k1)), (k2, self.grid_axis(k2))] {
                    if grid.is_empty() {
                        return Err(ConfigError::Invalid(format!("{key} must not be empty")));
                    }
                }
                for axis in self.grid() {
                    self.cell_config(axis)?;
                }
            }
            Mode::Transitions => {
                for w in self.transition_windows() {
                    if w.start >= w.end || w.end > self.run.steps {
                        return Err(ConfigError::Invalid(format!(
                            "window {}:{} must satisfy start < end <= steps ({})",
                            w.start, w.end, self.run.steps
                        )));
                    }
                }
            }
            Mode::Lattice => {
                if self.n < 3 {
                    return Err(ConfigError::range("n", self.n, "n >= 3"));
                }
            }
            Mode::TheoryBoundary => {
                if self.gamma_grid.is_empty() {
                    return Err(ConfigError::Invalid("gamma-grid must not be empty".into()));
                }
                if let Some(g) = self.gamma_grid.iter().find(|g| !(0.0..1.0).contains(*g)) {
                    return Err(ConfigError::range("gamma-grid", g, "0 <= gamma < 1"));
                }
            }
            Mode::Run => {}
        }
        Ok(())
    }

    fn grid_axis(&self, key: &str) -> &[f64] {
        match key {
            "alpha-grid" => &self.alpha_grid,
            "gamma-grid" => &self.gamma_grid,
            "l-grid" => &self.l_grid,
            _ => &self.h_grid,
        }
    }
}

/// Every key accepted in a file or as a flag.
pub const KEYS: &[&str] = &[
    "mode",
    "alpha",
    "gamma",
    "epsilon",
    "l",
    "h",
    "scheme",
    "steps",
    "transient",
    "window",
    "seed",
    "ensemble",
    "out",
    "n",
    "alpha-grid",
    "gamma-grid",
    "l-grid",
    "h-grid",
    "windows",
    "every",
    "snapshot-every",
];

/// A raw `key = value` pair and where it came from.
#[derive(Clone, Debug, PartialEq)]
struct Entry {
    key: String,
    value: String,
    location: String,
}

fn normalise_key(key: &str) -> String {
    key.trim().replace('_', "-")
}

fn parse_file(text: &str) -> Result<Vec<Entry>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let location = format!("line {}", i + 1);
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::Parse {
                location,
                message: format!("expected `key = value`, found `{line}`"),
            });
        };
        let key = normalise_key(key);
        if !KEYS.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey { location, key });
        }
        out.push(Entry {
            key,
            value: value.trim().to_string(),
            location,
        });
    }
    Ok(out)
}

/// Splits argv-style tokens into an optional leading mode word and flags.
fn parse_flags(args: &[String]) -> Result<(Option<String>, Vec<Entry>), ConfigError> {
    let mut mode = None;
    let mut out = Vec::new();
    let mut it = args.iter().peekable();
    if let Some(first) = it.peek() {
        if !first.starts_with("--") {
            mode = Some(first.to_string());
            it.next();
        }
    }
    while let Some(tok) = it.next() {
        let Some(body) = tok.strip_prefix("--") else {
            return Err(ConfigError::Parse {
                location: format!("argument `{tok}`"),
                message: "expected a `--key` flag".into(),
            });
        };
        let (key, value) = match body.split_once('=') {
            Some((k, v)) => (normalise_key(k), v.to_string()),
            None => {
                let key = normalise_key(body);
                let value = it.next().ok_or_else(|| ConfigError::Parse {
                    location: format!("flag --{key}"),
                    message: "missing value".into(),
                })?;
                (key, value.clone())
            }
        };
        let location = format!("flag --{key}");
        if !KEYS.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey { location, key });
        }
        out.push(Entry {
            key,
            value,
            location,
        });
    }
    Ok((mode, out))
}

fn parse_value<T: FromStr>(e: &Entry) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    e.value.parse::<T>().map_err(|err| ConfigError::Parse {
        location: e.location.clone(),
        message: format!("invalid value `{}` for {}: {err}", e.value, e.key),
    })
}

/// Accepts `a0:a1:n` (inclusive, evenly spaced) or a comma list.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, String> {
    let text = text.trim();
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() == 3 {
        let a: f64 = parts[0].trim().parse().map_err(|e| format!("{e}"))?;
        let b: f64 = parts[1].trim().parse().map_err(|e| format!("{e}"))?;
        let n: usize = parts[2].trim().parse().map_err(|e| format!("{e}"))?;
        if n == 0 {
            return Err("grid needs at least one point".into());
        }
        return Ok(linspace(a, b, n));
    }
    if parts.len() != 1 {
        return Err(format!(
            "expected `a0:a1:n` or a comma list, found `{text}`"
        ));
    }
    text.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}")))
        .collect()
}

/// Parses `start:end[,start:end...]`.
pub fn parse_windows(text: &str) -> Result<Vec<Window>, String> {
    text.split(',')
        .map(|w| {
            let (a, b) = w
                .split_once(':')
                .ok_or_else(|| format!("expected `start:end`, found `{w}`"))?;
            let start = parse_round(a)?;
            let end = parse_round(b)?;
            Ok(Window::new(start, end))
        })
        .collect()
}

/// Round counts also accept float notation such as `2e6`.
fn parse_round(text: &str) -> Result<u64, String> {
    let t = text.trim();
    if let Ok(v) = t.parse::<u64>() {
        return Ok(v);
    }
    let f: f64 = t
        .parse()
        .map_err(|_| format!("`{t}` is not a round count"))?;
    if f >= 0.0 && f.fract() == 0.0 && f <= u64::MAX as f64 {
        Ok(f as u64)
    } else {
        Err(format!("`{t}` is not a round count"))
    }
}

fn round_value(e: &Entry) -> Result<u64, ConfigError> {
    parse_round(&e.value).map_err(|message| ConfigError::Parse {
        location: e.location.clone(),
        message,
    })
}

/// Builds a spec from optional file text and argv-style flags.
///
/// The first flag token may be a bare mode word (`run`, `scan-learning`,
/// ...). Flags override file values; later entries override earlier ones.
pub fn parse_config(file: Option<&str>, flags: &[String]) -> Result<ExperimentSpec, ConfigError> {
    let mut entries = match file {
        Some(text) => parse_file(text)?,
        None => Vec::new(),
    };
    let (mode_word, flag_entries) = parse_flags(flags)?;
    entries.extend(flag_entries);
    if let Some(word) = mode_word {
        entries.push(Entry {
            key: "mode".into(),
            value: word.clone(),
            location: format!("subcommand `{word}`"),
        });
    }

    let mut spec = ExperimentSpec::default();
    let (mut alpha, mut gamma, mut epsilon) = (0.1, 0.9, 0.01);
    let (mut low, mut high) = (0.3, 0.8);
    let mut steps = None;
    let mut transient = None;
    let mut window = None;
    let mut every = None;

    for e in &entries {
        let grid = || {
            parse_grid(&e.value).map_err(|message| ConfigError::Parse {
                location: e.location.clone(),
                message,
            })
        };
        match e.key.as_str() {
            "mode" => spec.mode = parse_value(e)?,
            "alpha" => alpha = parse_value(e)?,
            "gamma" => gamma = parse_value(e)?,
            "epsilon" => epsilon = parse_value(e)?,
            "l" => low = parse_value(e)?,
            "h" => high = parse_value(e)?,
            "scheme" => spec.run.scheme = parse_value(e)?,
            "steps" => steps = Some(round_value(e)?),
            "transient" => transient = Some(round_value(e)?),
            "window" => window = Some(round_value(e)?),
            "seed" => spec.run.seed = parse_value(e)?,
            "ensemble" => spec.ensemble = parse_value(e)?,
            "out" => spec.out = PathBuf::from(&e.value),
            "n" => spec.n = parse_value(e)?,
            "alpha-grid" => spec.alpha_grid = grid()?,
            "gamma-grid" => spec.gamma_grid = grid()?,
            "l-grid" => spec.l_grid = grid()?,
            "h-grid" => spec.h_grid = grid()?,
            "windows" => {
                spec.windows = parse_windows(&e.value).map_err(|message| ConfigError::Parse {
                    location: e.location.clone(),
                    message,
                })?
            }
            "every" => every = Some(round_value(e)?),
            "snapshot-every" => spec.snapshot_every = round_value(e)?,
            _ => unreachable!("key list and match arms agree"),
        }
    }
    if spec.mode == Mode::TheoryBoundary && !entries.iter().any(|e| e.key == "gamma-grid") {
        spec.gamma_grid = linspace(0.0, 0.95, 20);
    }

    spec.run.game = GameParams::new(low, high)?;
    spec.run.learn = LearningParams::new(alpha, gamma, epsilon)?;
    resolve_schedule(&mut spec, steps, transient, window);
    spec.every = every.unwrap_or_else(|| default_every(spec.run.steps));
    spec.validate()?;
    Ok(spec)
}

/// Fills in whichever of steps / transient / window were not given.
fn resolve_schedule(
    spec: &mut ExperimentSpec,
    steps: Option<u64>,
    transient: Option<u64>,
    window: Option<u64>,
) {
    let defaults = RunConfig::default();
    let run = &mut spec.run;
    match (steps, transient, window) {
        (None, t, w) => {
            run.transient = t.unwrap_or(defaults.transient);
            run.window = w.unwrap_or(defaults.window);
            run.steps = run.transient.saturating_add(run.window);
            if let Some(end) = spec.windows.iter().map(|w| w.end).max() {
                run.steps = run.steps.max(end);
            }
        }
        (Some(s), None, None) => {
            run.steps = s;
            run.window = defaults.window.min(s);
            run.transient = s - run.window;
        }
        (Some(s), Some(t), None) => {
            run.steps = s;
            run.transient = t;
            run.window = defaults.window.min(s.saturating_sub(t));
        }
        (Some(s), None, Some(w)) => {
            run.steps = s;
            run.window = w;
            run.transient = s.saturating_sub(w);
        }
        (Some(s), Some(t), Some(w)) => {
            run.steps = s;
            run.transient = t;
            run.window = w;
        }
    }
}
