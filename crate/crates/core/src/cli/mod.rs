//! The `tanglebound` command line.
//!
//! ```text
//! tanglebound tangle STATE.json
//! tanglebound curve ghzw-tau3 --grid 200
//! tanglebound bound PROBLEM.json [--grid N] [--trace]
//! tanglebound reproduce table1 --out results/
//! ```
//!
//! Exit codes: 0 success, 2 input error, 3 I/O error, 4 reproduction failure.
//! `TANGLEBOUND_THREADS` caps the number of worker threads.

pub mod output;
pub mod reproduce;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::bound::{legendre_bound, witness_range, BoundProblem, LegendreSolver, OptimizerSettings, SearchSpace};
use crate::charcurve::{q0, q1, skew_characteristic, tau3_diagonal};
use crate::envelope::{lower_convex_envelope, SampledCurve};
use crate::qstate::{three_tangle, Measure, PureState};
use output::{csv, emit};
use reproduce::Target;

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_REPRODUCTION: i32 = 4;

/// Environment variable capping worker threads.
pub const THREADS_ENV: &str = "TANGLEBOUND_THREADS";

const DEFAULT_GRID: usize = 200;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("reproduction failed: {0}")]
    Reproduction(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Io(_) => EXIT_IO,
            CliError::Reproduction(_) => EXIT_REPRODUCTION,
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        match e {
            crate::Error::Io(io) => CliError::Io(io),
            other => CliError::Input(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "tanglebound", version, about = "Lower bounds on the three-tangle from witness data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub options: Options,
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct Options {
    /// Number of grid points
    #[arg(long, global = true, value_name = "N")]
    pub grid: Option<usize>,
    /// Random restarts per inner minimization
    #[arg(long, global = true, value_name = "N")]
    pub restarts: Option<usize>,
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub space: Option<SpaceArg>,
    #[arg(long, global = true, value_enum)]
    pub measure: Option<MeasureArg>,
    /// Skew parameter of the off-diagonal witness
    #[arg(long, global = true, value_name = "X", allow_hyphen_values = true)]
    pub omega: Option<f64>,
    /// Include the outer-iteration trace in JSON results
    #[arg(long, global = true)]
    pub trace: bool,
    /// Output file (directory for `reproduce`)
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// JSON file with optimizer settings; flags take precedence
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Three-tangle breakdown of a pure state given as JSON
    Tangle { state: PathBuf },
    /// Characteristic curve with its lower convex envelope
    Curve {
        #[arg(value_enum)]
        family: Family,
    },
    /// Lower bound for a witness problem given as JSON
    Bound { problem: PathBuf },
    /// Recompute a published figure or table and compare
    Reproduce {
        #[arg(value_enum)]
        target: Target,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    /// tau3 of sqrt(q) GHZ - sqrt(1-q) W
    GhzwTau3,
    /// tau3^2 of the same family
    GhzwTau3sq,
    /// Minimum over phases on the skew-witness constraint, against p
    Skew,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpaceArg {
    Full,
    Symmetric,
    /// The GHZ-W span, unless the problem file names another span
    Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeasureArg {
    Tau3,
    Tau3sq,
}

impl From<MeasureArg> for Measure {
    fn from(m: MeasureArg) -> Self {
        match m {
            MeasureArg::Tau3 => Measure::Tau3,
            MeasureArg::Tau3sq => Measure::Tau3Sq,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub options: Options,
    threads: Option<usize>,
}

impl RunConfig {
    pub fn new(options: Options, threads: Option<&str>) -> Result<Self, CliError> {
        if let Some(n) = options.grid {
            if n < 2 {
                return Err(CliError::Input(format!("--grid must be at least 2, got {n}")));
            }
        }
        if options.restarts == Some(0) {
            return Err(CliError::Input("--restarts must be positive".into()));
        }
        if let Some(w) = options.omega {
            if !w.is_finite() {
                return Err(CliError::Input("--omega must be finite".into()));
            }
        }
        let threads = match threads.map(str::trim).filter(|s| !s.is_empty()) {
            None => None,
            Some(s) => match s.parse::<usize>() {
                Ok(n) if n > 0 => Some(n),
                _ => return Err(CliError::Input(format!("{THREADS_ENV} must be a positive integer, got {s:?}"))),
            },
        };
        Ok(Self { options, threads })
    }

    pub fn grid(&self) -> usize {
        self.options.grid.unwrap_or(DEFAULT_GRID)
    }

    /// Defaults, then the problem's own settings, then `--config`, then flags.
    pub fn settings(&self, base: OptimizerSettings) -> Result<OptimizerSettings, CliError> {
        let mut settings = base;
        if let Some(path) = &self.options.config {
            let text = fs::read_to_string(path)?;
            let patch: Value = serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            let Value::Object(patch) = patch else {
                return Err(CliError::Input(format!("{}: expected a JSON object", path.display())));
            };
            let mut merged = serde_json::to_value(&settings).map_err(crate::Error::from)?;
            if let Value::Object(map) = &mut merged {
                map.extend(patch);
            }
            settings = serde_json::from_value(merged).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        }
        if let Some(r) = self.options.restarts {
            settings.restarts = r;
        }
        if let Some(s) = self.options.seed {
            settings.seed = s;
        }
        settings.validate()?;
        Ok(settings)
    }

    pub fn space(&self, current: &SearchSpace) -> SearchSpace {
        match self.options.space {
            None => current.clone(),
            Some(SpaceArg::Full) => SearchSpace::Full,
            Some(SpaceArg::Symmetric) => SearchSpace::Symmetric,
            Some(SpaceArg::Span) => match current {
                SearchSpace::Span(_) => current.clone(),
                _ => SearchSpace::ghz_w_span(),
            },
        }
    }

    fn out(&self) -> Option<&Path> {
        self.options.out.as_deref()
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code. Errors are reported on stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("tanglebound: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    let threads = std::env::var(THREADS_ENV).ok();
    let config = RunConfig::new(cli.options, threads.as_deref())?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Input(format!("cannot start worker threads: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Tangle { state } => cmd_tangle(&config, state),
        Command::Curve { family } => cmd_curve(&config, *family),
        Command::Bound { problem } => cmd_bound(&config, problem),
        Command::Reproduce { target } => reproduce::cmd_reproduce(&config, *target),
    })
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn to_json(value: &impl serde::Serialize) -> Result<String, CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(crate::Error::from)?;
    text.push('\n');
    Ok(text)
}

pub fn cmd_tangle(config: &RunConfig, path: &Path) -> Result<(), CliError> {
    let state: PureState = read_json(path)?;
    let t = three_tangle(&state);
    let text = match config.options.format.unwrap_or(Format::Csv) {
        Format::Json => to_json(&t)?,
        Format::Csv => csv(
            &["quantity", "re", "im"],
            [
                vec![t.tau3, 0.0],
                vec![t.tau3_sq, 0.0],
                vec![t.d1.re, t.d1.im],
                vec![t.d2.re, t.d2.im],
                vec![t.d3.re, t.d3.im],
            ],
        )
        .lines()
        .zip(["quantity", "tau3", "tau3_sq", "d1", "d2", "d3"])
        .map(|(line, name)| if name == "quantity" { line.to_string() } else { format!("{name},{line}") })
        .collect::<Vec<_>>()
        .join("\n")
            + "\n",
    };
    emit(config.out(), &text)?;
    Ok(())
}

/// The sampled curve of a family and its header label for the abscissa.
/// The GHZ-W families get `q0` and `q1` as extra rows.
pub fn family_curve(family: Family, grid: usize, omega: f64, measure: Measure) -> Result<(&'static str, SampledCurve), CliError> {
    let mut xs: Vec<f64> = (0..grid).map(|i| i as f64 / (grid - 1) as f64).collect();
    if family != Family::Skew {
        // the hull of tau3(q, 0) kinks at q0 and q1; sampling them keeps the envelope exact
        xs.extend([q0(), q1()]);
        xs.sort_by(f64::total_cmp);
        xs.dedup();
    }
    let curve = match family {
        Family::GhzwTau3 => SampledCurve::from_fn(xs, tau3_diagonal)?,
        Family::GhzwTau3sq => SampledCurve::from_fn(xs, |q| tau3_diagonal(q).powi(2))?,
        Family::Skew => {
            let ys = xs
                .iter()
                .map(|&p| skew_characteristic(p, omega, measure).map(|v| v.0))
                .collect::<crate::Result<Vec<_>>>()?;
            SampledCurve::new(xs, ys)?
        }
    };
    Ok((if family == Family::Skew { "p" } else { "q" }, curve))
}

pub fn cmd_curve(config: &RunConfig, family: Family) -> Result<(), CliError> {
    let measure = config.options.measure.map(Measure::from).unwrap_or_default();
    let (label, curve) = family_curve(family, config.grid(), config.options.omega.unwrap_or(1.0), measure)?;
    let envelope = lower_convex_envelope(&curve).values();
    let text = match config.options.format.unwrap_or(Format::Csv) {
        Format::Csv => csv(
            &[label, "value", "envelope"],
            curve.points().zip(&envelope).map(|((x, y), e)| vec![x, y, *e]),
        ),
        Format::Json => {
            let rows: Vec<Value> = curve
                .points()
                .zip(&envelope)
                .map(|((x, y), e)| json!({ label: x, "value": y, "envelope": e }))
                .collect();
            to_json(&rows)?
        }
    };
    emit(config.out(), &text)?;
    Ok(())
}

fn load_problem(config: &RunConfig, path: &Path) -> Result<BoundProblem, CliError> {
    let raw: BoundProblem = read_json(path)?;
    let settings = config.settings(raw.settings().clone())?;
    let space = config.space(raw.space());
    let mut problem = raw.with_settings(settings)?.with_space(space)?;
    if let Some(m) = config.options.measure {
        problem = problem.with_measure(m.into());
    }
    Ok(problem)
}

pub fn cmd_bound(config: &RunConfig, path: &Path) -> Result<(), CliError> {
    let problem = load_problem(config, path)?;
    let format = config.options.format;
    let text = match config.options.grid {
        None => {
            let mut result = legendre_bound(&problem)?;
            match format.unwrap_or(Format::Json) {
                Format::Csv => csv(&["w", "epsilon"], [vec![problem.measured()[0], result.epsilon]]),
                Format::Json => {
                    if !config.options.trace {
                        result.trace.clear();
                    }
                    let mut value = serde_json::to_value(&result).map_err(crate::Error::from)?;
                    if !config.options.trace {
                        if let Value::Object(map) = &mut value {
                            map.remove("trace");
                        }
                    }
                    to_json(&value)?
                }
            }
        }
        Some(n) => {
            let (lo, hi) = witness_range(&problem.witnesses()[0], problem.space())?;
            let solver = LegendreSolver::new(&problem)?;
            let mut rows = Vec::with_capacity(n);
            for i in 0..n {
                let w = lo + (hi - lo) * i as f64 / (n - 1) as f64;
                let mut measured = problem.measured().to_vec();
                measured[0] = w;
                rows.push((w, solver.solve(&measured)?));
            }
            match format.unwrap_or(Format::Csv) {
                Format::Csv => csv(&["w", "epsilon"], rows.iter().map(|(w, r)| vec![*w, r.epsilon])),
                Format::Json => {
                    let list: Vec<Value> = rows
                        .iter()
                        .map(|(w, r)| json!({ "w": w, "epsilon": r.epsilon, "r_star": r.r_star, "status": r.status }))
                        .collect();
                    to_json(&list)?
                }
            }
        }
    };
    emit(config.out(), &text)?;
    Ok(())
}
