//! Command-line front end: `simulate`, `montecarlo` and `analyze`.

pub mod scenario_file;
pub mod svg;
pub mod trace_csv;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::duration::{blocking_bounds, option_durations};
use crate::error::{Error, Result};
use crate::geometry::encounter_point;
use crate::modes::predict_blocking;
use crate::resolution::Strategy;
use crate::safety_filter::free_flight_threshold;
use crate::sim::{run_monte_carlo, run_scenario, EventKind, ScenarioConfig};

pub use scenario_file::{load_scenario, parse_scenario, scenario_to_string, ScenarioFile, SCHEMA_VERSION};

pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_PARSE: u8 = 2;
pub const EXIT_CONFIG: u8 = 3;
pub const EXIT_SAFETY: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "airblock", version, about = "Two-airplane encounter simulator with blocking analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scenario and write its trace.
    Simulate(SimulateArgs),
    /// Run a batch of generated blocking encounters under several strategies.
    Montecarlo(MonteCarloArgs),
    /// Print the analytic view of a two-airplane scenario.
    Analyze { scenario: PathBuf },
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub scenario: PathBuf,
    /// Trace CSV destination.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional SVG plot destination.
    #[arg(long)]
    pub plot: Option<PathBuf>,
    /// Exit with code 4 and write nothing if separation ever drops below r.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct MonteCarloArgs {
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Comma-separated list from maintain, fixed, adaptive.
    #[arg(long, default_value = "fixed,adaptive", value_delimiter = ',')]
    pub strategies: Vec<String>,
    /// Stats JSON destination.
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads; defaults to the global pool.
    #[arg(long)]
    pub jobs: Option<usize>,
}

/// Failure of a command together with its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse { .. } => EXIT_PARSE,
            Error::InvalidConfig(_) | Error::UnstableGain { .. } => EXIT_CONFIG,
            _ => EXIT_FAILURE,
        };
        CliError { code, message: e.to_string() }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError { code: EXIT_FAILURE, message: format!("{}: {e}", path.display()) })
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<String, CliError> {
    let config = load_scenario(&args.scenario)?;
    let trace = run_scenario(&config)?;
    let violations = trace.count(EventKind::SafetyViolation);
    if args.strict && violations > 0 {
        return Err(CliError {
            code: EXIT_SAFETY,
            message: format!("{violations} safety violation(s), min separation {:.6} m", trace.min_separation),
        });
    }
    // Render everything before touching the filesystem.
    let csv = trace_csv::trace_to_csv(&trace);
    let plot = args.plot.as_ref().map(|_| svg::render_svg(&trace));
    write_file(&args.out, &csv)?;
    if let (Some(path), Some(plot)) = (&args.plot, plot) {
        write_file(path, &plot)?;
    }
    Ok(format!(
        "{}: {} steps, {} events, min separation {:.3} m\n",
        trace.name,
        trace.steps.len(),
        trace.events.len(),
        trace.min_separation
    ))
}

pub fn parse_strategies(names: &[String]) -> Result<Vec<Strategy>> {
    names
        .iter()
        .map(|n| n.trim())
        .filter(|n| !n.is_empty())
        .map(|n| Strategy::parse(n).ok_or_else(|| Error::InvalidConfig(format!("unknown strategy `{n}`"))))
        .collect()
}

pub fn cmd_montecarlo(args: &MonteCarloArgs) -> Result<String, CliError> {
    if args.n == 0 {
        return Err(CliError { code: EXIT_CONFIG, message: "--n must be at least 1".into() });
    }
    let strategies = parse_strategies(&args.strategies)?;
    let summary = run_monte_carlo(args.seed, args.n, &strategies, args.jobs)?;
    let mut json =
        serde_json::to_string_pretty(&summary).map_err(|e| CliError { code: EXIT_FAILURE, message: e.to_string() })?;
    json.push('\n');
    write_file(&args.out, &json)?;
    let mut report = String::new();
    for (name, s) in &summary.strategies {
        let _ = writeln!(
            report,
            "{name:>9}: mean {:.2} s, reduction {:.1}%, violations {}, incomplete {}",
            s.mean_completion_s, s.reduction_pct, s.violations, s.incomplete
        );
    }
    Ok(report)
}

/// Text report for `analyze`. The bounds are evaluated at the first blocking
/// onset of a baseline run with no resolution strategy.
pub fn analyze_report(config: &ScenarioConfig) -> Result<String> {
    if config.agents.len() != 2 {
        return Err(Error::InvalidConfig(format!("analyze needs exactly 2 agents, got {}", config.agents.len())));
    }
    let (a, b) = (&config.agents[0], &config.agents[1]);
    let mut out = String::new();
    let _ = writeln!(out, "scenario: {}", config.name);
    let _ = writeln!(out, "free-flight threshold: {:.6} m", free_flight_threshold(&config.safety));
    let _ = writeln!(out, "initial separation: {:.6} m", a.position.distance(b.position));
    match encounter_point(a.position, a.target, b.position, b.target) {
        None => {
            let _ = writeln!(out, "prediction: no encounter point");
        }
        Some(pc) => {
            let _ = writeln!(out, "encounter point: ({:.6}, {:.6})", pc.x, pc.y);
            let tol = config.tolerances.angle;
            let verdict = if predict_blocking(a.position, a.target, b.position, b.target, tol, tol)? {
                "blocking predicted"
            } else {
                "no blocking predicted"
            };
            let _ = writeln!(out, "prediction: {verdict}");
        }
    }

    let baseline = config.clone().with_strategy(Strategy::None);
    let trace = run_scenario(&baseline)?;
    let Some(onset) = trace.events_of(EventKind::BlockingStart).next() else {
        let _ = writeln!(out, "baseline run: no blocking");
        return Ok(out);
    };
    let step = &trace.steps[onset.step];
    let (p1, p2) = (step.agents[0].position, step.agents[1].position);
    let _ = writeln!(out, "blocking onset: t = {:.2} s", onset.time);
    match blocking_bounds(p1, a.target, p2, b.target, &config.safety) {
        Ok(bb) => {
            let _ = writeln!(out, "t_lb = {:.6} s", bb.t_lb);
            let _ = writeln!(out, "t_ub = {:.6} s", bb.t_ub);
        }
        Err(e) => {
            let _ = writeln!(out, "duration bounds unavailable: {e}");
        }
    }
    let d = option_durations(p1, a.target, p2, b.target, &config.safety)?;
    let _ = writeln!(out, "t_b = {:.6} s", d.t_b);
    let _ = writeln!(out, "t_u_1 = {:.6} s", d.t_u_i);
    let _ = writeln!(out, "t_u_2 = {:.6} s", d.t_u_j);
    let end = trace.events_of(EventKind::BlockingEnd).find(|e| e.agent == onset.agent && e.time >= onset.time);
    match end {
        Some(e) => {
            let _ = writeln!(out, "simulated blocking duration: {:.2} s", e.time - onset.time);
        }
        None => {
            let _ = writeln!(out, "simulated blocking duration: unfinished at horizon");
        }
    }
    Ok(out)
}

pub fn cmd_analyze(path: &Path) -> Result<String, CliError> {
    let config = load_scenario(path)?;
    Ok(analyze_report(&config)?)
}

pub fn run(cli: &Cli) -> Result<String, CliError> {
    match &cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Montecarlo(a) => cmd_montecarlo(a),
        Command::Analyze { scenario } => cmd_analyze(scenario),
    }
}

/// Binary entry point.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            print!("{report}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
