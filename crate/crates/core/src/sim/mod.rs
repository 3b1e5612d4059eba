//! Scenario orchestration: configuration, the stepping loop, traces,
//! random encounter families and Monte Carlo batches.

mod config;
mod generate;
mod montecarlo;
mod runner;
mod trace;

pub use config::{AgentConfig, ControllerKind, ControllerParams, ScenarioConfig, Tolerances, VoSettings, MAX_AGENTS};
pub use generate::{generate_blocking_scenario, generate_corollary_scenario, Family};
pub use montecarlo::{
    run_monte_carlo, scenario_seed, splitmix64, MonteCarloSummary, RunOutcome, ScenarioRecord, StrategyStats,
};
pub use runner::{run_scenario, select_constraint_peer};
pub use trace::{AgentSample, Event, EventKind, SimulationTrace, TracePhase, TraceStep};
