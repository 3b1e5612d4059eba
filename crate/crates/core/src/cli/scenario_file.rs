//! JSON scenario documents.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::DynamicsParams;
use crate::error::{Error, Result};
use crate::modes::DetectionParams;
use crate::resolution::ResolutionParams;
use crate::safety_filter::SafetyParams;
use crate::sim::{AgentConfig, ControllerParams, ScenarioConfig, Tolerances};

pub const SCHEMA_VERSION: u32 = 1;

/// On-disk form of [`ScenarioConfig`]. The filter speed is not stored; it is
/// taken from `dynamics.speed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    pub name: String,
    pub dynamics: DynamicsParams,
    pub safety: SafetyParams,
    pub horizon: f64,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub resolution: ResolutionParams,
    #[serde(default)]
    pub controllers: ControllerParams,
    #[serde(default)]
    pub detection: DetectionParams,
    #[serde(default)]
    pub allow_shared_targets: bool,
    pub agents: Vec<AgentConfig>,
}

impl ScenarioFile {
    pub fn from_config(c: &ScenarioConfig) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            name: c.name.clone(),
            dynamics: c.dynamics,
            safety: c.safety,
            horizon: c.horizon,
            rng_seed: c.rng_seed,
            tolerances: c.tolerances,
            resolution: c.resolution,
            controllers: c.controllers,
            detection: c.detection,
            allow_shared_targets: c.allow_shared_targets,
            agents: c.agents.clone(),
        }
    }

    /// Builds the validated configuration.
    pub fn into_config(self) -> Result<ScenarioConfig> {
        let mut c =
            ScenarioConfig::new(self.name, self.agents, self.dynamics, self.safety.r, self.safety.alpha, self.horizon);
        c.rng_seed = self.rng_seed;
        c.tolerances = self.tolerances;
        c.resolution = self.resolution;
        c.controllers = self.controllers;
        c.detection = self.detection;
        c.allow_shared_targets = self.allow_shared_targets;
        c.validate().map_err(|e| match e {
            Error::InvalidConfig(_) => e,
            other => Error::InvalidConfig(other.to_string()),
        })?;
        Ok(c)
    }
}

fn parse_error(e: serde_json::Error) -> Error {
    Error::Parse { line: e.line(), column: e.column(), message: e.to_string() }
}

/// Parses a scenario document without validating the physics.
pub fn parse_scenario_file(text: &str) -> Result<ScenarioFile> {
    // Check the version before the full schema so old files get a clear message.
    let raw: serde_json::Value = serde_json::from_str(text).map_err(parse_error)?;
    match raw.get("schema_version").and_then(serde_json::Value::as_u64) {
        Some(v) if v == u64::from(SCHEMA_VERSION) => {}
        Some(v) => {
            return Err(Error::Parse {
                line: 1,
                column: 1,
                message: format!("unsupported schema_version {v}, expected {SCHEMA_VERSION}"),
            })
        }
        None => return Err(Error::Parse { line: 1, column: 1, message: "missing field `schema_version`".into() }),
    }
    serde_json::from_str(text).map_err(parse_error)
}

pub fn parse_scenario(text: &str) -> Result<ScenarioConfig> {
    parse_scenario_file(text)?.into_config()
}

pub fn load_scenario(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_scenario(&text)
}

/// Pretty JSON with a trailing newline.
pub fn scenario_to_string(c: &ScenarioConfig) -> String {
    let mut s = serde_json::to_string_pretty(&ScenarioFile::from_config(c)).expect("scenario serializes");
    s.push('\n');
    s
}
