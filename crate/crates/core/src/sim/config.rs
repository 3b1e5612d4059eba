use serde::{Deserialize, Serialize};

use crate::alt_controllers::PfParams;
use crate::dynamics::DynamicsParams;
use crate::error::{Error, Result};
use crate::geometry::{Angle, Vec2};
use crate::modes::{DetectionParams, DEFAULT_RATE_TOL};
use crate::resolution::{ResolutionParams, Strategy};
use crate::safety_filter::{SafetyParams, TurnPreference, DEFAULT_TIE_TOL};

pub const MAX_AGENTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ControllerKind {
    #[default]
    Cbf,
    Vo,
    Pf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentConfig {
    pub position: Vec2,
    pub target: Vec2,
    /// Initial heading; defaults to the cruising angle.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heading: Option<Angle>,
    #[serde(default)]
    pub lambda: TurnPreference,
    #[serde(default)]
    pub controller: ControllerKind,
    #[serde(default)]
    pub strategy: Strategy,
    #[serde(default)]
    pub knows_opponent_target: bool,
}

impl AgentConfig {
    pub fn new(position: Vec2, target: Vec2) -> Self {
        Self {
            position,
            target,
            heading: None,
            lambda: TurnPreference::Positive,
            controller: ControllerKind::Cbf,
            strategy: Strategy::None,
            knows_opponent_target: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Tie-break window around the bearing, rad.
    #[serde(default = "tie")]
    pub tie: f64,
    /// Bearing-rate threshold for blocking, rad/s.
    #[serde(default = "rate")]
    pub rate: f64,
    /// Arrival radius, m. Defaults to one step of travel.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reach: Option<f64>,
    /// Slack for angle equalities, rad.
    #[serde(default = "angle")]
    pub angle: f64,
    /// Separation below `r` tolerated before a violation is logged, m.
    /// Defaults to one step of travel.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub violation_slack: Option<f64>,
}

fn tie() -> f64 {
    DEFAULT_TIE_TOL
}
fn rate() -> f64 {
    DEFAULT_RATE_TOL
}
fn angle() -> f64 {
    1e-6
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { tie: tie(), rate: rate(), reach: None, angle: angle(), violation_slack: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VoSettings {
    #[serde(default = "tau")]
    pub tau: f64,
}

fn tau() -> f64 {
    10.0
}

impl Default for VoSettings {
    fn default() -> Self {
        Self { tau: tau() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ControllerParams {
    #[serde(default)]
    pub vo: VoSettings,
    #[serde(default)]
    pub pf: PfParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub agents: Vec<AgentConfig>,
    pub dynamics: DynamicsParams,
    /// `speed` mirrors `dynamics.speed`.
    pub safety: SafetyParams,
    pub tolerances: Tolerances,
    pub resolution: ResolutionParams,
    pub controllers: ControllerParams,
    pub detection: DetectionParams,
    /// Simulated time limit, s.
    pub horizon: f64,
    pub rng_seed: u64,
    /// Lifts the requirement that targets be at least `r` apart.
    pub allow_shared_targets: bool,
}

impl ScenarioConfig {
    pub fn new(
        name: impl Into<String>,
        agents: Vec<AgentConfig>,
        dynamics: DynamicsParams,
        r: f64,
        alpha: f64,
        horizon: f64,
    ) -> Self {
        Self {
            name: name.into(),
            agents,
            safety: SafetyParams::new(r, alpha, dynamics.speed),
            dynamics,
            tolerances: Tolerances::default(),
            resolution: ResolutionParams::default(),
            controllers: ControllerParams::default(),
            detection: DetectionParams::default(),
            horizon,
            rng_seed: 0,
            allow_shared_targets: false,
        }
    }

    pub fn reach_tol(&self) -> f64 {
        self.tolerances.reach.unwrap_or(self.dynamics.step_length())
    }

    pub fn violation_slack(&self) -> f64 {
        self.tolerances.violation_slack.unwrap_or(self.dynamics.step_length())
    }

    pub fn with_strategy(mut self, strategy: Strategy) -> Self {
        for a in &mut self.agents {
            a.strategy = strategy;
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        self.dynamics.validate()?;
        if self.safety.speed != self.dynamics.speed {
            return bad("safety speed must match dynamics speed".into());
        }
        self.safety.validate()?;
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return bad(format!("horizon must be > 0, got {}", self.horizon));
        }
        let n = self.agents.len();
        if !(2..=MAX_AGENTS).contains(&n) {
            return bad(format!("need 2..={MAX_AGENTS} agents, got {n}"));
        }
        let t = &self.tolerances;
        for (name, v) in [("tie", t.tie), ("rate", t.rate), ("angle", t.angle)] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("tolerance {name} must be > 0"));
            }
        }
        for (name, v) in [("reach", t.reach), ("violation_slack", t.violation_slack)] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return bad(format!("tolerance {name} must be > 0"));
                }
            }
        }
        let res = &self.resolution;
        if !(res.interactive_gain >= 1.0) {
            return bad("interactive_gain must be at least 1".into());
        }
        if !(res.interaction_timeout > 0.0 && res.min_pose_separation > 0.0 && res.duration_tie_tol > 0.0) {
            return bad("resolution tolerances must be > 0".into());
        }
        let det = &self.detection;
        if !(det.deadlock_window >= 2.0 && det.displacement_factor > 0.0) {
            return bad("deadlock window must be at least 2 s".into());
        }
        if det.livelock_window.is_some_and(|w| !(w >= 2.0)) {
            return bad("livelock window must be at least 2 s".into());
        }
        if !(self.controllers.vo.tau > 0.0) {
            return bad("vo tau must be > 0".into());
        }
        self.controllers.pf.validate(self.safety.r)?;

        let r = self.safety.r;
        for (i, a) in self.agents.iter().enumerate() {
            if !(a.position.is_finite() && a.target.is_finite()) {
                return bad(format!("agent {} has non-finite coordinates", i + 1));
            }
            if a.heading.is_some_and(|h| !h.radians().is_finite()) {
                return bad(format!("agent {} has a non-finite heading", i + 1));
            }
            for (j, b) in self.agents.iter().enumerate().skip(i + 1) {
                let d = a.position.distance(b.position);
                // Relative slack absorbs rounding in configs placed exactly r apart.
                if d < r * (1.0 - 1e-12) {
                    return bad(format!("agents {} and {} start {d} m apart, below r = {r}", i + 1, j + 1));
                }
                let dt = a.target.distance(b.target);
                if dt < r && !self.allow_shared_targets {
                    return bad(format!("targets of agents {} and {} are {dt} m apart, below r = {r}", i + 1, j + 1));
                }
            }
        }
        Ok(())
    }
}
