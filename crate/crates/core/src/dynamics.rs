//! Constant-speed kinematics: the single integrator used for analysis and
//! the unicycle with a high-gain heading tracker.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Angle, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KinematicState {
    pub position: Vec2,
    pub heading: Angle,
}

impl KinematicState {
    pub fn new(position: Vec2, heading: Angle) -> Self {
        Self { position, heading }
    }

    pub fn velocity(&self, speed: f64) -> Vec2 {
        self.heading.unit() * speed
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    #[default]
    SingleIntegrator,
    Unicycle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsParams {
    #[serde(default)]
    pub model: Model,
    /// Forward speed, m/s.
    pub speed: f64,
    /// Heading tracker gain, 1/s. Only used by the unicycle.
    #[serde(default = "default_gain")]
    pub heading_gain: f64,
    /// Integration step, s.
    #[serde(default = "default_dt")]
    pub dt: f64,
}

fn default_gain() -> f64 {
    10.0
}

fn default_dt() -> f64 {
    0.05
}

impl DynamicsParams {
    pub fn single_integrator(speed: f64, dt: f64) -> Self {
        Self { model: Model::SingleIntegrator, speed, heading_gain: default_gain(), dt }
    }

    pub fn unicycle(speed: f64, heading_gain: f64, dt: f64) -> Self {
        Self { model: Model::Unicycle, speed, heading_gain, dt }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.speed.is_finite() && self.speed > 0.0) {
            return Err(Error::InvalidConfig(format!("speed must be > 0, got {}", self.speed)));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidConfig(format!("dt must be > 0, got {}", self.dt)));
        }
        if self.model == Model::Unicycle {
            if !(self.heading_gain.is_finite() && self.heading_gain > 0.0) {
                return Err(Error::InvalidConfig(format!("heading_gain must be > 0, got {}", self.heading_gain)));
            }
            let product = self.heading_gain * self.dt;
            if product >= 2.0 {
                return Err(Error::UnstableGain { product });
            }
        }
        Ok(())
    }

    /// Distance covered in one step.
    pub fn step_length(&self) -> f64 {
        self.speed * self.dt
    }
}

/// One explicit-Euler step of the single integrator; the heading snaps to the command.
pub fn step_single_integrator(
    state: KinematicState,
    commanded_heading: Angle,
    params: &DynamicsParams,
) -> KinematicState {
    KinematicState {
        position: state.position + commanded_heading.unit() * params.step_length(),
        heading: commanded_heading,
    }
}

/// One explicit-Euler step of the unicycle with tracker
/// `a = -k·wrap(θ - θ*) + θ̇*`. Position integrates the pre-step heading.
pub fn step_unicycle(
    state: KinematicState,
    commanded_heading: Angle,
    commanded_heading_rate: f64,
    params: &DynamicsParams,
) -> KinematicState {
    let err = state.heading.diff(commanded_heading).radians();
    let turn_rate = -params.heading_gain * err + commanded_heading_rate;
    KinematicState {
        position: state.position + state.heading.unit() * params.step_length(),
        heading: state.heading.offset(turn_rate * params.dt),
    }
}

/// Finite-difference feed-forward `θ̇*`, clamped to `±π/dt`.
pub fn commanded_rate(previous: Angle, current: Angle, dt: f64) -> f64 {
    let limit = PI / dt;
    (current.diff(previous).radians() / dt).clamp(-limit, limit)
}

/// Dispatches on the configured model.
pub fn step(
    state: KinematicState,
    commanded_heading: Angle,
    previous_command: Option<Angle>,
    params: &DynamicsParams,
) -> KinematicState {
    match params.model {
        Model::SingleIntegrator => step_single_integrator(state, commanded_heading, params),
        Model::Unicycle => {
            let rate = previous_command.map(|prev| commanded_rate(prev, commanded_heading, params.dt)).unwrap_or(0.0);
            step_unicycle(state, commanded_heading, rate, params)
        }
    }
}
