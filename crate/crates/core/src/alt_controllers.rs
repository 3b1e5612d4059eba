//! Two textbook avoidance controllers used to show that parallel flight is
//! not specific to the CBF filter: a plain velocity obstacle and an
//! attractive/repulsive potential field.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Angle, Vec2};

/// Number of candidate headings tried by [`vo_filter`].
pub const VO_GRID: usize = 3600;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VoParams {
    /// Look-ahead horizon, s.
    pub tau: f64,
    pub r: f64,
    pub speed: f64,
}

impl VoParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.r > 0.0 && self.speed > 0.0) {
            return Err(Error::InvalidConfig("velocity obstacle parameters must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PfParams {
    pub k_att: f64,
    pub k_rep: f64,
    /// Repulsion cut-off distance, m.
    pub influence_radius: f64,
}

impl Default for PfParams {
    fn default() -> Self {
        Self { k_att: 1.0, k_rep: 1e5, influence_radius: 90.0 }
    }
}

impl PfParams {
    pub fn validate(&self, r: f64) -> Result<()> {
        if !(self.k_att > 0.0 && self.k_rep > 0.0) {
            return Err(Error::InvalidConfig("potential field gains must be positive".into()));
        }
        if !(self.influence_radius >= r) {
            return Err(Error::InvalidConfig("influence_radius must be at least r".into()));
        }
        Ok(())
    }
}

/// Smallest distance between the two airplanes over `t ∈ [0, τ]` if `i`
/// flies `u` and `j` keeps `u_j`.
///
/// The squared distance is the quadratic `‖w + t·dv‖²`; its minimiser is
/// `−w·dv/‖dv‖²` clamped to the horizon.
pub fn min_predicted_separation(p_i: Vec2, p_j: Vec2, u: Vec2, u_j: Vec2, tau: f64) -> f64 {
    let w = p_j - p_i;
    let dv = u_j - u;
    let a = dv.norm_sq();
    let t = if a > 0.0 { (-w.dot(dv) / a).clamp(0.0, tau) } else { 0.0 };
    (w + dv * t).norm()
}

/// True when `u` leads to a separation below `r` within the horizon.
pub fn in_velocity_obstacle(p_i: Vec2, p_j: Vec2, u: Vec2, u_j: Vec2, params: &VoParams) -> bool {
    min_predicted_separation(p_i, p_j, u, u_j, params.tau) < params.r
}

/// Heading closest to the preferred velocity that leaves the velocity
/// obstacle. Falls back to the heading with the largest predicted
/// separation when every heading is inside.
pub fn vo_filter(p_i: Vec2, p_j: Vec2, u_j: Vec2, preferred: Vec2, params: &VoParams) -> Result<Vec2> {
    params.validate()?;
    let v = params.speed;
    let pref_heading = preferred.angle().ok_or(Error::InvalidInput("preferred velocity is zero".into()))?;
    let pref = pref_heading.unit() * v;
    if !in_velocity_obstacle(p_i, p_j, pref, u_j, params) {
        return Ok(pref);
    }
    let mut best: Option<(f64, Vec2)> = None;
    let mut fallback: Option<(f64, Vec2)> = None;
    for k in 0..VO_GRID {
        let heading = Angle::wrap(-PI + TAU * k as f64 / VO_GRID as f64);
        let u = heading.unit() * v;
        let sep = min_predicted_separation(p_i, p_j, u, u_j, params.tau);
        if sep >= params.r {
            let cost = heading.diff(pref_heading).radians().abs();
            if best.is_none_or(|(c, _)| cost < c) {
                best = Some((cost, u));
            }
        } else if fallback.is_none_or(|(s, _)| sep > s) {
            fallback = Some((sep, u));
        }
    }
    best.or(fallback).map(|(_, u)| u).ok_or(Error::Internal("empty heading grid"))
}

/// Heading along the sum of the attraction to the target and the
/// inverse-distance repulsion from the other airplane.
pub fn potential_field_heading(p_i: Vec2, t_i: Vec2, p_j: Vec2, previous: Angle, params: &PfParams) -> Result<Angle> {
    let to_target = t_i - p_i;
    let dist_t = to_target.norm();
    let away = p_i - p_j;
    let d = away.norm();
    if dist_t == 0.0 {
        return Err(Error::TargetReached);
    }
    if d == 0.0 {
        return Err(Error::DegenerateGeometry("potential field between coincident airplanes"));
    }
    let f_att = to_target * (params.k_att / dist_t);
    let f_rep = if d < params.influence_radius {
        away * (params.k_rep * (1.0 / d - 1.0 / params.influence_radius) / (d * d))
    } else {
        Vec2::ZERO
    };
    Ok((f_att + f_rep).angle().unwrap_or(previous))
}
