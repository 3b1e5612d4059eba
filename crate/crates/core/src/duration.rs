//! Blocking-duration bounds and the completion-time estimates behind the
//! adaptive priority rule.
//!
//! During mutual blocking the pair translates sideways, perpendicular to the
//! line joining them, at speed `v·sin Δ ≤ v`. Blocking ends once that line
//! sweeps over one of the targets, so the relevant length for airplane `i` is
//! the perpendicular offset `‖p_i − T_i‖·|sin(β_i^j − φ_i)|` of `T_i` from the
//! line.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{bearing, cruising_angle, Vec2};
use crate::safety_filter::SafetyParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockingBounds {
    pub t_lb: f64,
    pub t_ub: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptionDurations {
    /// Keep blocking until it breaks by itself.
    pub t_b: f64,
    /// Ego performs the unblocking maneuver.
    pub t_u_i: f64,
    /// Opponent performs the unblocking maneuver.
    pub t_u_j: f64,
}

/// Distance from `target` to the line through `p` with direction `bearing_to_other`.
fn lateral_offset(p: Vec2, target: Vec2, other: Vec2) -> Result<f64> {
    let b = bearing(p, other)?;
    Ok(b.unit().cross(target - p).abs())
}

/// Offset of the target that sits closer to the pair's connecting line.
fn min_offset(p1: Vec2, t1: Vec2, p2: Vec2, t2: Vec2) -> Result<f64> {
    Ok(lateral_offset(p1, t1, p2)?.min(lateral_offset(p2, t2, p1)?))
}

/// Bounds on how long an ongoing mutual blocking episode lasts.
pub fn blocking_bounds(p1: Vec2, t1: Vec2, p2: Vec2, t2: Vec2, params: &SafetyParams) -> Result<BlockingBounds> {
    for (p, t, o) in [(p1, t1, p2), (p2, t2, p1)] {
        let off = cruising_angle(p, t)?.diff(bearing(p, o)?).radians();
        if off.abs() >= FRAC_PI_2 {
            return Err(Error::Precondition("cruising angle outside the blocking arc"));
        }
    }
    let v = params.speed;
    let t_lb = min_offset(p1, t1, p2, t2)? / v;
    let gap = (p1.distance(p2) - params.r).max(0.0);
    Ok(BlockingBounds { t_lb, t_ub: t_lb + gap / (2.0 * v) })
}

/// Approximate completion times of the three resolution options, seen from
/// airplane `i`.
pub fn option_durations(p_i: Vec2, t_i: Vec2, p_j: Vec2, t_j: Vec2, params: &SafetyParams) -> Result<OptionDurations> {
    let (v, r) = (params.speed, params.r);
    let o = p_i.midpoint(p_j);
    let tangent = |t: Vec2| ((t - o).norm_sq() - r * r).max(0.0).sqrt();
    let arc = PI * r;
    let t_b = (2.0 * min_offset(p_i, t_i, p_j, t_j)? + tangent(t_i) + tangent(t_j) + arc) / v;
    let t_u_i = (t_i.distance(p_j) + t_j.distance(p_j) + arc) / v;
    let t_u_j = (t_i.distance(p_i) + t_j.distance(p_i) + arc) / v;
    Ok(OptionDurations { t_b, t_u_i, t_u_j })
}
