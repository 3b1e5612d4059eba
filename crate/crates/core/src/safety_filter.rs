//! CBF-based heading safety filter.
//!
//! With the barrier `h = ‖p_i − p_j‖² − r²`, the linear class-K term `α·h`
//! and a half-responsibility split, the per-airplane constraint reads
//! `(α/2)·h + 2(p_i − p_j)ᵀu_i ≥ 0`. Under the constant-speed constraint
//! `‖u_i‖ = v` this becomes `cos(θ − β) ≤ L` with `L = α·h / (4v·‖p_i − p_j‖)`,
//! i.e. an unsafe arc of half-width `Δ = arccos(min(1, L))` centred on the
//! bearing `β` to the other airplane. The filter moves an unsafe cruising
//! heading to the nearest arc endpoint.
//!
//! [`qp_oracle`] solves the same problem by brute force over a heading grid and
//! never evaluates `arccos`; it exists to cross-check [`filter_heading`].

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{bearing, Angle, Vec2};

/// Headings closer than this to the bearing take the tie-break branch.
pub const DEFAULT_TIE_TOL: f64 = 1e-9;

/// Relative slack (in units of r²) before `h < 0` counts as a violation.
const H_TOL: f64 = 1e-9;

/// Relative slack accepted by [`cbf_condition_holds`] on the arc boundary.
const CONDITION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SafetyParams {
    /// Safety margin, m.
    pub r: f64,
    /// Slope of the linear class-K function, 1/s.
    pub alpha: f64,
    /// Forward speed, m/s.
    #[serde(skip)]
    pub speed: f64,
}

impl SafetyParams {
    pub fn new(r: f64, alpha: f64, speed: f64) -> Self {
        Self { r, alpha, speed }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("r", self.r), ("alpha", self.alpha), ("speed", self.speed)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Side taken when the cruising heading points exactly at the other airplane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(try_from = "i8", into = "i8")]
pub enum TurnPreference {
    /// `λ = +1`: correct to `β + Δ`.
    #[default]
    Positive,
    /// `λ = −1`: correct to `β − Δ`.
    Negative,
}

impl TurnPreference {
    pub fn sign(self) -> f64 {
        match self {
            TurnPreference::Positive => 1.0,
            TurnPreference::Negative => -1.0,
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            TurnPreference::Positive => TurnPreference::Negative,
            TurnPreference::Negative => TurnPreference::Positive,
        }
    }
}

impl TryFrom<i8> for TurnPreference {
    type Error = String;
    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(TurnPreference::Positive),
            -1 => Ok(TurnPreference::Negative),
            other => Err(format!("lambda must be 1 or -1, got {other}")),
        }
    }
}

impl From<TurnPreference> for i8 {
    fn from(t: TurnPreference) -> i8 {
        match t {
            TurnPreference::Positive => 1,
            TurnPreference::Negative => -1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FilterBranch {
    Unchanged,
    CorrectedMinus,
    CorrectedPlus,
    TieBreak,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterDecision {
    /// Commanded heading.
    pub theta: Angle,
    pub activated: bool,
    /// Half-width of the unsafe arc, in `[0, π/2]`.
    pub delta: f64,
    pub branch: FilterBranch,
    /// Bearing to the constraining airplane.
    pub bearing: Angle,
}

pub fn cbf_value(p1: Vec2, p2: Vec2, params: &SafetyParams) -> f64 {
    (p1 - p2).norm_sq() - params.r * params.r
}

/// Half-width `Δ` of the unsafe heading arc.
///
/// Fails with [`Error::SafetyViolated`] when the pair is already inside the
/// margin; callers that must keep going clamp to `π/2`.
pub fn half_angle_delta(p1: Vec2, p2: Vec2, params: &SafetyParams) -> Result<f64> {
    let d = p1.distance(p2);
    if d == 0.0 {
        return Err(Error::DegenerateGeometry("half-angle between coincident points"));
    }
    let h = cbf_value(p1, p2, params);
    if h < -H_TOL * params.r * params.r {
        return Err(Error::SafetyViolated { h });
    }
    let bound = params.alpha * h.max(0.0) / (4.0 * params.speed * d);
    Ok(bound.min(1.0).acos())
}

/// Separation above which no heading can violate the constraint.
pub fn free_flight_threshold(params: &SafetyParams) -> f64 {
    let a = 2.0 * params.speed / params.alpha;
    a + (a * a + params.r * params.r).sqrt()
}

/// Piecewise correction of the cruising heading `phi` against an unsafe arc
/// of half-width `delta` around `beta`.
pub fn correct_heading(
    phi: Angle,
    beta: Angle,
    delta: f64,
    preference: TurnPreference,
    tie_tol: f64,
) -> FilterDecision {
    let off = phi.diff(beta).radians();
    let (theta, branch) = if delta <= 0.0 || off.abs() >= delta {
        (phi, FilterBranch::Unchanged)
    } else if off.abs() < tie_tol {
        (beta.offset(preference.sign() * delta), FilterBranch::TieBreak)
    } else if off < 0.0 {
        (beta.offset(-delta), FilterBranch::CorrectedMinus)
    } else {
        (beta.offset(delta), FilterBranch::CorrectedPlus)
    };
    FilterDecision { theta, activated: branch != FilterBranch::Unchanged, delta, branch, bearing: beta }
}

/// Closed-form safety filter for airplane `i` against airplane `j`.
pub fn filter_heading(
    p_i: Vec2,
    p_j: Vec2,
    phi: Angle,
    preference: TurnPreference,
    params: &SafetyParams,
) -> Result<FilterDecision> {
    let beta = bearing(p_i, p_j)?;
    let delta = half_angle_delta(p_i, p_j, params)?;
    Ok(correct_heading(phi, beta, delta, preference, DEFAULT_TIE_TOL))
}

/// Decentralized constraint value `(α/2)·h + 2(p_i − p_j)ᵀu_i`.
pub fn cbf_margin(p_i: Vec2, p_j: Vec2, u_i: Vec2, params: &SafetyParams) -> f64 {
    0.5 * params.alpha * cbf_value(p_i, p_j, params) + 2.0 * (p_i - p_j).dot(u_i)
}

/// Centralized constraint value `α·h + 2(p_1 − p_2)ᵀ(u_1 − u_2)`.
pub fn centralized_cbf_margin(p1: Vec2, p2: Vec2, u1: Vec2, u2: Vec2, params: &SafetyParams) -> f64 {
    params.alpha * cbf_value(p1, p2, params) + 2.0 * (p1 - p2).dot(u1 - u2)
}

/// True when `u_i` satisfies the decentralized constraint, allowing
/// floating-point slack for commands placed exactly on the arc boundary.
pub fn cbf_condition_holds(p_i: Vec2, p_j: Vec2, u_i: Vec2, params: &SafetyParams) -> bool {
    let h = cbf_value(p_i, p_j, params);
    let scale = 0.5 * params.alpha * h.abs() + 2.0 * (p_i - p_j).norm() * u_i.norm() + 1.0;
    cbf_margin(p_i, p_j, u_i, params) >= -CONDITION_TOL * scale
}

/// Grid-search solution of the angular form of the filter:
/// minimise `|wrap(θ − φ)|` subject to `cos(θ − β) ≤ L`.
///
/// Searches the grid outward from `φ`, then bisects the boundary between the
/// first feasible grid heading and its infeasible neighbour.
pub fn qp_oracle(p_i: Vec2, p_j: Vec2, phi: Angle, params: &SafetyParams, grid_n: usize) -> Result<Angle> {
    if grid_n < 3600 {
        return Err(Error::Precondition("qp_oracle needs at least 3600 grid points"));
    }
    let rel = p_j - p_i;
    let d = rel.norm();
    if d == 0.0 {
        return Err(Error::DegenerateGeometry("oracle between coincident points"));
    }
    let h = cbf_value(p_i, p_j, params);
    let limit = params.alpha * h / (4.0 * params.speed * d);
    let (bx, by) = (rel.x / d, rel.y / d);
    // cos(θ − β) without forming β.
    let feasible = |theta: f64| theta.cos() * bx + theta.sin() * by <= limit;

    let phi_r = phi.radians();
    if feasible(phi_r) {
        return Ok(phi);
    }

    let step = TAU / grid_n as f64;
    let nearest = ((phi_r + PI) / step).round() as i64;
    let grid = |k: i64| -PI + step * k.rem_euclid(grid_n as i64) as f64;

    let mut best: Option<(f64, f64)> = None; // (feasible grid heading, |gap to φ|)
    for radius in 0..=(grid_n as i64 / 2 + 1) {
        for k in [nearest - radius, nearest + radius] {
            let theta = grid(k);
            if feasible(theta) {
                let gap = Angle::wrap(theta - phi_r).radians().abs();
                if best.is_none_or(|(_, g)| gap < g) {
                    best = Some((theta, gap));
                }
            }
        }
        // Grid headings further out are at least one step further from φ.
        if let Some((_, g)) = best {
            if (radius as f64 - 1.0) * step > g {
                break;
            }
        }
    }
    let (theta_grid, _) = best.ok_or(Error::Internal("oracle found no feasible heading"))?;

    // Bisect between the feasible grid point and φ's side of it.
    let toward_phi = Angle::wrap(phi_r - theta_grid).radians().signum();
    let mut good = theta_grid;
    let mut bad = theta_grid + toward_phi * step;
    if feasible(bad) {
        return Ok(Angle::wrap(bad));
    }
    for _ in 0..30 {
        let mid = 0.5 * (good + bad);
        if feasible(mid) {
            good = mid;
        } else {
            bad = mid;
        }
    }
    Ok(Angle::wrap(good))
}

/// Clamps Δ to `π/2` when the pair is already inside the margin.
pub fn half_angle_or_clamped(p1: Vec2, p2: Vec2, params: &SafetyParams) -> Result<(f64, bool)> {
    match half_angle_delta(p1, p2, params) {
        Ok(d) => Ok((d, false)),
        Err(Error::SafetyViolated { .. }) => Ok((FRAC_PI_2, true)),
        Err(e) => Err(e),
    }
}
