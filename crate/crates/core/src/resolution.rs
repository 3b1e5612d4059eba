//! Communication-free blocking resolution.
//!
//! An airplane in blocking mode can break the episode by pointing its
//! cruising angle at the opponent's current position (a temporary target);
//! the closed-form filter then swings it around the opponent. Which airplane
//! does this is decided independently by both sides from the same duration
//! estimates, with a right-hand rule for exact ties. When the opponent's
//! target is unknown the ego first flies away until the opponent reverts to
//! cruising, and triangulates the target from two observed cruising poses.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::duration::{option_durations, OptionDurations};
use crate::error::Result;
use crate::geometry::{line_intersection, Angle, Vec2};
use crate::modes::ModeLabel;
use crate::safety_filter::SafetyParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Keep blocking until it ends by itself.
    #[default]
    None,
    /// Right-hand rule every time.
    FixedPriority,
    /// Shortest estimated completion time.
    Adaptive,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::None => "maintain",
            Strategy::FixedPriority => "fixed",
            Strategy::Adaptive => "adaptive",
        }
    }

    pub fn parse(s: &str) -> Option<Strategy> {
        match s {
            "maintain" | "none" => Some(Strategy::None),
            "fixed" | "fixed_priority" => Some(Strategy::FixedPriority),
            "adaptive" => Some(Strategy::Adaptive),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Phase {
    #[default]
    Normal,
    Interacting,
    Unblocking,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Normal => "normal",
            Phase::Interacting => "interacting",
            Phase::Unblocking => "unblocking",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PriorityChoice {
    MaintainBlocking,
    EgoUnblocks,
    OpponentUnblocks,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PriorityDecision {
    pub choice: PriorityChoice,
    pub tie_broken: bool,
}

/// Right-hand rule: whoever sees the opponent on its left gives way.
pub fn right_hand_rule(opponent_on_left: bool) -> PriorityChoice {
    if opponent_on_left {
        PriorityChoice::EgoUnblocks
    } else {
        PriorityChoice::OpponentUnblocks
    }
}

/// Picks the option with the smallest estimate. Equal unblocking estimates
/// fall back to the right-hand rule.
pub fn adaptive_priority(d: &OptionDurations, opponent_on_left: bool, tol: f64) -> PriorityDecision {
    if d.t_b < d.t_u_i.min(d.t_u_j) {
        return PriorityDecision { choice: PriorityChoice::MaintainBlocking, tie_broken: false };
    }
    if (d.t_u_i - d.t_u_j).abs() < tol {
        return PriorityDecision { choice: right_hand_rule(opponent_on_left), tie_broken: true };
    }
    let choice = if d.t_u_i < d.t_u_j { PriorityChoice::EgoUnblocks } else { PriorityChoice::OpponentUnblocks };
    PriorityDecision { choice, tie_broken: false }
}

/// Triangulates a target from the two logged poses with the widest heading
/// separation. Both rays must point forward at the intersection.
pub fn estimate_target(poses: &[(Vec2, Angle)], min_separation: f64) -> Option<Vec2> {
    let mut best: Option<(usize, usize, f64)> = None;
    for a in 0..poses.len() {
        for b in a + 1..poses.len() {
            let sep = poses[a].1.unit().cross(poses[b].1.unit()).abs();
            if best.is_none_or(|(_, _, s)| sep > s) {
                best = Some((a, b, sep));
            }
        }
    }
    let (a, b, sep) = best?;
    // |sin| also rejects near-antiparallel rays.
    if sep <= min_separation.sin() {
        return None;
    }
    let (p1, h1) = poses[a];
    let (p2, h2) = poses[b];
    let hit = line_intersection(p1, h1.unit(), p2, h2.unit())?;
    (hit.k1 > 0.0 && hit.k2 > 0.0).then_some(hit.point)
}

/// Interactive command: the filtered velocity plus a push of `gain·v` directly
/// away from the opponent, rescaled to speed `v`.
///
/// With `gain ≥ 1` the away-component of the sum is never negative, so the
/// result keeps the filter's constraint.
pub fn interactive_velocity(filtered: Vec2, p_i: Vec2, p_j: Vec2, speed: f64, gain: f64) -> Vec2 {
    let away = (p_i - p_j).normalized().unwrap_or(Vec2::new(1.0, 0.0));
    let sum = filtered + away * (gain * speed);
    match sum.normalized() {
        Some(dir) if sum.norm() > 1e-9 * speed => dir * speed,
        _ => away * speed,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolutionParams {
    /// Interactive gain relative to `v`.
    #[serde(default = "default_gain")]
    pub interactive_gain: f64,
    /// Interaction time after which the right-hand rule takes over, s.
    #[serde(default = "default_timeout")]
    pub interaction_timeout: f64,
    /// Minimum heading separation for triangulation, rad.
    #[serde(default = "default_separation")]
    pub min_pose_separation: f64,
    /// Two unblocking estimates closer than this are a tie, s.
    #[serde(default = "default_tie")]
    pub duration_tie_tol: f64,
    /// Heading change between observations below which the opponent is steady, rad.
    #[serde(default = "default_steady")]
    pub steady_heading_tol: f64,
}

fn default_gain() -> f64 {
    1.0
}
fn default_timeout() -> f64 {
    20.0
}
fn default_separation() -> f64 {
    0.01
}
fn default_tie() -> f64 {
    1e-6
}
fn default_steady() -> f64 {
    1e-6
}

impl Default for ResolutionParams {
    fn default() -> Self {
        Self {
            interactive_gain: default_gain(),
            interaction_timeout: default_timeout(),
            min_pose_separation: default_separation(),
            duration_tie_tol: default_tie(),
            steady_heading_tol: default_steady(),
        }
    }
}

/// What the ego remembers about one opponent.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OpponentMemory {
    pub pose_log: Vec<(Vec2, Angle)>,
    pub estimate: Option<Vec2>,
    last_heading: Option<Angle>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolutionState {
    pub pursued_target: Vec2,
    pub original_target: Vec2,
    pub phase: Phase,
    pub opponents: BTreeMap<usize, OpponentMemory>,
    decision: Option<PriorityDecision>,
    interacting_since: Option<f64>,
}

/// Everything the ego observes about the constraining opponent this step.
#[derive(Debug, Clone, Copy)]
pub struct Encounter {
    pub opponent: usize,
    pub ego_position: Vec2,
    pub ego_heading: Angle,
    pub opponent_position: Vec2,
    pub opponent_heading: Angle,
    /// Configured opponent target, if the ego is allowed to know it.
    pub known_target: Option<Vec2>,
    /// Current half-angle of the pair.
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ResolutionEvent {
    TargetEstimated { opponent: usize, estimate: Vec2 },
    UnblockStart { opponent: usize, temporary_target: Vec2 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Command {
    Heading(Angle),
    Velocity(Vec2),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TickOutput {
    pub command: Command,
    pub events: Vec<ResolutionEvent>,
}

impl ResolutionState {
    pub fn new(target: Vec2) -> Self {
        Self {
            pursued_target: target,
            original_target: target,
            phase: Phase::Normal,
            opponents: BTreeMap::new(),
            decision: None,
            interacting_since: None,
        }
    }

    pub fn decision(&self) -> Option<PriorityDecision> {
        self.decision
    }

    /// Restores the original target once the temporary one is reached.
    /// Returns true when that happened.
    pub fn check_temporary_target(&mut self, position: Vec2, reach_tol: f64) -> bool {
        if self.phase == Phase::Unblocking && position.distance(self.pursued_target) <= reach_tol {
            self.pursued_target = self.original_target;
            self.phase = Phase::Normal;
            return true;
        }
        false
    }

    /// Logs the opponent's pose when it is observed cruising and tries to
    /// triangulate its target.
    ///
    /// The opponent is taken to be cruising when its heading is off the
    /// boundary of the pair's unsafe arc (where every corrected heading
    /// lands) and has not changed since the previous observation.
    pub fn observe(&mut self, enc: &Encounter, angle_tol: f64, params: &ResolutionParams) -> Option<Vec2> {
        let mem = self.opponents.entry(enc.opponent).or_default();
        let steady =
            mem.last_heading.is_some_and(|h| enc.opponent_heading.diff(h).radians().abs() <= params.steady_heading_tol);
        mem.last_heading = Some(enc.opponent_heading);
        if mem.estimate.is_some() {
            return None;
        }
        let beta_ji = (enc.ego_position - enc.opponent_position).angle()?;
        let on_boundary =
            enc.delta > 0.0 && (enc.opponent_heading.diff(beta_ji).radians().abs() - enc.delta).abs() <= angle_tol;
        if on_boundary || !steady {
            return None;
        }
        mem.pose_log.push((enc.opponent_position, enc.opponent_heading));
        let est = estimate_target(&mem.pose_log, params.min_pose_separation)?;
        mem.estimate = Some(est);
        Some(est)
    }

    fn opponent_target(&self, enc: &Encounter) -> Option<Vec2> {
        enc.known_target.or_else(|| self.opponents.get(&enc.opponent).and_then(|m| m.estimate))
    }

    /// One resolution step after the safety filter.
    #[allow(clippy::too_many_arguments)]
    pub fn tick(
        &mut self,
        now: f64,
        mode: ModeLabel,
        filtered: Angle,
        enc: Option<&Encounter>,
        strategy: Strategy,
        angle_tol: f64,
        safety: &SafetyParams,
        params: &ResolutionParams,
    ) -> Result<TickOutput> {
        let mut events = Vec::new();
        let Some(enc) = enc else {
            self.leave_blocking();
            return Ok(TickOutput { command: Command::Heading(filtered), events });
        };
        if strategy == Strategy::Adaptive && enc.known_target.is_none() {
            if let Some(estimate) = self.observe(enc, angle_tol, params) {
                events.push(ResolutionEvent::TargetEstimated { opponent: enc.opponent, estimate });
            }
        }
        if self.phase == Phase::Interacting {
            // Fly away until neither filter can be active (Δ = 0), so the
            // opponent is free to cruise and reveal its heading.
            let timed_out = self.interacting_since.is_some_and(|t0| now - t0 > params.interaction_timeout);
            if enc.delta == 0.0 || timed_out || self.opponent_target(enc).is_some() {
                self.phase = Phase::Normal;
            } else {
                return Ok(TickOutput {
                    command: Command::Velocity(self.fly_away(filtered, enc, safety, params)),
                    events,
                });
            }
        }
        if mode != ModeLabel::Blocking || strategy == Strategy::None {
            self.leave_blocking();
            return Ok(TickOutput { command: Command::Heading(filtered), events });
        }

        let opponent_on_left = enc.opponent_position.angle_from(enc.ego_position, enc.ego_heading) > 0.0;
        let decision = match self.decision {
            Some(d) => d,
            None => {
                let fixed = PriorityDecision { choice: right_hand_rule(opponent_on_left), tie_broken: false };
                let d = match strategy {
                    Strategy::FixedPriority => fixed,
                    Strategy::Adaptive => match self.opponent_target(enc) {
                        Some(t_j) => {
                            let d = option_durations(
                                enc.ego_position,
                                self.original_target,
                                enc.opponent_position,
                                t_j,
                                safety,
                            )?;
                            adaptive_priority(&d, opponent_on_left, params.duration_tie_tol)
                        }
                        None => {
                            let since = *self.interacting_since.get_or_insert(now);
                            if now - since <= params.interaction_timeout {
                                self.phase = Phase::Interacting;
                                let u = self.fly_away(filtered, enc, safety, params);
                                return Ok(TickOutput { command: Command::Velocity(u), events });
                            }
                            fixed
                        }
                    },
                    Strategy::None => unreachable!("handled above"),
                };
                self.decision = Some(d);
                d
            }
        };
        if self.phase == Phase::Interacting {
            self.phase = Phase::Normal;
        }
        if decision.choice == PriorityChoice::EgoUnblocks && self.phase != Phase::Unblocking {
            self.pursued_target = enc.opponent_position;
            self.phase = Phase::Unblocking;
            events.push(ResolutionEvent::UnblockStart {
                opponent: enc.opponent,
                temporary_target: enc.opponent_position,
            });
        }
        Ok(TickOutput { command: Command::Heading(filtered), events })
    }

    fn fly_away(&self, filtered: Angle, enc: &Encounter, safety: &SafetyParams, params: &ResolutionParams) -> Vec2 {
        interactive_velocity(
            filtered.unit() * safety.speed,
            enc.ego_position,
            enc.opponent_position,
            safety.speed,
            params.interactive_gain,
        )
    }

    fn leave_blocking(&mut self) {
        self.decision = None;
        if self.phase == Phase::Interacting {
            self.phase = Phase::Normal;
        }
    }
}

trait AngleFrom {
    /// Signed angle of `self` as seen from `origin` relative to `heading`.
    fn angle_from(self, origin: Vec2, heading: Angle) -> f64;
}

impl AngleFrom for Vec2 {
    fn angle_from(self, origin: Vec2, heading: Angle) -> f64 {
        (self - origin).angle().map_or(0.0, |b| b.diff(heading).radians())
    }
}
