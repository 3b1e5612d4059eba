//! Mode classification and the analytic blocking checks built on top of the
//! closed-form filter, plus window detectors for deadlock and livelock.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::KinematicState;
use crate::error::{Error, Result};
use crate::geometry::{bearing, cruising_angle, encounter_point, Angle, Vec2};

/// Default bearing-rate tolerance, rad/s.
pub const DEFAULT_RATE_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModeLabel {
    Cruising,
    Avoiding,
    Blocking,
}

impl ModeLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            ModeLabel::Cruising => "cruising",
            ModeLabel::Avoiding => "avoiding",
            ModeLabel::Blocking => "blocking",
        }
    }
}

/// Cruising when the filter left the command alone; otherwise the bearing
/// rate separates blocking (constant bearing) from avoiding (rotation).
pub fn classify_mode(activated: bool, beta_rate: f64, tol_rate: f64) -> ModeLabel {
    debug_assert!(tol_rate > 0.0);
    if !activated {
        ModeLabel::Cruising
    } else if beta_rate.abs() < tol_rate {
        ModeLabel::Blocking
    } else {
        ModeLabel::Avoiding
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BlockingCase {
    /// Both filters active, mirrored corrections.
    Mutual,
    /// One airplane corrected, the other already cruising along the same heading.
    OneCruising,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockingMatch {
    /// Side of the correction, `±1`.
    pub s: i8,
    pub case: BlockingCase,
    /// Index (0 or 1) of the filtered airplane in the one-cruising case.
    pub blocked: Option<u8>,
}

fn in_arc(x: f64, delta: f64) -> bool {
    (0.0..delta).contains(&x)
}

/// Angle-level test of the two blocking configurations. `tol` only applies
/// to the equality in the one-cruising case.
pub fn blocking_condition(
    phi1: Angle,
    beta12: Angle,
    phi2: Angle,
    beta21: Angle,
    delta: f64,
    tol: f64,
) -> Option<BlockingMatch> {
    let off1 = phi1.diff(beta12).radians();
    let off2 = phi2.diff(beta21).radians();
    for s in [1i8, -1] {
        let sf = f64::from(s);
        if in_arc(sf * off1, delta) && in_arc(-sf * off2, delta) {
            return Some(BlockingMatch { s, case: BlockingCase::Mutual, blocked: None });
        }
    }
    let views = [(off1, phi2, beta12, 0u8), (off2, phi1, beta21, 1u8)];
    for (off, phi_other, beta, idx) in views {
        for s in [1i8, -1] {
            let sf = f64::from(s);
            if in_arc(sf * off, delta) && phi_other.diff(beta.offset(sf * delta)).radians().abs() <= tol {
                return Some(BlockingMatch { s, case: BlockingCase::OneCruising, blocked: Some(idx) });
            }
        }
    }
    None
}

/// Sufficient condition for a future blocking episode between two cruising
/// airplanes: mirrored cruising offsets and an equidistant encounter point.
pub fn predict_blocking(p1: Vec2, t1: Vec2, p2: Vec2, t2: Vec2, angle_tol: f64, dist_tol: f64) -> Result<bool> {
    let phi1 = cruising_angle(p1, t1)?;
    let phi2 = cruising_angle(p2, t2)?;
    let b12 = bearing(p1, p2)?;
    let b21 = bearing(p2, p1)?;
    let mirrored = (phi1.diff(b12).radians() + phi2.diff(b21).radians()).abs() <= angle_tol;
    if !mirrored {
        return Ok(false);
    }
    Ok(match encounter_point(p1, t1, p2, t2) {
        Some(pc) => (p1.distance(pc) - p2.distance(pc)).abs() <= dist_tol,
        None => false,
    })
}

/// One airplane lined up with the other and its own target while the other
/// is not.
pub fn self_unblock_check(phi_i: Angle, beta_ij: Angle, phi_j: Angle, beta_ji: Angle, tol: f64) -> bool {
    let i_aligned = phi_i.diff(beta_ij).radians().abs() <= tol;
    let j_aligned = phi_j.diff(beta_ji).radians().abs() <= tol;
    i_aligned != j_aligned
}

/// Thresholds shared by the window detectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionParams {
    /// Trailing window for deadlock, s.
    #[serde(default = "default_deadlock_window")]
    pub deadlock_window: f64,
    /// Trailing window for livelock, s. `None` uses one orbit `2πr/v`.
    #[serde(default)]
    pub livelock_window: Option<f64>,
    /// Fraction of `v·window` below which motion counts as no progress.
    #[serde(default = "default_factor")]
    pub displacement_factor: f64,
}

fn default_deadlock_window() -> f64 {
    5.0
}

fn default_factor() -> f64 {
    0.1
}

impl Default for DetectionParams {
    fn default() -> Self {
        Self {
            deadlock_window: default_deadlock_window(),
            livelock_window: None,
            displacement_factor: default_factor(),
        }
    }
}

impl DetectionParams {
    pub fn livelock_window_for(&self, r: f64, speed: f64) -> f64 {
        self.livelock_window.unwrap_or(2.0 * PI * r / speed)
    }
}

const MIN_WINDOW: f64 = 2.0;

fn window_duration(track: &[KinematicState], dt: f64) -> Result<f64> {
    let w = track.len().saturating_sub(1) as f64 * dt;
    if w + 1e-9 < MIN_WINDOW {
        return Err(Error::Precondition("detection window shorter than 2 s"));
    }
    Ok(w)
}

/// Every sample stays within `factor·v·window` of the first one.
pub fn is_confined(track: &[KinematicState], speed: f64, dt: f64, factor: f64) -> bool {
    let Some(first) = track.first() else { return true };
    let w = track.len().saturating_sub(1) as f64 * dt;
    let bound = factor * speed * w;
    let start = first.position;
    if track.last().is_some_and(|s| s.position.distance(start) >= bound) {
        return false;
    }
    track.iter().all(|s| s.position.distance(start) < bound)
}

/// Constant-speed deadlock: every airplane in the window oscillates in place.
pub fn detect_deadlock(tracks: &[&[KinematicState]], speed: f64, dt: f64, params: &DetectionParams) -> Result<bool> {
    if tracks.is_empty() {
        return Ok(false);
    }
    for t in tracks {
        window_duration(t, dt)?;
    }
    Ok(tracks.iter().all(|t| is_confined(t, speed, dt, params.displacement_factor)))
}

/// Net signed heading rotation over the track.
pub fn net_rotation(track: &[KinematicState]) -> f64 {
    track.windows(2).map(|w| w[1].heading.diff(w[0].heading).radians()).sum()
}

/// Livelock: moving, turning through at least a full circle and not getting
/// closer to the target.
pub fn detect_livelock(
    tracks: &[&[KinematicState]],
    targets: &[Vec2],
    speed: f64,
    dt: f64,
    params: &DetectionParams,
) -> Result<bool> {
    if tracks.len() != targets.len() {
        return Err(Error::InvalidInput("one target per track".into()));
    }
    if tracks.is_empty() {
        return Ok(false);
    }
    for (track, &target) in tracks.iter().zip(targets) {
        let w = window_duration(track, dt)?;
        let bound = params.displacement_factor * speed * w;
        let first = track[0].position.distance(target);
        let last = track[track.len() - 1].position.distance(target);
        if first - last >= bound {
            return Ok(false);
        }
        if net_rotation(track).abs() < 2.0 * PI {
            return Ok(false);
        }
        if is_confined(track, speed, dt, params.displacement_factor) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbabilityEstimate {
    pub n: usize,
    pub blocking: f64,
    pub deadlock: f64,
}

/// Ego at the origin cruising along `+x`, opponent uniform on the circle of
/// radius `r` (so `Δ = π/2`) with a uniform cruising angle.
pub fn blocking_probability_experiment(n_samples: usize, seed: u64) -> Result<ProbabilityEstimate> {
    if n_samples < 100_000 {
        return Err(Error::Precondition("probability experiment needs at least 1e5 samples"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phi_i = Angle::ZERO;
    let (mut blocked, mut dead) = (0usize, 0usize);
    for _ in 0..n_samples {
        let psi = Angle::wrap(rng.random_range(-PI..PI));
        let phi_j = Angle::wrap(rng.random_range(-PI..PI));
        let beta_ij = psi;
        let beta_ji = psi.offset(PI);
        if let Some(m) = blocking_condition(phi_i, beta_ij, phi_j, beta_ji, FRAC_PI_2, 0.0) {
            if m.case == BlockingCase::Mutual {
                blocked += 1;
            }
        }
        if phi_i.diff(beta_ij).radians() == 0.0 && phi_j.diff(beta_ji).radians() == 0.0 {
            dead += 1;
        }
    }
    Ok(ProbabilityEstimate {
        n: n_samples,
        blocking: blocked as f64 / n_samples as f64,
        deadlock: dead as f64 / n_samples as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn classify_examples() {
        assert_eq!(classify_mode(false, 3.0, 1e-3), ModeLabel::Cruising);
        assert_eq!(classify_mode(true, 0.0, 1e-3), ModeLabel::Blocking);
        assert_eq!(classify_mode(true, 0.05, 1e-3), ModeLabel::Avoiding);
        assert_eq!(classify_mode(true, -0.05, 1e-3), ModeLabel::Avoiding);
    }

    #[test]
    fn blocking_condition_examples() {
        let b12 = Angle::wrap(0.3);
        let b21 = b12.offset(PI);
        let m = blocking_condition(b12.offset(0.1), b12, b21.offset(-0.1), b21, 0.5, 1e-9).unwrap();
        assert_eq!((m.s, m.case), (1, BlockingCase::Mutual));
        assert!(blocking_condition(b12.offset(0.6), b12, b21.offset(-0.1), b21, 0.5, 1e-9).is_none());
        // Same-side offsets are not mirrored.
        assert!(blocking_condition(b12.offset(0.1), b12, b21.offset(0.1), b21, 0.5, 1e-9).is_none());
    }

    #[test]
    fn one_cruising_case() {
        let b12 = Angle::ZERO;
        let b21 = b12.offset(PI);
        let delta = 0.7;
        let m = blocking_condition(Angle::wrap(-0.2), b12, b12.offset(-delta), b21, delta, 1e-9).unwrap();
        assert_eq!((m.s, m.case, m.blocked), (-1, BlockingCase::OneCruising, Some(0)));
        let m = blocking_condition(b21.offset(delta), b12, b21.offset(0.3), b21, delta, 1e-9).unwrap();
        assert_eq!((m.case, m.blocked), (BlockingCase::OneCruising, Some(1)));
    }

    #[test]
    fn predict_examples() {
        let yes = predict_blocking(
            Vec2::new(0.0, -30.0),
            Vec2::new(80.0, 30.0),
            Vec2::new(0.0, 30.0),
            Vec2::new(80.0, -30.0),
            1e-6,
            1e-6,
        )
        .unwrap();
        assert!(yes);
        let parallel = predict_blocking(
            Vec2::new(0.0, -30.0),
            Vec2::new(80.0, -30.0),
            Vec2::new(0.0, 30.0),
            Vec2::new(80.0, 30.0),
            1e-6,
            1e-6,
        )
        .unwrap();
        assert!(!parallel);
    }

    #[test]
    fn self_unblock_examples() {
        let b12 = Angle::wrap(1.0);
        let b21 = b12.offset(PI);
        assert!(self_unblock_check(b12, b12, b21.offset(0.3), b21, 1e-9));
        assert!(!self_unblock_check(b12, b12, b21, b21, 1e-9));
        assert!(!self_unblock_check(b12.offset(0.2), b12, b21.offset(0.3), b21, 1e-9));
    }

    fn straight(n: usize, v: f64, dt: f64) -> Vec<KinematicState> {
        (0..n).map(|k| KinematicState::new(Vec2::new(v * dt * k as f64, 0.0), Angle::ZERO)).collect()
    }

    fn chatter(n: usize, v: f64, dt: f64, at: Vec2) -> Vec<KinematicState> {
        (0..n)
            .map(|k| {
                let back = k % 2 == 1;
                let pos = if back { at + Vec2::new(v * dt, 0.0) } else { at };
                KinematicState::new(pos, if back { Angle::ZERO } else { Angle::wrap(PI) })
            })
            .collect()
    }

    fn orbit(n: usize, v: f64, dt: f64, radius: f64, centre: Vec2) -> Vec<KinematicState> {
        let w = v / radius;
        (0..n)
            .map(|k| {
                let a = w * dt * k as f64;
                let pos = centre + Angle::wrap(a).unit() * radius;
                KinematicState::new(pos, Angle::wrap(a + PI / 2.0))
            })
            .collect()
    }

    #[test]
    fn deadlock_detector() {
        let p = DetectionParams::default();
        let (v, dt) = (5.0, 0.05);
        let a = straight(101, v, dt);
        assert!(!detect_deadlock(&[&a], v, dt, &p).unwrap());
        let c1 = chatter(101, v, dt, Vec2::ZERO);
        let c2 = chatter(101, v, dt, Vec2::new(30.0, 0.0));
        assert!(detect_deadlock(&[&c1, &c2], v, dt, &p).unwrap());
        assert!(!detect_deadlock(&[&c1, &a], v, dt, &p).unwrap());
        assert!(detect_deadlock(&[&c1[..10]], v, dt, &p).is_err());
    }

    #[test]
    fn livelock_detector() {
        let p = DetectionParams::default();
        let (v, dt, r) = (5.0, 0.05, 30.0);
        let n = (p.livelock_window_for(r, v) / dt).ceil() as usize + 1;
        let target = Vec2::new(10.0, 10.0);
        let o = orbit(n, v, dt, 0.5 * r, target);
        assert!(detect_livelock(&[&o], &[target], v, dt, &p).unwrap());

        let mut toward = straight(n, v, dt);
        let goal = Vec2::new(500.0, 0.0);
        assert!(!detect_livelock(&[&toward], &[goal], v, dt, &p).unwrap());
        toward.reverse();
        // Moving away without turning is not livelock either.
        assert!(!detect_livelock(&[&toward], &[goal], v, dt, &p).unwrap());

        let c = chatter(n, v, dt, Vec2::ZERO);
        assert!(!detect_livelock(&[&c], &[goal], v, dt, &p).unwrap());
    }

    #[test]
    fn probability_matches_one_eighth() {
        let est = blocking_probability_experiment(1_000_000, 2024).unwrap();
        assert!((est.blocking - 0.125).abs() < 0.001, "{}", est.blocking);
        assert_eq!(est.deadlock, 0.0);
        assert!(blocking_probability_experiment(10, 1).is_err());
    }

    proptest! {
        #[test]
        fn classification_is_total(activated in any::<bool>(), rate in -10.0..10.0f64, tol in 1e-6..1.0f64) {
            let m = classify_mode(activated, rate, tol);
            let expected = match (activated, rate.abs() < tol) {
                (false, _) => ModeLabel::Cruising,
                (true, true) => ModeLabel::Blocking,
                (true, false) => ModeLabel::Avoiding,
            };
            prop_assert_eq!(m, expected);
        }

        #[test]
        fn detectors_are_exclusive(seed in 0u64..200) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (v, dt) = (5.0, 0.05);
            let p = DetectionParams { livelock_window: Some(10.0), ..DetectionParams::default() };
            let n = 201;
            let mut pos = Vec2::ZERO;
            let mut heading = Angle::ZERO;
            let turn = rng.random_range(-2.0..2.0);
            let flip = rng.random_bool(0.3);
            let mut track = Vec::with_capacity(n);
            for k in 0..n {
                track.push(KinematicState::new(pos, heading));
                heading = if flip && k % 2 == 0 { heading.offset(PI) } else { heading.offset(turn * dt) };
                pos += heading.unit() * (v * dt);
            }
            let target = Vec2::new(rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0));
            let dead = detect_deadlock(&[&track], v, dt, &p).unwrap();
            let live = detect_livelock(&[&track], &[target], v, dt, &p).unwrap();
            prop_assert!(!(dead && live));
        }
    }
}
