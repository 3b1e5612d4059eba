//! Planar geometry shared by the rest of the crate: wrapped angles, 2-D
//! vectors, bearings, bearing rates and ray intersections.
//!
//! Every angle lives in the half-open interval `[-π, π)`.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `|d1 × d2|` below this is treated as parallel.
pub const PARALLEL_TOL: f64 = 1e-12;

/// Heading or bearing in radians, always wrapped into `[-π, π)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(from = "f64", into = "f64")]
pub struct Angle(f64);

impl Angle {
    pub const ZERO: Angle = Angle(0.0);

    /// Wraps a finite real into `[-π, π)`.
    ///
    /// Non-finite inputs propagate as NaN; use [`normalize_angle`] when the
    /// input is untrusted.
    #[inline]
    pub fn wrap(a: f64) -> Angle {
        // In-range values pass through untouched so wrapping is idempotent.
        if (-PI..PI).contains(&a) {
            return Angle(a);
        }
        let mut w = (a + PI).rem_euclid(TAU) - PI;
        // rem_euclid may round up to exactly TAU for tiny negative inputs.
        if w >= PI {
            w -= TAU;
        }
        Angle(w)
    }

    #[inline]
    pub fn radians(self) -> f64 {
        self.0
    }

    /// Signed difference `self - other`, wrapped.
    #[inline]
    pub fn diff(self, other: Angle) -> Angle {
        Angle::wrap(self.0 - other.0)
    }

    #[inline]
    pub fn offset(self, delta: f64) -> Angle {
        Angle::wrap(self.0 + delta)
    }

    #[inline]
    pub fn unit(self) -> Vec2 {
        Vec2::new(self.0.cos(), self.0.sin())
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<f64> for Angle {
    fn from(a: f64) -> Angle {
        Angle::wrap(a)
    }
}

impl From<Angle> for f64 {
    fn from(a: Angle) -> f64 {
        a.0
    }
}

/// Position, target or velocity in the horizontal plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl From<[f64; 2]> for Vec2 {
    fn from(a: [f64; 2]) -> Self {
        Vec2::new(a[0], a[1])
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    #[inline]
    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// Scalar 2-D cross product `self.x * o.y - self.y * o.x`.
    #[inline]
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn distance(self, o: Vec2) -> f64 {
        (o - self).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Direction of the vector; `None` for the zero vector.
    pub fn angle(self) -> Option<Angle> {
        if self.x == 0.0 && self.y == 0.0 {
            None
        } else {
            Some(Angle::wrap(self.y.atan2(self.x)))
        }
    }

    pub fn normalized(self) -> Option<Vec2> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self * (1.0 / n))
    }

    pub fn midpoint(self, o: Vec2) -> Vec2 {
        Vec2::new(0.5 * (self.x + o.x), 0.5 * (self.y + o.y))
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    #[inline]
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// `((a + π) mod 2π) − π`.
pub fn normalize_angle(a: f64) -> Result<Angle> {
    if !a.is_finite() {
        return Err(Error::InvalidInput(format!("angle {a} is not finite")));
    }
    Ok(Angle::wrap(a))
}

/// Bearing from `p_i` to `p_j`.
pub fn bearing(p_i: Vec2, p_j: Vec2) -> Result<Angle> {
    (p_j - p_i).angle().ok_or(Error::DegenerateGeometry("bearing between coincident points"))
}

/// Time derivative of the bearing from `p_i` to `p_j` given both velocities.
pub fn bearing_rate(p_i: Vec2, p_j: Vec2, u_i: Vec2, u_j: Vec2) -> Result<f64> {
    let rel = p_j - p_i;
    let d2 = rel.norm_sq();
    if d2 == 0.0 {
        return Err(Error::DegenerateGeometry("bearing rate between coincident points"));
    }
    Ok(rel.cross(u_j - u_i) / d2)
}

/// Heading that points from `p` straight at `target`.
///
/// Returns [`Error::TargetReached`] when the two points coincide.
pub fn cruising_angle(p: Vec2, target: Vec2) -> Result<Angle> {
    (target - p).angle().ok_or(Error::TargetReached)
}

/// Intersection of two lines given in point + unit-direction form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayHit {
    pub point: Vec2,
    /// Signed distance along the first direction.
    pub k1: f64,
    /// Signed distance along the second direction.
    pub k2: f64,
}

/// Solves `p1 + k1·d1 = p2 + k2·d2`. `None` when the directions are parallel.
pub fn line_intersection(p1: Vec2, d1: Vec2, p2: Vec2, d2: Vec2) -> Option<RayHit> {
    let denom = d1.cross(d2);
    if denom.abs() < PARALLEL_TOL {
        return None;
    }
    let w = p2 - p1;
    let k1 = w.cross(d2) / denom;
    let k2 = w.cross(d1) / denom;
    Some(RayHit { point: p1 + d1 * k1, k1, k2 })
}

/// Crossing point of the segments `p1→t1` and `p2→t2`, if they cross.
pub fn encounter_point(p1: Vec2, t1: Vec2, p2: Vec2, t2: Vec2) -> Option<Vec2> {
    let len1 = p1.distance(t1);
    let len2 = p2.distance(t2);
    let d1 = (t1 - p1).normalized()?;
    let d2 = (t2 - p2).normalized()?;
    let hit = line_intersection(p1, d1, p2, d2)?;
    let eps = 1e-9 * (1.0 + len1.max(len2));
    let on1 = hit.k1 >= -eps && hit.k1 <= len1 + eps;
    let on2 = hit.k2 >= -eps && hit.k2 <= len2 + eps;
    (on1 && on2).then_some(hit.point)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const EPS: f64 = 1e-12;

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize_angle(PI).unwrap().radians(), -PI);
        assert_eq!(normalize_angle(0.0).unwrap().radians(), 0.0);
        assert!((normalize_angle(1.5 * PI).unwrap().radians() + 0.5 * PI).abs() < EPS);
        assert!(normalize_angle(f64::NAN).is_err());
        assert!(normalize_angle(f64::INFINITY).is_err());
    }

    #[test]
    fn wrap_never_returns_pi() {
        for a in [-1e-17, -f64::EPSILON, -PI, PI, 3.0 * PI, -3.0 * PI, 1e9] {
            let w = Angle::wrap(a).radians();
            assert!((-PI..PI).contains(&w), "{a} -> {w}");
        }
    }

    #[test]
    fn periodicity_grid() {
        for i in 0..200 {
            let a = -10.0 + 0.1 * i as f64;
            let base = Angle::wrap(a).radians();
            for n in -5..=5 {
                let w = Angle::wrap(a + TAU * n as f64).radians();
                let d = (w - base).abs();
                // equal, or the two representatives of the ±π seam
                assert!(d < 1e-9 || (d - TAU).abs() < 1e-9, "a={a} n={n}");
            }
        }
    }

    #[test]
    fn bearing_examples() {
        let o = Vec2::ZERO;
        assert_eq!(bearing(o, Vec2::new(1.0, 0.0)).unwrap().radians(), 0.0);
        assert!((bearing(o, Vec2::new(0.0, 2.0)).unwrap().radians() - 0.5 * PI).abs() < EPS);
        assert_eq!(bearing(Vec2::new(1.0, 1.0), Vec2::new(0.0, 1.0)).unwrap().radians(), -PI);
        assert!(matches!(bearing(o, o), Err(Error::DegenerateGeometry(_))));
    }

    #[test]
    fn bearing_rate_examples() {
        let (pi, pj) = (Vec2::ZERO, Vec2::new(1.0, 0.0));
        let u = Vec2::new(0.3, -0.7);
        assert_eq!(bearing_rate(pi, pj, u, u).unwrap(), 0.0);
        assert_eq!(bearing_rate(pi, pj, Vec2::new(1.0, 0.0), Vec2::new(3.0, 0.0)).unwrap(), 0.0);
        let r = bearing_rate(pi, pj, Vec2::new(1.0, 0.0), Vec2::new(1.0, 2.0)).unwrap();
        assert!((r - 2.0).abs() < EPS);
        assert!(bearing_rate(pi, pi, u, u).is_err());
    }

    #[test]
    fn cruising_angle_examples() {
        let o = Vec2::ZERO;
        let a = cruising_angle(o, Vec2::new(5.0, 5.0)).unwrap().radians();
        assert!((a - PI / 4.0).abs() < EPS);
        assert_eq!(cruising_angle(o, Vec2::new(-1.0, 0.0)).unwrap().radians(), -PI);
        let b = cruising_angle(Vec2::new(0.0, -30.0), Vec2::new(80.0, 50.0)).unwrap();
        assert!((b.radians() - PI / 4.0).abs() < EPS);
        assert_eq!(cruising_angle(o, o), Err(Error::TargetReached));
    }

    #[test]
    fn line_intersection_examples() {
        let hit =
            line_intersection(Vec2::ZERO, Vec2::new(1.0, 0.0), Vec2::new(1.0, 1.0), Vec2::new(0.0, -1.0)).unwrap();
        assert!((hit.point - Vec2::new(1.0, 0.0)).norm() < EPS);
        assert!((hit.k1 - 1.0).abs() < EPS && (hit.k2 - 1.0).abs() < EPS);

        let d = Vec2::new(1.0, 0.0);
        assert!(line_intersection(Vec2::ZERO, d, Vec2::new(0.0, 1.0), d).is_none());

        // Hand solution of the 2x2 system: k1 = 2, k2 = 2√2.
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let hit = line_intersection(Vec2::ZERO, d, Vec2::new(0.0, 2.0), Vec2::new(s, -s)).unwrap();
        assert!((hit.point - Vec2::new(2.0, 0.0)).norm() < EPS);
        assert!((hit.k1 - 2.0).abs() < EPS);
        assert!((hit.k2 - 2.0 * 2f64.sqrt()).abs() < EPS);
    }

    #[test]
    fn encounter_point_examples() {
        let pc = encounter_point(Vec2::new(0.0, -1.0), Vec2::new(0.0, 1.0), Vec2::new(-1.0, 0.0), Vec2::new(1.0, 0.0))
            .unwrap();
        assert!(pc.norm() < EPS);

        assert!(encounter_point(Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0), Vec2::new(1.0, 1.0),)
            .is_none());

        // Lines cross at (0,0) but both segments stop short of it.
        assert!(encounter_point(Vec2::new(0.0, 1.0), Vec2::new(0.0, 2.0), Vec2::new(1.0, 0.0), Vec2::new(2.0, 0.0),)
            .is_none());
    }

    fn coord() -> impl Strategy<Value = f64> {
        -1.0e3..1.0e3
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(a in -1.0e4..1.0e4f64) {
            let w = Angle::wrap(a);
            prop_assert!((-PI..PI).contains(&w.radians()));
            prop_assert_eq!(Angle::wrap(w.radians()), w);
        }

        #[test]
        fn bearing_reverses_by_pi(ax in coord(), ay in coord(), bx in coord(), by in coord()) {
            let (a, b) = (Vec2::new(ax, ay), Vec2::new(bx, by));
            prop_assume!(a.distance(b) > 1e-6);
            let fwd = bearing(a, b).unwrap();
            let back = bearing(b, a).unwrap().offset(PI);
            prop_assert!(fwd.diff(back).radians().abs() < 1e-9);
        }

        #[test]
        fn bearing_rate_is_symmetric(
            ax in coord(), ay in coord(), bx in coord(), by in coord(),
            ux in -10.0..10.0f64, uy in -10.0..10.0f64, wx in -10.0..10.0f64, wy in -10.0..10.0f64,
        ) {
            let (a, b) = (Vec2::new(ax, ay), Vec2::new(bx, by));
            prop_assume!(a.distance(b) > 1e-6);
            let (u, w) = (Vec2::new(ux, uy), Vec2::new(wx, wy));
            let r1 = bearing_rate(a, b, u, w).unwrap();
            let r2 = bearing_rate(b, a, w, u).unwrap();
            prop_assert!((r1 - r2).abs() <= 1e-12 * (1.0 + r1.abs()));
        }

        #[test]
        fn line_intersection_round_trip(
            xx in -100.0..100.0f64, xy in -100.0..100.0f64,
            a1 in -PI..PI, a2 in -PI..PI, r1 in 1.0..100.0f64, r2 in 1.0..100.0f64,
        ) {
            let target = Vec2::new(xx, xy);
            let (d1, d2) = (Angle::wrap(a1).unit(), Angle::wrap(a2).unit());
            prop_assume!(d1.cross(d2).abs() > 1e-3);
            let o1 = target - d1 * r1;
            let o2 = target - d2 * r2;
            let hit = line_intersection(o1, d1, o2, d2).unwrap();
            prop_assert!(hit.point.distance(target) < 1e-9);
        }
    }
}
