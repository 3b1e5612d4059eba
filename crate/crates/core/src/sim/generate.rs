//! Random encounter families.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;

use crate::dynamics::DynamicsParams;
use crate::geometry::{Angle, Vec2};
use crate::resolution::Strategy;

use super::config::{AgentConfig, ScenarioConfig};

/// Physical constants shared by the generated families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Family {
    pub speed: f64,
    pub r: f64,
    pub alpha: f64,
    pub dt: f64,
}

impl Default for Family {
    fn default() -> Self {
        Self { speed: 5.0, r: 30.0, alpha: 3.0, dt: 0.05 }
    }
}

impl Family {
    /// Generous horizon: four straight-line flight times plus a minute.
    fn horizon(&self, agents: &[AgentConfig]) -> f64 {
        let longest = agents.iter().map(|a| a.position.distance(a.target)).fold(0.0, f64::max);
        4.0 * longest / self.speed + 60.0
    }

    fn config(&self, name: String, agents: Vec<AgentConfig>, seed: u64) -> ScenarioConfig {
        let horizon = self.horizon(&agents);
        let dynamics = DynamicsParams::single_integrator(self.speed, self.dt);
        let mut c = ScenarioConfig::new(name, agents, dynamics, self.r, self.alpha, horizon);
        c.rng_seed = seed;
        c
    }
}

fn random_frame<R: Rng + ?Sized>(rng: &mut R) -> (Vec2, Angle) {
    let centre = Vec2::new(rng.random_range(-200.0..200.0), rng.random_range(-200.0..200.0));
    (centre, Angle::wrap(rng.random_range(-PI..PI)))
}

/// Two airplanes exactly `r` apart whose cruising angles fall on mirrored
/// sides of the respective bearings, inside the correction arcs, so both
/// filters start out in mutual blocking. Targets lie `5r..15r` away.
pub fn generate_blocking_scenario<R: Rng + ?Sized>(rng: &mut R, family: &Family, seed: u64) -> ScenarioConfig {
    let r = family.r;
    loop {
        let (centre, beta) = random_frame(rng);
        let axis = beta.unit();
        let p1 = centre - axis * (0.5 * r);
        let p2 = centre + axis * (0.5 * r);
        let s = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let a1 = rng.random_range(0.0..FRAC_PI_2);
        let a2 = rng.random_range(0.0..FRAC_PI_2);
        let phi1 = beta.offset(s * a1);
        let phi2 = beta.offset(PI - s * a2);
        let t1 = p1 + phi1.unit() * rng.random_range(5.0 * r..15.0 * r);
        let t2 = p2 + phi2.unit() * rng.random_range(5.0 * r..15.0 * r);
        if t1.distance(t2) < r {
            continue;
        }
        let mut agents = vec![AgentConfig::new(p1, t1), AgentConfig::new(p2, t2)];
        for a in &mut agents {
            a.knows_opponent_target = true;
            a.strategy = Strategy::None;
        }
        return family.config(format!("blocking-{seed}"), agents, seed);
    }
}

/// Mirror-symmetric crossing: both airplanes start in free flight, equally
/// far from the crossing point of their paths, with unequal distances to
/// their targets beyond it.
pub fn generate_corollary_scenario<R: Rng + ?Sized>(rng: &mut R, family: &Family, seed: u64) -> ScenarioConfig {
    let r = family.r;
    let (centre, beta) = random_frame(rng);
    let axis = beta.unit();
    let normal = beta.offset(FRAC_PI_2).unit();
    let half = 0.5 * rng.random_range(1.5 * r..3.0 * r);
    let p1 = centre - axis * half;
    let p2 = centre + axis * half;
    let a: f64 = rng.random_range(0.15..1.3);
    let s = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let pc = centre + normal * (s * half * a.tan());
    let to_pc = half / a.cos();
    let d1 = to_pc + rng.random_range(3.0 * r..12.0 * r);
    let mut d2 = to_pc + rng.random_range(3.0 * r..12.0 * r);
    if (d1 - d2).abs() < 0.5 * r {
        d2 += r;
    }
    let t1 = p1 + (pc - p1) * (d1 / to_pc);
    let t2 = p2 + (pc - p2) * (d2 / to_pc);
    let mut agents = vec![AgentConfig::new(p1, t1), AgentConfig::new(p2, t2)];
    for ag in &mut agents {
        ag.knows_opponent_target = true;
    }
    family.config(format!("mirror-{seed}"), agents, seed)
}
