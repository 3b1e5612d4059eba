//! Fixed-step, synchronous scenario loop.
//!
//! Each step every active airplane looks at the same snapshot of the world:
//! arrivals are settled first, then each airplane picks the peer it filters
//! against, computes its controller output, classifies its mode from the
//! bearing rate implied by both nominal commands and runs the resolution
//! logic. Only then are all commands integrated together.

use crate::alt_controllers::{potential_field_heading, vo_filter, VoParams};
use crate::dynamics::{step, KinematicState};
use crate::error::{Error, Result};
use crate::geometry::{bearing, bearing_rate, cruising_angle, Angle, Vec2};
use crate::modes::{classify_mode, detect_deadlock, detect_livelock, is_confined, ModeLabel};
use crate::resolution::{Command, Encounter, ResolutionEvent, ResolutionState};
use crate::safety_filter::{cbf_value, correct_heading, free_flight_threshold, half_angle_or_clamped};

use super::config::{ControllerKind, ScenarioConfig};
use super::trace::{AgentSample, Event, EventKind, SimulationTrace, TracePhase, TraceStep};

/// Commands differing from the preferred heading by less than this count
/// as unmodified for the VO and PF controllers.
const ALT_ACTIVATION_TOL: f64 = 1e-9;

struct Agent {
    state: KinematicState,
    resolution: ResolutionState,
    active: bool,
    prev_command: Option<Angle>,
    mode: ModeLabel,
    history: Vec<KinematicState>,
    /// Running sum of signed heading changes, one entry per history sample.
    rotation: Vec<f64>,
    deadlock: bool,
    livelock: bool,
    arrival: Option<f64>,
}

struct Output {
    peer: Option<usize>,
    theta: Angle,
    delta: f64,
    activated: bool,
}

/// Picks the airplane whose constraint matters most for `i`: among those
/// close enough for the filter to act, prefer closing geometry, then the
/// smallest barrier value.
/// `(within threshold, closing, h, index)`.
type Candidate = (bool, bool, f64, usize);

pub fn select_constraint_peer(
    i: usize,
    states: &[KinematicState],
    active: &[bool],
    config: &ScenarioConfig,
) -> Option<usize> {
    let v = config.dynamics.speed;
    let threshold = free_flight_threshold(&config.safety);
    let me = states[i];
    let mut candidates: Vec<Candidate> = Vec::new();
    for (j, other) in states.iter().enumerate() {
        if j == i || !active[j] {
            continue;
        }
        let rel = other.position - me.position;
        let closing = rel.dot(other.velocity(v) - me.velocity(v)) < 0.0;
        let near = rel.norm() <= threshold;
        let h = cbf_value(me.position, other.position, &config.safety);
        candidates.push((near, closing, h, j));
    }
    let pick = |filter: &dyn Fn(&Candidate) -> bool| {
        candidates.iter().filter(|c| filter(c)).min_by(|a, b| a.2.total_cmp(&b.2).then(a.3.cmp(&b.3))).map(|c| c.3)
    };
    pick(&|c| c.0 && c.1).or_else(|| pick(&|c| c.0)).or_else(|| pick(&|c| c.1)).or_else(|| pick(&|_| true))
}

fn controller_output(
    i: usize,
    agents: &[Agent],
    states: &[KinematicState],
    peer: Option<usize>,
    config: &ScenarioConfig,
) -> Result<Output> {
    let me = &agents[i];
    let cfg = &config.agents[i];
    let p = me.state.position;
    let phi = match cruising_angle(p, me.resolution.pursued_target) {
        Ok(a) => a,
        Err(Error::TargetReached) => me.state.heading,
        Err(e) => return Err(e),
    };
    let Some(j) = peer else {
        return Ok(Output { peer: None, theta: phi, delta: 0.0, activated: false });
    };
    let q = states[j].position;
    let (delta, _clamped) = half_angle_or_clamped(p, q, &config.safety)?;
    let out = match cfg.controller {
        ControllerKind::Cbf => {
            let beta = bearing(p, q)?;
            let d = correct_heading(phi, beta, delta, cfg.lambda, config.tolerances.tie);
            Output { peer, theta: d.theta, delta, activated: d.activated }
        }
        ControllerKind::Vo => {
            let params = VoParams { tau: config.controllers.vo.tau, r: config.safety.r, speed: config.dynamics.speed };
            let u_j = states[j].velocity(config.dynamics.speed);
            let u = vo_filter(p, q, u_j, phi.unit(), &params)?;
            let theta = u.angle().ok_or(Error::Internal("zero velocity from obstacle filter"))?;
            let activated = theta.diff(phi).radians().abs() > ALT_ACTIVATION_TOL;
            Output { peer, theta, delta, activated }
        }
        ControllerKind::Pf => {
            let theta =
                potential_field_heading(p, me.resolution.pursued_target, q, me.state.heading, &config.controllers.pf)
                    .or_else(|e| if e == Error::TargetReached { Ok(me.state.heading) } else { Err(e) })?;
            let activated = theta.diff(phi).radians().abs() > ALT_ACTIVATION_TOL;
            Output { peer, theta, delta, activated }
        }
    };
    Ok(out)
}

struct Recorder {
    events: Vec<Event>,
}

impl Recorder {
    fn push(
        &mut self,
        time: f64,
        step: usize,
        kind: EventKind,
        agent: usize,
        other: Option<usize>,
        point: Option<Vec2>,
    ) {
        self.events.push(Event { time, step, kind, agent, other, point });
    }
}

pub fn run_scenario(config: &ScenarioConfig) -> Result<SimulationTrace> {
    config.validate()?;
    let n = config.agents.len();
    let dt = config.dynamics.dt;
    let v = config.dynamics.speed;
    let r = config.safety.r;
    let reach = config.reach_tol();
    let violation_threshold = r - config.violation_slack();
    let n_steps = (config.horizon / dt - 1e-9).ceil() as usize;
    let dead_len = (config.detection.deadlock_window / dt).round() as usize;
    let live_len = (config.detection.livelock_window_for(r, v) / dt).round() as usize;
    let factor = config.detection.displacement_factor;

    let mut agents: Vec<Agent> = config
        .agents
        .iter()
        .map(|a| {
            let heading = match a.heading {
                Some(h) => h,
                None => cruising_angle(a.position, a.target).unwrap_or(Angle::ZERO),
            };
            Agent {
                state: KinematicState::new(a.position, heading),
                resolution: ResolutionState::new(a.target),
                active: true,
                prev_command: None,
                mode: ModeLabel::Cruising,
                history: Vec::new(),
                rotation: Vec::new(),
                deadlock: false,
                livelock: false,
                arrival: None,
            }
        })
        .collect();

    let mut rec = Recorder { events: Vec::new() };
    let mut steps = Vec::with_capacity(n_steps + 1);
    let mut min_sep = f64::INFINITY;
    let mut violating = vec![false; n * n];

    for k in 0..=n_steps {
        let t = k as f64 * dt;

        // Arrivals.
        for (i, a) in agents.iter_mut().enumerate() {
            if !a.active {
                continue;
            }
            let p = a.state.position;
            if p.distance(a.resolution.original_target) <= reach {
                if a.mode == ModeLabel::Blocking {
                    rec.push(t, k, EventKind::BlockingEnd, i, None, None);
                }
                rec.push(t, k, EventKind::TargetReached, i, None, Some(a.resolution.original_target));
                a.active = false;
                a.mode = ModeLabel::Cruising;
                a.arrival = Some(t);
            } else {
                let temp = a.resolution.pursued_target;
                if a.resolution.check_temporary_target(p, reach) {
                    rec.push(t, k, EventKind::TemporaryTargetReached, i, None, Some(temp));
                }
            }
        }
        for a in agents.iter_mut().filter(|a| a.active) {
            let prev = a.history.last().map(|s| s.heading);
            let turn = prev.map_or(0.0, |h| a.state.heading.diff(h).radians());
            a.rotation.push(a.rotation.last().copied().unwrap_or(0.0) + turn);
            a.history.push(a.state);
        }

        let states: Vec<KinematicState> = agents.iter().map(|a| a.state).collect();
        let active: Vec<bool> = agents.iter().map(|a| a.active).collect();

        // Separation monitor.
        for i in 0..n {
            for j in i + 1..n {
                if !(active[i] && active[j]) {
                    continue;
                }
                let d = states[i].position.distance(states[j].position);
                min_sep = min_sep.min(d);
                let now = d < violation_threshold;
                if now && !violating[i * n + j] {
                    rec.push(t, k, EventKind::SafetyViolation, i, Some(j), None);
                }
                violating[i * n + j] = now;
            }
        }

        if active.iter().all(|a| !a) {
            steps.push(snapshot(t, &agents, &vec![None; n], &vec![ModeLabel::Cruising; n]));
            break;
        }

        // Controller outputs against the chosen peers.
        let mut outputs = Vec::with_capacity(n);
        for i in 0..n {
            if !active[i] {
                outputs.push(None);
                continue;
            }
            let peer = select_constraint_peer(i, &states, &active, config);
            outputs.push(Some(controller_output(i, &agents, &states, peer, config)?));
        }

        // Modes from the nominal commands of both sides.
        let mut modes = vec![ModeLabel::Cruising; n];
        for i in 0..n {
            let Some(out) = &outputs[i] else { continue };
            let Some(j) = out.peer else { continue };
            let Some(other) = &outputs[j] else { continue };
            let u_i = out.theta.unit() * v;
            let u_j = other.theta.unit() * v;
            let rate = bearing_rate(states[i].position, states[j].position, u_i, u_j)?;
            modes[i] = classify_mode(out.activated, rate, config.tolerances.rate);
        }

        // Resolution and final commands.
        let mut commands: Vec<Option<Angle>> = vec![None; n];
        for i in 0..n {
            let Some(out) = &outputs[i] else { continue };
            let cfg = &config.agents[i];
            let enc = out.peer.map(|j| Encounter {
                opponent: j,
                ego_position: states[i].position,
                ego_heading: states[i].heading,
                opponent_position: states[j].position,
                opponent_heading: states[j].heading,
                known_target: cfg.knows_opponent_target.then_some(config.agents[j].target),
                delta: out.delta,
            });
            let tick = agents[i].resolution.tick(
                t,
                modes[i],
                out.theta,
                enc.as_ref(),
                cfg.strategy,
                config.tolerances.angle,
                &config.safety,
                &config.resolution,
            )?;
            for ev in tick.events {
                match ev {
                    ResolutionEvent::TargetEstimated { opponent, estimate } => {
                        rec.push(t, k, EventKind::TargetEstimated, i, Some(opponent), Some(estimate))
                    }
                    ResolutionEvent::UnblockStart { opponent, temporary_target } => {
                        rec.push(t, k, EventKind::UnblockStart, i, Some(opponent), Some(temporary_target))
                    }
                }
            }
            commands[i] = Some(match tick.command {
                Command::Heading(h) => h,
                Command::Velocity(u) => u.angle().unwrap_or(out.theta),
            });
        }

        // Mode edges.
        for i in 0..n {
            if !active[i] {
                continue;
            }
            let was = agents[i].mode == ModeLabel::Blocking;
            let is = modes[i] == ModeLabel::Blocking;
            if is && !was {
                rec.push(t, k, EventKind::BlockingStart, i, outputs[i].as_ref().and_then(|o| o.peer), None);
            } else if was && !is {
                rec.push(t, k, EventKind::BlockingEnd, i, None, None);
            }
            agents[i].mode = modes[i];
        }

        // Pathology windows.
        for i in 0..n {
            let Some(out) = &outputs[i] else { continue };
            let dead = match out.peer {
                Some(j) => window_deadlock(&agents[i], &agents[j], dead_len, v, dt, factor, config)?,
                None => false,
            };
            if dead && !agents[i].deadlock {
                rec.push(t, k, EventKind::DeadlockFlag, i, out.peer, None);
            }
            agents[i].deadlock = dead;
            let live = window_livelock(&agents[i], live_len, v, dt, factor, config)?;
            if live && !agents[i].livelock {
                rec.push(t, k, EventKind::LivelockFlag, i, None, None);
            }
            agents[i].livelock = live;
        }

        let deltas: Vec<_> = outputs.iter().map(|o| o.as_ref().map(|o| (o.delta, o.activated, o.peer))).collect();
        let mut row = snapshot(t, &agents, &deltas, &modes);
        for (i, c) in commands.iter().enumerate() {
            if let Some(c) = c {
                row.agents[i].command = *c;
            }
        }
        steps.push(row);

        if k == n_steps {
            break;
        }
        for (i, a) in agents.iter_mut().enumerate() {
            if let Some(cmd) = commands[i] {
                a.state = step(a.state, cmd, a.prev_command, &config.dynamics);
                a.prev_command = Some(cmd);
            }
        }
    }

    Ok(SimulationTrace {
        name: config.name.clone(),
        dt,
        steps,
        events: rec.events,
        min_separation: min_sep,
        arrival_times: agents.iter().map(|a| a.arrival).collect(),
        targets: config.agents.iter().map(|a| a.target).collect(),
    })
}

fn snapshot(t: f64, agents: &[Agent], deltas: &[Option<(f64, bool, Option<usize>)>], modes: &[ModeLabel]) -> TraceStep {
    TraceStep {
        time: t,
        agents: agents
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let (delta, activated, peer) = deltas[i].unwrap_or((0.0, false, None));
                AgentSample {
                    position: a.state.position,
                    heading: a.state.heading,
                    command: a.state.heading,
                    mode: modes[i],
                    delta,
                    activated,
                    phase: if a.active { a.resolution.phase.into() } else { TracePhase::Arrived },
                    peer,
                }
            })
            .collect(),
    }
}

fn window_deadlock(
    a: &Agent,
    b: &Agent,
    len: usize,
    v: f64,
    dt: f64,
    factor: f64,
    config: &ScenarioConfig,
) -> Result<bool> {
    if len < 1 || a.history.len() <= len || b.history.len() <= len {
        return Ok(false);
    }
    let bound = factor * v * len as f64 * dt;
    let wa = &a.history[a.history.len() - 1 - len..];
    let wb = &b.history[b.history.len() - 1 - len..];
    // Cheap rejection before the full scan.
    for w in [wa, wb] {
        if w[0].position.distance(w[len].position) >= bound {
            return Ok(false);
        }
    }
    detect_deadlock(&[wa, wb], v, dt, &config.detection)
}

fn window_livelock(a: &Agent, len: usize, v: f64, dt: f64, factor: f64, config: &ScenarioConfig) -> Result<bool> {
    if len < 1 || a.history.len() <= len {
        return Ok(false);
    }
    let start = a.history.len() - 1 - len;
    let w = &a.history[start..];
    let target = a.resolution.original_target;
    let bound = factor * v * len as f64 * dt;
    if w[0].position.distance(target) - w[len].position.distance(target) >= bound {
        return Ok(false);
    }
    if (a.rotation[start + len] - a.rotation[start]).abs() < 2.0 * std::f64::consts::PI {
        return Ok(false);
    }
    if is_confined(w, v, dt, factor) {
        return Ok(false);
    }
    detect_livelock(&[w], &[target], v, dt, &config.detection)
}
