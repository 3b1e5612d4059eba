use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geometry::{bearing_rate, cruising_angle, Angle, Vec2};
use crate::modes::ModeLabel;
use crate::resolution::Phase;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TracePhase {
    Normal,
    Interacting,
    Unblocking,
    Arrived,
}

impl From<Phase> for TracePhase {
    fn from(p: Phase) -> Self {
        match p {
            Phase::Normal => TracePhase::Normal,
            Phase::Interacting => TracePhase::Interacting,
            Phase::Unblocking => TracePhase::Unblocking,
        }
    }
}

impl TracePhase {
    pub fn as_str(self) -> &'static str {
        match self {
            TracePhase::Normal => "normal",
            TracePhase::Interacting => "interacting",
            TracePhase::Unblocking => "unblocking",
            TracePhase::Arrived => "arrived",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentSample {
    pub position: Vec2,
    pub heading: Angle,
    pub command: Angle,
    pub mode: ModeLabel,
    pub delta: f64,
    pub activated: bool,
    pub phase: TracePhase,
    /// Airplane whose constraint was filtered against this step.
    pub peer: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub time: f64,
    pub agents: Vec<AgentSample>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    BlockingStart,
    BlockingEnd,
    UnblockStart,
    TargetEstimated,
    TemporaryTargetReached,
    TargetReached,
    SafetyViolation,
    DeadlockFlag,
    LivelockFlag,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::BlockingStart => "BlockingStart",
            EventKind::BlockingEnd => "BlockingEnd",
            EventKind::UnblockStart => "UnblockStart",
            EventKind::TargetEstimated => "TargetEstimated",
            EventKind::TemporaryTargetReached => "TemporaryTargetReached",
            EventKind::TargetReached => "TargetReached",
            EventKind::SafetyViolation => "SafetyViolation",
            EventKind::DeadlockFlag => "DeadlockFlag",
            EventKind::LivelockFlag => "LivelockFlag",
        }
    }

    pub fn parse(s: &str) -> Option<EventKind> {
        use EventKind::*;
        [
            BlockingStart,
            BlockingEnd,
            UnblockStart,
            TargetEstimated,
            TemporaryTargetReached,
            TargetReached,
            SafetyViolation,
            DeadlockFlag,
            LivelockFlag,
        ]
        .into_iter()
        .find(|k| k.as_str() == s)
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    /// Index of the step the event belongs to.
    pub step: usize,
    pub kind: EventKind,
    /// Zero-based agent index.
    pub agent: usize,
    /// The other agent involved, when there is one.
    pub other: Option<usize>,
    /// Estimated target, temporary target or reached point.
    pub point: Option<Vec2>,
}

impl Event {
    /// Compact form used in the CSV events column, e.g. `UnblockStart@1`.
    pub fn label(&self) -> String {
        format!("{}@{}", self.kind, self.agent + 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace {
    pub name: String,
    pub dt: f64,
    pub steps: Vec<TraceStep>,
    pub events: Vec<Event>,
    /// Smallest separation of any active pair over the run, m.
    pub min_separation: f64,
    pub arrival_times: Vec<Option<f64>>,
    pub targets: Vec<Vec2>,
}

impl SimulationTrace {
    pub fn agent_count(&self) -> usize {
        self.targets.len()
    }

    pub fn completed(&self) -> bool {
        self.arrival_times.iter().all(Option::is_some)
    }

    /// Time the last airplane arrived; `None` if any never did.
    pub fn completion_time(&self) -> Option<f64> {
        self.arrival_times.iter().try_fold(0.0f64, |acc, t| t.map(|t| acc.max(t)))
    }

    pub fn final_positions(&self) -> Vec<Vec2> {
        self.steps.last().map(|s| s.agents.iter().map(|a| a.position).collect()).unwrap_or_default()
    }

    pub fn count(&self, kind: EventKind) -> usize {
        self.events.iter().filter(|e| e.kind == kind).count()
    }

    pub fn events_of(&self, kind: EventKind) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(move |e| e.kind == kind)
    }

    /// Total time each agent spent in blocking mode, s.
    pub fn blocking_time(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.agent_count()];
        for s in &self.steps {
            for (i, a) in s.agents.iter().enumerate() {
                if a.mode == ModeLabel::Blocking {
                    out[i] += self.dt;
                }
            }
        }
        out
    }

    /// Longest stretch, in seconds, over which agents `i` and `j` fly in
    /// parallel: the bearing rate from their mean velocities over `window`
    /// steps stays below `rate_tol` while at least one of them is off its
    /// cruising heading by more than `dev_tol`.
    ///
    /// Works from positions only, so controllers that dither between
    /// commands from one step to the next are measured the same way as the
    /// filter.
    pub fn parallel_flight(&self, i: usize, j: usize, window: usize, rate_tol: f64, dev_tol: f64) -> f64 {
        let window = window.max(1);
        let span = window as f64 * self.dt;
        let (mut best, mut cur) = (0usize, 0usize);
        for k in 0..self.steps.len().saturating_sub(window) {
            let (a, b) = (&self.steps[k].agents, &self.steps[k + window].agents);
            let moving = [i, j].iter().all(|&n| b[n].phase != TracePhase::Arrived);
            let vel = |n: usize| (b[n].position - a[n].position) * (1.0 / span);
            let off_course = |n: usize| match (vel(n).angle(), cruising_angle(a[n].position, self.targets[n])) {
                (Some(h), Ok(phi)) => h.diff(phi).radians().abs() > dev_tol,
                _ => false,
            };
            let parallel = moving
                && bearing_rate(a[i].position, a[j].position, vel(i), vel(j)).is_ok_and(|r| r.abs() < rate_tol)
                && (off_course(i) || off_course(j));
            if parallel {
                cur += 1;
                best = best.max(cur);
            } else {
                cur = 0;
            }
        }
        best as f64 * self.dt
    }

    /// Longest run of consecutive steps during which `pred` holds, in seconds.
    pub fn longest_run(&self, mut pred: impl FnMut(&TraceStep) -> bool) -> f64 {
        let (mut best, mut cur) = (0usize, 0usize);
        for s in &self.steps {
            if pred(s) {
                cur += 1;
                best = best.max(cur);
            } else {
                cur = 0;
            }
        }
        best as f64 * self.dt
    }
}
