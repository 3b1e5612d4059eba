//! Overhead SVG plot of a trace: one polyline per airplane, squares on the
//! targets, filter-active stretches drawn over the tracks, and event markers.

use std::fmt::Write as _;

use crate::geometry::Vec2;
use crate::sim::{EventKind, SimulationTrace};

const WIDTH: f64 = 800.0;
const MARGIN: f64 = 40.0;
const COLOURS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

struct Frame {
    min: Vec2,
    scale: f64,
    height: f64,
}

impl Frame {
    fn fit(points: impl Iterator<Item = Vec2>) -> Frame {
        let (mut lo, mut hi) =
            (Vec2::new(f64::INFINITY, f64::INFINITY), Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
        for p in points {
            lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        if !lo.x.is_finite() {
            lo = Vec2::ZERO;
            hi = Vec2::new(1.0, 1.0);
        }
        let span_x = (hi.x - lo.x).max(1.0);
        let span_y = (hi.y - lo.y).max(1.0);
        let scale = (WIDTH - 2.0 * MARGIN) / span_x.max(span_y);
        Frame { min: lo, scale, height: span_y * scale + 2.0 * MARGIN }
    }

    fn map(&self, p: Vec2) -> (f64, f64) {
        let x = MARGIN + (p.x - self.min.x) * self.scale;
        let y = self.height - MARGIN - (p.y - self.min.y) * self.scale;
        (x, y)
    }

    fn points(&self, ps: &[Vec2]) -> String {
        let mut s = String::new();
        for (i, &p) in ps.iter().enumerate() {
            let (x, y) = self.map(p);
            if i > 0 {
                s.push(' ');
            }
            let _ = write!(s, "{x:.2},{y:.2}");
        }
        s
    }
}

fn marker_colour(kind: EventKind) -> &'static str {
    match kind {
        EventKind::BlockingStart => "#000000",
        EventKind::TargetEstimated => "#ffbf00",
        EventKind::UnblockStart | EventKind::TemporaryTargetReached => "#00a0a0",
        EventKind::SafetyViolation | EventKind::DeadlockFlag | EventKind::LivelockFlag => "#ff00ff",
        _ => "#808080",
    }
}

pub fn render_svg(trace: &SimulationTrace) -> String {
    let n = trace.agent_count();
    let tracks: Vec<Vec<Vec2>> = (0..n).map(|i| trace.steps.iter().map(|s| s.agents[i].position).collect()).collect();
    let frame = Frame::fit(tracks.iter().flatten().copied().chain(trace.targets.iter().copied()));
    let r_px = 4.0;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:.0}" height="{:.0}" viewBox="0 0 {WIDTH:.0} {:.0}">"#,
        frame.height, frame.height
    );
    let _ = writeln!(out, "<title>{}</title>", escape(&trace.name));
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);

    for (i, track) in tracks.iter().enumerate() {
        let colour = COLOURS[i % COLOURS.len()];
        let _ = writeln!(
            out,
            r#"<polyline class="track" data-agent="{}" fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#,
            i + 1,
            frame.points(track)
        );
        // Activation stretches as a single path with one subpath per run.
        let mut d = String::new();
        let mut open = false;
        for s in &trace.steps {
            let (x, y) = frame.map(s.agents[i].position);
            if s.agents[i].activated {
                let _ = write!(d, "{}{x:.2},{y:.2} ", if open { "L" } else { "M" });
                open = true;
            } else {
                open = false;
            }
        }
        if !d.is_empty() {
            let _ = writeln!(
                out,
                r#"<path class="active" data-agent="{}" fill="none" stroke="{colour}" stroke-width="4" stroke-opacity="0.35" d="{}"/>"#,
                i + 1,
                d.trim_end()
            );
        }
    }

    for (i, &t) in trace.targets.iter().enumerate() {
        let (x, y) = frame.map(t);
        let _ = writeln!(
            out,
            r#"<rect class="target" data-agent="{}" x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
            i + 1,
            x - r_px,
            y - r_px,
            2.0 * r_px,
            2.0 * r_px,
            COLOURS[i % COLOURS.len()]
        );
    }

    for e in &trace.events {
        let Some(step) = trace.steps.get(e.step) else { continue };
        let (x, y) = frame.map(step.agents[e.agent].position);
        let _ = writeln!(
            out,
            r#"<circle class="event" cx="{x:.2}" cy="{y:.2}" r="3" fill="{}"><title>{} t={:.2}</title></circle>"#,
            marker_colour(e.kind),
            e.label(),
            e.time
        );
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
