//! CSV export of simulation traces.
//!
//! One row per step: `time`, then eight columns per airplane, then an
//! `events` column holding `Kind@N` labels separated by `;`.

use std::fmt::Write as _;

use crate::sim::SimulationTrace;

pub const AGENT_COLUMNS: [&str; 8] = ["px", "py", "theta", "theta_cmd", "mode", "delta", "activated", "phase"];

/// Formats `x` with 9 significant digits, trimming trailing zeros. Plain
/// notation for magnitudes in `[1e-5, 1e9)`, scientific otherwise.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp) as usize;
        let s = format!("{x:.decimals$}");
        trim_fraction(&s)
    } else {
        format!("{}e{exp}", trim_fraction(mantissa))
    }
}

fn trim_fraction(s: &str) -> String {
    if !s.contains('.') {
        return s.to_string();
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

pub fn header(agents: usize) -> String {
    let mut cols = vec!["time".to_string()];
    for n in 1..=agents {
        cols.extend(AGENT_COLUMNS.iter().map(|c| format!("a{n}_{c}")));
    }
    cols.push("events".into());
    cols.join(",")
}

pub fn trace_to_csv(trace: &SimulationTrace) -> String {
    let n = trace.agent_count();
    let mut out = header(n);
    out.push('\n');
    let mut ev = trace.events.iter().peekable();
    for (k, step) in trace.steps.iter().enumerate() {
        out.push_str(&fmt_sig(step.time));
        for a in &step.agents {
            let _ = write!(
                out,
                ",{},{},{},{},{},{},{},{}",
                fmt_sig(a.position.x),
                fmt_sig(a.position.y),
                fmt_sig(a.heading.radians()),
                fmt_sig(a.command.radians()),
                a.mode.as_str(),
                fmt_sig(a.delta),
                a.activated,
                a.phase.as_str(),
            );
        }
        out.push(',');
        let mut first = true;
        while let Some(e) = ev.next_if(|e| e.step <= k) {
            if !first {
                out.push(';');
            }
            out.push_str(&e.label());
            first = false;
        }
        out.push('\n');
    }
    out
}

/// Event labels per row, parsed back from a CSV produced by [`trace_to_csv`].
pub fn events_from_csv(csv: &str) -> Vec<(String, Vec<String>)> {
    csv.lines()
        .skip(1)
        .filter_map(|line| {
            let (time, rest) = line.split_once(',')?;
            let events = rest.rsplit(',').next().unwrap_or("");
            let labels: Vec<String> = events.split(';').filter(|s| !s.is_empty()).map(str::to_string).collect();
            Some((time.to_string(), labels))
        })
        .filter(|(_, l)| !l.is_empty())
        .collect()
}
