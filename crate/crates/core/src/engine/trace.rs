//! Per-tick input frames and the CSV trace format
//! `tick,u,v,valid,aim_du,aim_dv,fire`.
//!
//! Floats are written in Rust's shortest round-trip form, so a trace read
//! back yields bit-identical frames.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::engine::EngineError;
use crate::geometry::ScreenPoint;

pub const TRACE_HEADER: &str = "tick,u,v,valid,aim_du,aim_dv,fire";

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct InputFrame {
    pub tick: u64,
    /// `None` when no valid sample arrived this tick (tracker dropout or no
    /// tracker at all); such ticks attend nothing.
    pub gaze: Option<ScreenPoint>,
    pub aim_du: f64,
    pub aim_dv: f64,
    pub fire: bool,
}

impl InputFrame {
    pub fn empty(tick: u64) -> Self {
        Self {
            tick,
            ..Default::default()
        }
    }

    pub fn with_gaze(tick: u64, point: ScreenPoint) -> Self {
        Self {
            tick,
            gaze: Some(point),
            ..Default::default()
        }
    }

    /// The same frame with the gaze channel removed.
    pub fn without_gaze(mut self) -> Self {
        self.gaze = None;
        self
    }
}

pub fn write_trace(frames: &[InputFrame]) -> String {
    let mut out = String::with_capacity(frames.len() * 24 + TRACE_HEADER.len() + 1);
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for f in frames {
        let (u, v, valid) = match f.gaze {
            Some(p) => (p.u.to_string(), p.v.to_string(), "1"),
            None => (String::new(), String::new(), "0"),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            f.tick, u, v, valid, f.aim_du, f.aim_dv, f.fire as u8
        );
    }
    out
}

fn field<'a>(parts: &[&'a str], i: usize) -> &'a str {
    parts.get(i).copied().unwrap_or("").trim()
}

fn float(s: &str, line: usize, name: &str) -> Result<f64, EngineError> {
    if s.is_empty() {
        return Ok(0.0);
    }
    let x: f64 = s.parse().map_err(|_| EngineError::Trace {
        line,
        message: format!("bad {name} value {s:?}"),
    })?;
    if !x.is_finite() {
        return Err(EngineError::Trace {
            line,
            message: format!("non-finite {name}"),
        });
    }
    Ok(x)
}

fn flag(s: &str, line: usize, name: &str) -> Result<bool, EngineError> {
    match s {
        "" | "0" | "false" => Ok(false),
        "1" | "true" => Ok(true),
        other => Err(EngineError::Trace {
            line,
            message: format!("bad {name} flag {other:?}"),
        }),
    }
}

/// Parses a trace. Ticks must be strictly increasing; gaps are allowed and
/// mean "no input".
pub fn parse_trace(text: &str) -> Result<Vec<InputFrame>, EngineError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == TRACE_HEADER => {}
        _ => {
            return Err(EngineError::Trace {
                line: 1,
                message: format!("missing header {TRACE_HEADER:?}"),
            })
        }
    }
    let mut frames: Vec<InputFrame> = Vec::new();
    for (i, raw) in lines {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = raw.split(',').collect();
        if parts.len() != 7 {
            return Err(EngineError::Trace {
                line,
                message: format!("expected 7 fields, found {}", parts.len()),
            });
        }
        let tick: u64 = field(&parts, 0).parse().map_err(|_| EngineError::Trace {
            line,
            message: "bad tick".into(),
        })?;
        if let Some(prev) = frames.last() {
            if tick <= prev.tick {
                return Err(EngineError::Trace {
                    line,
                    message: format!("tick {tick} does not follow {}", prev.tick),
                });
            }
        }
        let gaze = if flag(field(&parts, 3), line, "valid")? {
            let u = float(field(&parts, 1), line, "u")?;
            let v = float(field(&parts, 2), line, "v")?;
            Some(ScreenPoint::clamped(u, v).expect("finite checked"))
        } else {
            None
        };
        frames.push(InputFrame {
            tick,
            gaze,
            aim_du: float(field(&parts, 4), line, "aim_du")?,
            aim_dv: float(field(&parts, 5), line, "aim_dv")?,
            fire: flag(field(&parts, 6), line, "fire")?,
        });
    }
    Ok(frames)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_gaps_and_invalid_samples() {
        let text = "tick,u,v,valid,aim_du,aim_dv,fire\n0,0.25,0.75,1,0,0,0\n3,,,0,0.01,-0.02,1\n7,,,,0,0,0\n";
        let f = parse_trace(text).unwrap();
        assert_eq!(f.len(), 3);
        assert_eq!(f[0].gaze, Some(ScreenPoint { u: 0.25, v: 0.75 }));
        assert_eq!(f[1].gaze, None);
        assert!(f[1].fire);
        assert_eq!((f[1].aim_du, f[1].aim_dv), (0.01, -0.02));
        assert_eq!(f[2].gaze, None);
    }

    #[test]
    fn rejects_malformed_traces() {
        assert!(parse_trace("0,0.5,0.5,1,0,0,0\n").is_err(), "header required");
        let h = TRACE_HEADER;
        assert!(parse_trace(&format!("{h}\n2,,,,0,0,0\n2,,,,0,0,0\n")).is_err());
        assert!(parse_trace(&format!("{h}\n2,,,,0,0,0\n1,,,,0,0,0\n")).is_err());
        assert!(parse_trace(&format!("{h}\n0,0.5,0.5,1,0,0\n")).is_err());
        assert!(parse_trace(&format!("{h}\n0,NaN,0.5,1,0,0,0\n")).is_err());
        assert!(parse_trace(&format!("{h}\n0,0.5,0.5,yes,0,0,0\n")).is_err());
    }

    #[test]
    fn clamps_gaze_on_ingestion() {
        let f = parse_trace(&format!("{TRACE_HEADER}\n0,1.5,-0.5,1,0,0,0\n")).unwrap();
        assert_eq!(f[0].gaze, Some(ScreenPoint { u: 1.0, v: 0.0 }));
    }

    fn arb_frame() -> impl Strategy<Value = (u64, Option<(f64, f64)>, f64, f64, bool)> {
        (
            1u64..5,
            proptest::option::of((0.0..=1.0f64, 0.0..=1.0f64)),
            -0.1..0.1f64,
            -0.1..0.1f64,
            any::<bool>(),
        )
    }

    proptest! {
        #[test]
        fn write_then_parse_is_identity(raw in proptest::collection::vec(arb_frame(), 0..200)) {
            let mut tick = 0;
            let frames: Vec<InputFrame> = raw.into_iter().map(|(gap, g, du, dv, fire)| {
                tick += gap;
                InputFrame { tick, gaze: g.map(|(u, v)| ScreenPoint { u, v }), aim_du: du, aim_dv: dv, fire }
            }).collect();
            let back = parse_trace(&write_trace(&frames)).unwrap();
            prop_assert_eq!(back, frames);
        }
    }
}
