//! Transport-agnostic live session: client messages in, server messages out,
//! one engine tick per `step`.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::Arc;

use anyhow::Result;
use gazerun_core::engine::{write_trace, AttentionMode};
use gazerun_core::geometry::ScreenPoint;
use gazerun_core::{Engine, InputFrame, SimConfig};
use serde::Serialize;

use crate::calibration::{nine_point_targets, score_calibration, CalibrationConfig};
use crate::protocol::{ClientMessage, ServerMessage, PROTOCOL_VERSION};

#[derive(Debug, Clone)]
pub struct GatewayConfig {
    pub sim: SimConfig,
    pub snapshot_hz: f64,
    pub calibration: CalibrationConfig,
    /// A gaze sample keeps counting for this long when no newer one arrives.
    pub gaze_hold: f64,
    pub record: Option<PathBuf>,
}

impl Default for GatewayConfig {
    fn default() -> Self {
        Self {
            sim: SimConfig::default(),
            snapshot_hz: 30.0,
            calibration: CalibrationConfig::default(),
            gaze_hold: 0.25,
            record: None,
        }
    }
}

impl GatewayConfig {
    /// Engine ticks between snapshots.
    pub fn snapshot_interval(&self) -> u64 {
        ((1.0 / (self.snapshot_hz * self.sim.timestep)).round() as u64).max(1)
    }

    fn hold_ticks(&self) -> u64 {
        (self.gaze_hold / self.sim.timestep).round() as u64
    }
}

/// Input gathered between two ticks.
#[derive(Debug, Clone, Copy, Default)]
struct Pending {
    gaze: Option<ScreenPoint>,
    gaze_age: u64,
    aim_du: f64,
    aim_dv: f64,
    fire: bool,
}

enum Phase {
    AwaitHello,
    Ready,
    Running(Box<Engine>),
    Closed,
}

#[derive(Serialize)]
struct Status {
    aborted: bool,
    ticks: u64,
    total_ticks: u64,
}

pub struct GatewaySession {
    cfg: Arc<GatewayConfig>,
    counter: Arc<AtomicU32>,
    phase: Phase,
    pending: Pending,
    calibration: Vec<Vec<ScreenPoint>>,
    trace: Vec<InputFrame>,
    session_config: SimConfig,
    session_number: u32,
    last_snapshot: Option<u64>,
}

impl GatewaySession {
    /// `counter` numbers sessions across every connection of one gateway;
    /// session n plays seed + n - 1.
    pub fn new(cfg: Arc<GatewayConfig>, counter: Arc<AtomicU32>) -> Self {
        let session_config = cfg.sim.clone();
        Self {
            cfg,
            counter,
            phase: Phase::AwaitHello,
            pending: Pending::default(),
            calibration: vec![Vec::new(); 9],
            trace: Vec::new(),
            session_config,
            session_number: 0,
            last_snapshot: None,
        }
    }

    pub fn is_running(&self) -> bool {
        matches!(self.phase, Phase::Running(_))
    }

    pub fn is_closed(&self) -> bool {
        matches!(self.phase, Phase::Closed)
    }

    pub fn engine(&self) -> Option<&Engine> {
        match &self.phase {
            Phase::Running(e) => Some(e),
            _ => None,
        }
    }

    /// Frames fed to the engine so far in the current or last session.
    pub fn trace(&self) -> &[InputFrame] {
        &self.trace
    }

    pub fn session_config(&self) -> &SimConfig {
        &self.session_config
    }

    /// Where the current or last session is recorded, if recording.
    pub fn record_dir(&self) -> Option<PathBuf> {
        let root = self.cfg.record.as_ref()?;
        (self.session_number > 0).then(|| root.join(format!("session_{}", self.session_number)))
    }

    /// Parses and applies one text frame. A protocol violation yields an
    /// error frame and closes the session.
    pub fn handle_text(&mut self, text: &str) -> Vec<ServerMessage> {
        match serde_json::from_str::<ClientMessage>(text) {
            Ok(m) => self.handle(m),
            Err(e) => self.fail(format!("malformed message: {e}")),
        }
    }

    pub fn handle(&mut self, msg: ClientMessage) -> Vec<ServerMessage> {
        if self.is_closed() {
            return Vec::new();
        }
        match (&self.phase, msg) {
            (Phase::AwaitHello, ClientMessage::Hello { protocol_version }) => {
                if protocol_version != PROTOCOL_VERSION {
                    return self.fail(format!("protocol version {protocol_version} unsupported, expected {PROTOCOL_VERSION}"));
                }
                self.phase = Phase::Ready;
                vec![ServerMessage::Welcome {
                    protocol_version: PROTOCOL_VERSION,
                    timestep: self.cfg.sim.timestep,
                    session_ticks: self.cfg.sim.session_ticks(),
                    snapshot_hz: self.cfg.snapshot_hz,
                }]
            }
            (Phase::AwaitHello, _) => self.fail("expected Hello"),
            (_, ClientMessage::Hello { .. }) => self.fail("duplicate Hello"),
            (Phase::Ready, ClientMessage::StartSession { mode }) => self.start(mode),
            (Phase::Running(_), ClientMessage::StartSession { .. }) => self.fail("a session is already running"),
            (Phase::Ready, ClientMessage::CalibrationSample { target_index, u, v }) => {
                let Some(bucket) = self.calibration.get_mut(target_index) else {
                    return self.fail(format!("no calibration target {target_index}"));
                };
                if let Ok(p) = ScreenPoint::clamped(u, v) {
                    bucket.push(p);
                }
                Vec::new()
            }
            (Phase::Ready, ClientMessage::CalibrationDone) => {
                let r = score_calibration(&self.calibration, &nine_point_targets(), &self.cfg.calibration);
                self.calibration.iter_mut().for_each(Vec::clear);
                vec![ServerMessage::CalibrationResult(r)]
            }
            (Phase::Running(_), ClientMessage::CalibrationSample { .. } | ClientMessage::CalibrationDone) => {
                self.fail("calibration is not available during a session")
            }
            (Phase::Running(_), ClientMessage::Gaze { u, v, valid }) => {
                // latest sample wins within a tick
                self.pending.gaze = if valid { ScreenPoint::clamped(u, v).ok() } else { None };
                self.pending.gaze_age = 0;
                Vec::new()
            }
            (Phase::Running(_), ClientMessage::Aim { du, dv }) => {
                if du.is_finite() && dv.is_finite() {
                    self.pending.aim_du = (self.pending.aim_du + du).clamp(-1.0, 1.0);
                    self.pending.aim_dv = (self.pending.aim_dv + dv).clamp(-1.0, 1.0);
                }
                Vec::new()
            }
            (Phase::Running(_), ClientMessage::Fire) => {
                self.pending.fire = true;
                Vec::new()
            }
            (Phase::Running(_), ClientMessage::EndSession) => self.finish(true),
            // input racing a session boundary is dropped
            (Phase::Ready, ClientMessage::Gaze { .. } | ClientMessage::Aim { .. } | ClientMessage::Fire | ClientMessage::EndSession) => {
                Vec::new()
            }
            (Phase::Closed, _) => Vec::new(),
        }
    }

    fn fail(&mut self, message: impl Into<String>) -> Vec<ServerMessage> {
        let mut out = Vec::new();
        if self.is_running() {
            out.extend(self.finish(true));
        }
        out.push(ServerMessage::error(message));
        self.phase = Phase::Closed;
        out
    }

    fn start(&mut self, mode: AttentionMode) -> Vec<ServerMessage> {
        self.session_number = self.counter.fetch_add(1, Ordering::SeqCst) + 1;
        self.session_config = SimConfig {
            seed: self.cfg.sim.seed.wrapping_add(u64::from(self.session_number) - 1),
            attention_mode: mode,
            ..self.cfg.sim.clone()
        };
        let engine = match Engine::new(self.session_config.clone()) {
            Ok(e) => e,
            Err(e) => return self.fail(format!("cannot start session: {e}")),
        };
        self.pending = Pending::default();
        self.trace.clear();
        let snap = engine.snapshot();
        self.last_snapshot = Some(snap.tick);
        self.phase = Phase::Running(Box::new(engine));
        vec![ServerMessage::Snapshot(snap)]
    }

    /// Advances the running session by one tick.
    pub fn step(&mut self) -> Vec<ServerMessage> {
        let hold = self.cfg.hold_ticks();
        let interval = self.cfg.snapshot_interval();
        let Phase::Running(engine) = &mut self.phase else {
            return Vec::new();
        };
        let p = self.pending;
        let frame = InputFrame {
            tick: engine.tick_index(),
            gaze: p.gaze.filter(|_| p.gaze_age <= hold),
            aim_du: p.aim_du,
            aim_dv: p.aim_dv,
            fire: p.fire,
        };
        self.pending = Pending {
            gaze: p.gaze,
            gaze_age: p.gaze_age + 1,
            ..Pending::default()
        };
        engine.tick(&frame).expect("frames are built for the engine's own tick");
        self.trace.push(frame);
        let mut out = Vec::new();
        let tick = engine.tick_index();
        if tick % interval == 0 || engine.is_finished() {
            out.push(ServerMessage::Snapshot(engine.snapshot()));
            self.last_snapshot = Some(tick);
        }
        if engine.is_finished() {
            out.extend(self.finish(false));
        }
        out
    }

    /// The transport went away: close out any running session as aborted.
    pub fn disconnect(&mut self) -> Vec<ServerMessage> {
        let out = if self.is_running() { self.finish(true) } else { Vec::new() };
        self.phase = Phase::Closed;
        out
    }

    fn finish(&mut self, aborted: bool) -> Vec<ServerMessage> {
        let Phase::Running(engine) = std::mem::replace(&mut self.phase, Phase::Ready) else {
            return Vec::new();
        };
        let digest = engine.digest();
        let mut out = Vec::new();
        if let Some(dir) = self.record_dir() {
            if let Err(e) = self.write_record(&dir, &engine, aborted) {
                out.push(ServerMessage::error(format!("recording failed: {e:#}")));
            }
        }
        out.push(ServerMessage::SessionEnded {
            metrics: engine.metrics(),
            digest: digest.to_string(),
            aborted,
        });
        out
    }

    fn write_record(&self, dir: &Path, engine: &Engine, aborted: bool) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("config.json"), self.session_config.to_json())?;
        fs::write(dir.join("trace.csv"), write_trace(&self.trace))?;
        fs::write(dir.join("events.ndjson"), engine.log().to_ndjson())?;
        fs::write(dir.join("digest.txt"), format!("session_1 {}\n", engine.digest()))?;
        let status = Status {
            aborted,
            ticks: engine.tick_index(),
            total_ticks: engine.total_ticks(),
        };
        fs::write(dir.join("status.json"), serde_json::to_string_pretty(&status)?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn session() -> GatewaySession {
        GatewaySession::new(Arc::new(GatewayConfig::default()), Arc::new(AtomicU32::new(0)))
    }

    #[test]
    fn hello_first() {
        let mut s = session();
        let out = s.handle(ClientMessage::Fire);
        assert!(matches!(out.last(), Some(ServerMessage::Error { .. })));
        assert!(s.is_closed());
        assert!(s.handle(ClientMessage::Hello { protocol_version: 1 }).is_empty());
    }

    #[test]
    fn version_mismatch_closes() {
        let mut s = session();
        let out = s.handle(ClientMessage::Hello { protocol_version: 99 });
        assert!(matches!(&out[..], [ServerMessage::Error { .. }]));
        assert!(s.is_closed());
    }

    #[test]
    fn snapshots_every_other_tick_at_30_hz() {
        let mut s = session();
        s.handle(ClientMessage::Hello { protocol_version: 1 });
        let first = s.handle(ClientMessage::StartSession { mode: AttentionMode::Tracked });
        assert!(matches!(&first[..], [ServerMessage::Snapshot(snap)] if snap.tick == 0));
        let ticks: Vec<u64> = (0..10)
            .flat_map(|_| s.step())
            .filter_map(|m| match m {
                ServerMessage::Snapshot(snap) => Some(snap.tick),
                _ => None,
            })
            .collect();
        assert_eq!(ticks, vec![2, 4, 6, 8, 10]);
    }

    #[test]
    fn gaze_is_held_briefly_then_dropped() {
        let mut s = session();
        s.handle(ClientMessage::Hello { protocol_version: 1 });
        s.handle(ClientMessage::StartSession { mode: AttentionMode::Tracked });
        s.handle(ClientMessage::Gaze { u: 0.3, v: 0.6, valid: true });
        for _ in 0..40 {
            s.step();
        }
        let held = s.trace().iter().filter(|f| f.gaze.is_some()).count() as u64;
        assert_eq!(held, s.cfg.hold_ticks() + 1);
        s.handle(ClientMessage::Gaze { u: 0.3, v: 0.6, valid: false });
        s.step();
        assert_eq!(s.trace().last().unwrap().gaze, None);
    }

    #[test]
    fn end_session_marks_aborted_and_allows_restart() {
        let mut s = session();
        s.handle(ClientMessage::Hello { protocol_version: 1 });
        s.handle(ClientMessage::StartSession { mode: AttentionMode::Tracked });
        s.step();
        let out = s.handle(ClientMessage::EndSession);
        assert!(matches!(&out[..], [ServerMessage::SessionEnded { aborted: true, .. }]));
        assert!(!s.is_running());
        s.handle(ClientMessage::StartSession { mode: AttentionMode::AutoNoticed });
        assert!(s.is_running());
        assert_eq!(s.session_config().seed, s.cfg.sim.seed + 1);
    }
}
