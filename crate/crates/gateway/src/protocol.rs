//! Wire messages. Every frame is one JSON object tagged by `"type"`.

use gazerun_core::engine::{AttentionMode, Snapshot};
use gazerun_core::SessionMetrics;
use serde::{Deserialize, Serialize};

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", deny_unknown_fields)]
pub enum ClientMessage {
    Hello { protocol_version: u32 },
    StartSession { mode: AttentionMode },
    Gaze { u: f64, v: f64, valid: bool },
    Aim { du: f64, dv: f64 },
    Fire,
    CalibrationSample { target_index: usize, u: f64, v: f64 },
    /// Ends the calibration run and asks for its score.
    CalibrationDone,
    EndSession,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    /// Per target, the fraction of samples inside its circle.
    pub fractions: Vec<f64>,
    /// False when some target has too few samples; such a result never passes.
    pub complete: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum ServerMessage {
    Welcome {
        protocol_version: u32,
        timestep: f64,
        session_ticks: u64,
        snapshot_hz: f64,
    },
    Snapshot(Snapshot),
    CalibrationResult(CalibrationResult),
    SessionEnded {
        metrics: SessionMetrics,
        digest: String,
        aborted: bool,
    },
    Error { message: String },
}

impl ServerMessage {
    pub fn error(message: impl Into<String>) -> Self {
        ServerMessage::Error { message: message.into() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("server messages serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_names_on_the_wire() {
        let m: ClientMessage = serde_json::from_str(r#"{"type":"Gaze","u":0.25,"v":0.5,"valid":true}"#).unwrap();
        assert_eq!(m, ClientMessage::Gaze { u: 0.25, v: 0.5, valid: true });
        let m: ClientMessage = serde_json::from_str(r#"{"type":"StartSession","mode":"auto_noticed"}"#).unwrap();
        assert_eq!(m, ClientMessage::StartSession { mode: AttentionMode::AutoNoticed });
        let m: ClientMessage = serde_json::from_str(r#"{"type":"CalibrationSample","target_index":4,"u":0.5,"v":0.5}"#).unwrap();
        assert!(matches!(m, ClientMessage::CalibrationSample { target_index: 4, .. }));
        assert_eq!(serde_json::from_str::<ClientMessage>(r#"{"type":"Fire"}"#).unwrap(), ClientMessage::Fire);
        assert!(serde_json::from_str::<ClientMessage>(r#"{"type":"Aim","du":0,"dv":0,"x":1}"#).is_err());
        assert!(serde_json::from_str::<ClientMessage>(r#"{"type":"Teleport"}"#).is_err());

        let e = ServerMessage::error("nope").to_json();
        assert_eq!(e, r#"{"type":"Error","message":"nope"}"#);
    }
}
