//! Live play: bridges one engine to one websocket client, scores calibration
//! and records every session as a replayable trace.

pub mod calibration;
pub mod protocol;
pub mod server;
pub mod session;

pub use calibration::{nine_point_targets, score_calibration, CalibrationConfig};
pub use protocol::{CalibrationResult, ClientMessage, ServerMessage, PROTOCOL_VERSION};
pub use session::{GatewayConfig, GatewaySession};
