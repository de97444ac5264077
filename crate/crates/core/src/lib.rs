//! Deterministic, headless gaze-attentive endless runner.
//!
//! The avatar runs down a procedurally generated corridor at constant speed.
//! Obstacles and enemies only yield favorable outcomes once the player's gaze
//! has dwelt on them long enough to mark them as noticed, and side spawns are
//! steered toward whichever side of the screen the player has looked at least.

pub mod attention;
pub mod engine;
pub mod events;
pub mod geometry;
pub mod rng;
pub mod rules;
pub mod worldgen;

pub use engine::{run_session, Engine, EngineError, InputFrame, SessionMetrics, SimConfig};
pub use events::{Digest, EventLog};
