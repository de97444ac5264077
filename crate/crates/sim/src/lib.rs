//! Headless session runner: synthetic gaze policies, batch runs and replay
//! verification on top of `gazerun-core`.

pub mod policy;
pub mod runner;

pub use policy::{project_gaze, GazePolicy, Player, Trigger, DEFAULT_SIGMA};
pub use runner::{play, PlayedSession, RunSpec};
