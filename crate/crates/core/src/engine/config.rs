use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::attention::DEFAULT_NOTICE_THRESHOLD;
use crate::engine::EngineError;
use crate::geometry::{Camera, Vec3};
use crate::rules::RulesConfig;
use crate::worldgen::WorldConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttentionMode {
    /// Attention follows the gaze stream.
    Tracked,
    /// Eye tracking off: every entity is noticed the moment it spawns.
    AutoNoticed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttentionConfig {
    pub notice_threshold: f64,
    /// Gaze boxes are the mesh stand-in scaled by this factor about its
    /// center, to absorb tracker inaccuracy.
    pub gaze_box_scale: f64,
}

impl Default for AttentionConfig {
    fn default() -> Self {
        Self {
            notice_threshold: DEFAULT_NOTICE_THRESHOLD,
            gaze_box_scale: 1.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CameraConfig {
    pub horizontal_fov_deg: f64,
    pub aspect: f64,
    pub eye_height: f64,
}

impl Default for CameraConfig {
    fn default() -> Self {
        Self {
            horizontal_fov_deg: 90.0,
            aspect: 16.0 / 9.0,
            eye_height: 1.7,
        }
    }
}

impl CameraConfig {
    pub fn camera_at(&self, avatar_z: f64) -> Camera {
        Camera::corridor(
            Vec3::new(0.0, self.eye_height, avatar_z),
            self.horizontal_fov_deg.to_radians(),
            self.aspect,
        )
        .expect("camera config validated on load")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub seed: u64,
    pub timestep: f64,
    pub session_duration: f64,
    pub attention_mode: AttentionMode,
    pub attention: AttentionConfig,
    pub world: WorldConfig,
    pub rules: RulesConfig,
    pub camera: CameraConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            timestep: 1.0 / 60.0,
            session_duration: 120.0,
            attention_mode: AttentionMode::Tracked,
            attention: AttentionConfig::default(),
            world: WorldConfig::default(),
            rules: RulesConfig::default(),
            camera: CameraConfig::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        let bad = |m: String| Err(EngineError::Config(m));
        if !(self.timestep > 0.0 && self.timestep.is_finite()) {
            return bad(format!("timestep must be positive, got {}", self.timestep));
        }
        if !(self.session_duration > 0.0 && self.session_duration.is_finite()) {
            return bad(format!("session_duration must be positive, got {}", self.session_duration));
        }
        if !(self.attention.notice_threshold >= 0.0 && self.attention.notice_threshold.is_finite()) {
            return bad("notice_threshold must be non-negative".into());
        }
        if !(self.attention.gaze_box_scale > 0.0 && self.attention.gaze_box_scale.is_finite()) {
            return bad("gaze_box_scale must be positive".into());
        }
        let c = &self.camera;
        if !(c.horizontal_fov_deg > 0.0 && c.horizontal_fov_deg < 180.0) || !(c.aspect > 0.0) || !c.eye_height.is_finite() {
            return bad("camera needs fov in (0, 180) degrees, positive aspect and finite eye height".into());
        }
        self.world.validate().map_err(EngineError::Config)?;
        self.rules.validate().map_err(EngineError::Config)?;
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, EngineError> {
        let cfg: SimConfig = serde_json::from_str(text).map_err(|e| EngineError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, EngineError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config always serializes")
    }

    /// Number of ticks in a session. Durations that are an exact multiple of
    /// the timestep (up to float noise) are not rounded up.
    pub fn session_ticks(&self) -> u64 {
        let n = self.session_duration / self.timestep;
        let r = n.round();
        if (n - r).abs() < 1e-9 * r.max(1.0) {
            r as u64
        } else {
            n.ceil() as u64
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_session_is_7200_ticks() {
        assert_eq!(SimConfig::default().session_ticks(), 7200);
        let c = SimConfig {
            session_duration: 1.005,
            timestep: 0.01,
            ..Default::default()
        };
        assert_eq!(c.session_ticks(), 101);
    }

    #[test]
    fn json_round_trip_and_partial_documents() {
        let c = SimConfig {
            seed: 9,
            attention_mode: AttentionMode::AutoNoticed,
            ..Default::default()
        };
        assert_eq!(SimConfig::from_json(&c.to_json()).unwrap(), c);
        let partial = SimConfig::from_json(r#"{"seed": 5, "world": {"spawn_probability": 0.5}}"#).unwrap();
        assert_eq!(partial.seed, 5);
        assert_eq!(partial.world.spawn_probability, 0.5);
        assert_eq!(partial.world.tile_length, 10.0);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(SimConfig::from_json(r#"{"sead": 5}"#).is_err());
        assert!(SimConfig::from_json(r#"{"world": {"tiles": 3}}"#).is_err());
        assert!(SimConfig::from_json(r#"{"timestep": 0}"#).is_err());
        assert!(SimConfig::from_json(r#"{"world": {"runner_probability": 1.5}}"#).is_err());
        assert!(SimConfig::from_json(r#"{"attention_mode": "sometimes"}"#).is_err());
        assert!(SimConfig::from_json("not json").is_err());
    }
}
