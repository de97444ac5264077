//! Nine-point calibration check: the player fixates each circle in turn and
//! the gaze samples collected per circle are scored.

use gazerun_core::geometry::ScreenPoint;
use serde::{Deserialize, Serialize};

use crate::protocol::CalibrationResult;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationConfig {
    /// Circle radius in normalized screen units.
    pub radius: f64,
    pub min_samples: usize,
    /// Minimum inside-fraction every target must reach.
    pub pass_fraction: f64,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            radius: 0.05,
            min_samples: 30,
            pass_fraction: 0.9,
        }
    }
}

/// Row-major 3×3 grid at 10%, 50% and 90% of each axis.
pub fn nine_point_targets() -> [ScreenPoint; 9] {
    let at = [0.1, 0.5, 0.9];
    std::array::from_fn(|i| ScreenPoint { u: at[i % 3], v: at[i / 3] })
}

pub fn score_calibration(samples: &[Vec<ScreenPoint>], targets: &[ScreenPoint], cfg: &CalibrationConfig) -> CalibrationResult {
    let fractions: Vec<f64> = targets
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let s = samples.get(i).map(Vec::as_slice).unwrap_or(&[]);
            if s.is_empty() {
                return 0.0;
            }
            let inside = s
                .iter()
                .filter(|p| (p.u - t.u).hypot(p.v - t.v) <= cfg.radius)
                .count();
            inside as f64 / s.len() as f64
        })
        .collect();
    let complete = targets.len() >= 9
        && (0..targets.len()).all(|i| samples.get(i).map_or(0, Vec::len) >= cfg.min_samples);
    let pass = complete && fractions.iter().all(|f| *f >= cfg.pass_fraction);
    CalibrationResult {
        fractions,
        complete,
        pass,
    }
}
