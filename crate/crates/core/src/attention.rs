//! Gaze-to-entity attention: closest-hit resolution, non-resetting dwell
//! accumulation and the per-region gaze histogram used by spawn placement.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::geometry::{ray_aabb, Aabb, Ray, ScreenPoint};

pub type EntityId = u64;

pub const DEFAULT_NOTICE_THRESHOLD: f64 = 0.5;

/// One tracker reading. Dropped samples carry no point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GazeSample {
    pub time: f64,
    pub point: Option<ScreenPoint>,
}

impl GazeSample {
    pub fn valid(time: f64, point: ScreenPoint) -> Self {
        Self { time, point: Some(point) }
    }

    pub fn dropped(time: f64) -> Self {
        Self { time, point: None }
    }

    pub fn is_valid(&self) -> bool {
        self.point.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttentionLevel {
    Unseen,
    Gazed,
    Noticed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttentionState {
    pub level: AttentionLevel,
    pub accumulated_dwell: f64,
}

impl Default for AttentionState {
    fn default() -> Self {
        Self::unseen()
    }
}

impl AttentionState {
    pub fn unseen() -> Self {
        Self {
            level: AttentionLevel::Unseen,
            accumulated_dwell: 0.0,
        }
    }

    /// State used when eye tracking is off: labelled noticed from the start.
    pub fn auto_noticed(notice_threshold: f64) -> Self {
        Self {
            level: AttentionLevel::Noticed,
            accumulated_dwell: notice_threshold,
        }
    }

    pub fn is_noticed(&self) -> bool {
        self.level == AttentionLevel::Noticed
    }
}

/// Dwell time never decays and never resets when the gaze moves away.
pub fn accumulate_dwell(state: AttentionState, attended: bool, dt: f64, notice_threshold: f64) -> AttentionState {
    if !attended {
        return state;
    }
    let accumulated_dwell = state.accumulated_dwell + dt;
    // Tolerate float drift from summing 1/60 steps so that ceil(threshold/dt)
    // ticks always suffices.
    let level = if accumulated_dwell >= notice_threshold - 1e-9 {
        AttentionLevel::Noticed
    } else {
        state.level.max(AttentionLevel::Gazed)
    };
    AttentionState {
        level,
        accumulated_dwell,
    }
}

/// Returns the id of the entity whose box the ray hits first. Equal hit
/// distances go to the lower id so the result does not depend on order.
pub fn resolve_attended<I>(ray: &Ray, entities: I) -> Option<EntityId>
where
    I: IntoIterator<Item = (EntityId, Aabb)>,
{
    entities
        .into_iter()
        .filter_map(|(id, b)| ray_aabb(ray, &b).map(|t| (t, id)))
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .map(|(_, id)| id)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScreenRegion {
    Left,
    Center,
    Right,
}

pub fn classify_region(s: ScreenPoint) -> ScreenRegion {
    if s.u < 1.0 / 3.0 {
        ScreenRegion::Left
    } else if s.u > 2.0 / 3.0 {
        ScreenRegion::Right
    } else {
        ScreenRegion::Center
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

/// Gaze seconds per screen region.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RegionTotals {
    pub left: f64,
    pub center: f64,
    pub right: f64,
}

impl RegionTotals {
    pub fn new(left: f64, center: f64, right: f64) -> Self {
        Self { left, center, right }
    }

    pub fn get(&self, r: ScreenRegion) -> f64 {
        match r {
            ScreenRegion::Left => self.left,
            ScreenRegion::Center => self.center,
            ScreenRegion::Right => self.right,
        }
    }

    pub fn total(&self) -> f64 {
        self.left + self.center + self.right
    }

    fn add(&mut self, r: ScreenRegion, dt: f64) {
        match r {
            ScreenRegion::Left => self.left += dt,
            ScreenRegion::Center => self.center += dt,
            ScreenRegion::Right => self.right += dt,
        }
    }

    fn sum(a: RegionTotals, b: RegionTotals) -> RegionTotals {
        RegionTotals::new(a.left + b.left, a.center + b.center, a.right + b.right)
    }
}

pub fn update_totals(mut totals: RegionTotals, sample: &GazeSample, dt: f64) -> RegionTotals {
    if let Some(p) = sample.point {
        totals.add(classify_region(p), dt);
    }
    totals
}

/// Exact ties are settled by `coin` (true picks Left).
pub fn least_gazed_side(totals: &RegionTotals, coin: impl FnOnce() -> bool) -> Side {
    if totals.left < totals.right {
        Side::Left
    } else if totals.right < totals.left {
        Side::Right
    } else if coin() {
        Side::Left
    } else {
        Side::Right
    }
}

/// Histogram windowed over tile traversal: gaze time accrues to the tile the
/// avatar is currently on, and the window exposed to spawn placement is the
/// sum over the most recently completed tiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionHistogram {
    current: RegionTotals,
    completed: VecDeque<RegionTotals>,
    window_tiles: usize,
}

impl Default for RegionHistogram {
    fn default() -> Self {
        Self::new(2)
    }
}

impl RegionHistogram {
    pub fn new(window_tiles: usize) -> Self {
        Self {
            current: RegionTotals::default(),
            completed: VecDeque::new(),
            window_tiles,
        }
    }

    pub fn record(&mut self, sample: &GazeSample, dt: f64) {
        self.current = update_totals(self.current, sample, dt);
    }

    /// Called when the avatar leaves a tile.
    pub fn roll(&mut self) {
        self.completed.push_back(std::mem::take(&mut self.current));
        while self.completed.len() > self.window_tiles {
            self.completed.pop_front();
        }
    }

    pub fn window(&self) -> RegionTotals {
        self.completed
            .iter()
            .copied()
            .fold(RegionTotals::default(), RegionTotals::sum)
    }

    pub fn current(&self) -> RegionTotals {
        self.current
    }
}
