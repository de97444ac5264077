//! Corridor generation: the sliding tile window, marker-based tree
//! decoration and the gaze-steered spawn cascade.

use std::collections::VecDeque;
use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::attention::{least_gazed_side, RegionHistogram, RegionTotals, Side};
use crate::geometry::Vec3;
use crate::rng::WorldRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorldConfig {
    pub tile_length: f64,
    pub corridor_width: f64,
    pub initial_tiles: usize,
    /// Tiles up to and including this index never carry a spawn.
    pub warmup_tiles: u64,
    pub markers_per_tile: usize,
    /// Lateral band (absolute x) in which markers are scattered.
    pub marker_strip: [f64; 2],
    pub tree_probability: f64,
    pub tree_offset_radius: f64,
    pub tree_height: [f64; 2],
    pub spawn_probability: f64,
    pub obstacle_probability: f64,
    pub runner_probability: f64,
    pub histogram_window_tiles: usize,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            tile_length: 10.0,
            corridor_width: 6.0,
            initial_tiles: 15,
            warmup_tiles: 8,
            markers_per_tile: 8,
            marker_strip: [1.5, 2.5],
            tree_probability: 0.66,
            tree_offset_radius: 0.5,
            tree_height: [4.0, 8.0],
            spawn_probability: 0.33,
            obstacle_probability: 0.55,
            runner_probability: 0.20,
            histogram_window_tiles: 2,
        }
    }
}

impl WorldConfig {
    pub fn validate(&self) -> Result<(), String> {
        for (name, p) in [
            ("tree_probability", self.tree_probability),
            ("spawn_probability", self.spawn_probability),
            ("obstacle_probability", self.obstacle_probability),
            ("runner_probability", self.runner_probability),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(format!("{name} must lie in [0, 1], got {p}"));
            }
        }
        if !(self.tile_length > 0.0) || !(self.corridor_width > 2.0) {
            return Err("tile_length must be positive and corridor_width above 2 m".into());
        }
        if self.initial_tiles == 0 {
            return Err("initial_tiles must be at least 1".into());
        }
        let [lo, hi] = self.marker_strip;
        if !(lo >= self.lane_half_width() + self.tree_offset_radius && hi >= lo && hi <= self.corridor_width * 0.5) {
            return Err("marker_strip must keep trees outside the central lane and inside the corridor".into());
        }
        if !(self.tree_offset_radius >= 0.0) {
            return Err("tree_offset_radius must be non-negative".into());
        }
        let [h0, h1] = self.tree_height;
        if !(h0 > 0.0 && h1 >= h0) {
            return Err("tree_height must be a positive, ordered range".into());
        }
        Ok(())
    }

    /// Half width of the central lane; side lanes take the remaining width.
    pub fn lane_half_width(&self) -> f64 {
        self.corridor_width / 6.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Lane {
    Left,
    Center,
    Right,
}

impl Lane {
    pub fn is_side(self) -> bool {
        self != Lane::Center
    }

    /// Lateral coordinate of the lane's middle.
    pub fn center_x(self, cfg: &WorldConfig) -> f64 {
        let third = cfg.corridor_width / 3.0;
        match self {
            Lane::Left => -third,
            Lane::Center => 0.0,
            Lane::Right => third,
        }
    }
}

impl From<Side> for Lane {
    fn from(s: Side) -> Self {
        match s {
            Side::Left => Lane::Left,
            Side::Right => Lane::Right,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ObstacleKind {
    Rock,
    Branch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EnemyKind {
    Walker,
    Runner,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpawnKind {
    Obstacle(ObstacleKind),
    Enemy(EnemyKind),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpawnDecision {
    pub kind: SpawnKind,
    pub lane: Lane,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Marker {
    pub position: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeDecoration {
    pub position: Vec3,
    pub yaw: f64,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tile {
    pub index: u64,
    pub z_start: f64,
    pub z_end: f64,
    pub markers: Vec<Marker>,
    pub decorations: Vec<TreeDecoration>,
    pub spawn: Option<SpawnDecision>,
}

impl Tile {
    pub fn mid_z(&self) -> f64 {
        0.5 * (self.z_start + self.z_end)
    }
}

/// Inputs to one spawn decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpawnContext {
    pub previous_region: Option<Lane>,
    pub region_window: RegionTotals,
    /// Index of the tile being generated (tiles are numbered from 1).
    pub tiles_spawned: u64,
}

fn place_markers(tile: &mut Tile, cfg: &WorldConfig, rng: &mut WorldRng) {
    let [lo, hi] = cfg.marker_strip;
    tile.markers = (0..cfg.markers_per_tile)
        .map(|_| {
            let sign = if rng.decoration.random_bool(0.5) { -1.0 } else { 1.0 };
            let x = sign * rng.decoration.random_range(lo..=hi);
            let z = rng.decoration.random_range(tile.z_start..tile.z_end);
            Marker {
                position: Vec3::new(x, 0.0, z),
            }
        })
        .collect();
}

pub fn decorate_tile(mut tile: Tile, cfg: &WorldConfig, rng: &mut WorldRng) -> Tile {
    let [h0, h1] = cfg.tree_height;
    let r = &mut rng.decoration;
    tile.decorations = tile
        .markers
        .iter()
        .filter_map(|m| {
            if !r.random_bool(cfg.tree_probability) {
                return None;
            }
            // uniform over the offset disc
            let radius = cfg.tree_offset_radius * r.random::<f64>().sqrt();
            let angle = r.random_range(0.0..TAU);
            let position = m.position + Vec3::new(radius * angle.cos(), 0.0, radius * angle.sin());
            Some(TreeDecoration {
                position,
                yaw: r.random_range(0.0..TAU),
                height: r.random_range(h0..=h1),
            })
        })
        .collect();
    tile
}

pub fn decide_region(previous: Option<Lane>, window: &RegionTotals, rng: &mut WorldRng) -> Lane {
    match previous {
        Some(Lane::Center) => least_gazed_side(window, || rng.coin()).into(),
        Some(Lane::Left | Lane::Right) | None => Lane::Center,
    }
}

/// Draws happen in a fixed order: occurrence, type, enemy kind, region.
pub fn decide_spawn(ctx: &SpawnContext, cfg: &WorldConfig, rng: &mut WorldRng) -> Option<SpawnDecision> {
    if ctx.tiles_spawned <= cfg.warmup_tiles {
        return None;
    }
    if !rng.spawn.random_bool(cfg.spawn_probability) {
        return None;
    }
    let obstacle = rng.spawn.random_bool(cfg.obstacle_probability);
    let enemy_kind = if obstacle {
        None
    } else if rng.enemy_kind.random_bool(cfg.runner_probability) {
        Some(EnemyKind::Runner)
    } else {
        Some(EnemyKind::Walker)
    };
    let lane = decide_region(ctx.previous_region, &ctx.region_window, rng);
    let kind = match enemy_kind {
        Some(k) => SpawnKind::Enemy(k),
        None if lane == Lane::Center => SpawnKind::Obstacle(ObstacleKind::Rock),
        None => SpawnKind::Obstacle(ObstacleKind::Branch),
    };
    Some(SpawnDecision { kind, lane })
}

/// Generation-side outcome of an `advance` call.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TileChanges {
    pub despawned: Vec<u64>,
    pub spawned: Vec<Tile>,
}

/// The live window of tiles plus everything spawn placement depends on.
#[derive(Debug, Clone)]
pub struct World {
    cfg: WorldConfig,
    tiles: VecDeque<Tile>,
    previous_region: Option<Lane>,
    tiles_spawned: u64,
    histogram: RegionHistogram,
    decisions: Vec<(u64, SpawnDecision, RegionTotals)>,
}

impl World {
    /// Generates the initial tile window.
    pub fn init(cfg: WorldConfig, rng: &mut WorldRng) -> Self {
        let histogram = RegionHistogram::new(cfg.histogram_window_tiles);
        let mut world = Self {
            cfg,
            tiles: VecDeque::new(),
            previous_region: None,
            tiles_spawned: 0,
            histogram,
            decisions: Vec::new(),
        };
        for _ in 0..world.cfg.initial_tiles {
            let tile = world.generate_tile(rng);
            world.tiles.push_back(tile);
        }
        world
    }

    fn generate_tile(&mut self, rng: &mut WorldRng) -> Tile {
        self.tiles_spawned += 1;
        let index = self.tiles_spawned;
        let z_start = (index - 1) as f64 * self.cfg.tile_length;
        let mut tile = Tile {
            index,
            z_start,
            z_end: z_start + self.cfg.tile_length,
            markers: Vec::new(),
            decorations: Vec::new(),
            spawn: None,
        };
        place_markers(&mut tile, &self.cfg, rng);
        let mut tile = decorate_tile(tile, &self.cfg, rng);
        let ctx = SpawnContext {
            previous_region: self.previous_region,
            region_window: self.histogram.window(),
            tiles_spawned: index,
        };
        tile.spawn = decide_spawn(&ctx, &self.cfg, rng);
        if let Some(d) = tile.spawn {
            self.previous_region = Some(d.lane);
            self.decisions.push((index, d, ctx.region_window));
        }
        tile
    }

    /// Despawns every tile the avatar has fully passed and appends one new
    /// tile for each, rolling the gaze window once per crossing.
    pub fn advance(&mut self, avatar_z: f64, rng: &mut WorldRng) -> TileChanges {
        let mut changes = TileChanges::default();
        while self.tiles.front().is_some_and(|t| avatar_z >= t.z_end) {
            let gone = self.tiles.pop_front().expect("checked non-empty");
            changes.despawned.push(gone.index);
            self.histogram.roll();
            let tile = self.generate_tile(rng);
            changes.spawned.push(tile.clone());
            self.tiles.push_back(tile);
        }
        changes
    }

    pub fn tiles(&self) -> impl ExactSizeIterator<Item = &Tile> {
        self.tiles.iter()
    }

    pub fn tile_at(&self, z: f64) -> Option<&Tile> {
        self.tiles.iter().find(|t| z >= t.z_start && z < t.z_end)
    }

    pub fn histogram(&self) -> &RegionHistogram {
        &self.histogram
    }

    pub fn histogram_mut(&mut self) -> &mut RegionHistogram {
        &mut self.histogram
    }

    pub fn config(&self) -> &WorldConfig {
        &self.cfg
    }

    pub fn tiles_spawned(&self) -> u64 {
        self.tiles_spawned
    }

    /// Every spawn decision so far with the tile index and the histogram
    /// window it was made against.
    pub fn decisions(&self) -> &[(u64, SpawnDecision, RegionTotals)] {
        &self.decisions
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attention::{GazeSample, RegionTotals};
    use crate::geometry::ScreenPoint;

    fn world(seed: u64) -> (World, WorldRng) {
        let mut rng = WorldRng::new(seed);
        (World::init(WorldConfig::default(), &mut rng), rng)
    }

    #[test]
    fn initial_window() {
        for seed in 0..20 {
            let (w, _) = world(seed);
            let idx: Vec<u64> = w.tiles().map(|t| t.index).collect();
            assert_eq!(idx, (1..=15).collect::<Vec<_>>());
            assert!(w.tiles().filter(|t| t.index <= 8).all(|t| t.spawn.is_none()));
            for t in w.tiles() {
                assert!((t.z_end - t.z_start - 10.0).abs() < 1e-12);
                assert_eq!(t.markers.len(), 8);
            }
        }
    }

    #[test]
    fn init_is_deterministic() {
        let (a, _) = world(42);
        let (b, _) = world(42);
        let ta: Vec<_> = a.tiles().cloned().collect();
        let tb: Vec<_> = b.tiles().cloned().collect();
        assert_eq!(serde_json::to_string(&ta).unwrap(), serde_json::to_string(&tb).unwrap());
        let (c, _) = world(43);
        assert_ne!(ta, c.tiles().cloned().collect::<Vec<_>>());
    }

    #[test]
    fn decorations_stay_on_side_strips() {
        let (mut w, mut rng) = world(3);
        for step in 1..300 {
            w.advance(step as f64 * 10.0, &mut rng);
        }
        for t in w.tiles() {
            for m in &t.markers {
                assert!(m.position.x.abs() > 1.0);
            }
            for d in &t.decorations {
                assert!(d.position.x.abs() >= 1.0 - 1e-12 && d.position.x.abs() <= 3.0 + 1e-12);
                assert!((4.0..=8.0).contains(&d.height));
                assert!((0.0..TAU).contains(&d.yaw));
            }
        }
    }

    fn tile_with_markers(n: usize, rng: &mut WorldRng, cfg: &WorldConfig) -> Tile {
        let mut t = Tile {
            index: 1,
            z_start: 0.0,
            z_end: 10.0,
            markers: vec![],
            decorations: vec![],
            spawn: None,
        };
        let cfg = WorldConfig {
            markers_per_tile: n,
            ..cfg.clone()
        };
        place_markers(&mut t, &cfg, rng);
        t
    }

    #[test]
    fn tree_probability_statistics() {
        let cfg = WorldConfig::default();
        let mut rng = WorldRng::new(99);
        let t = tile_with_markers(10_000, &mut rng, &cfg);
        let trees = decorate_tile(t, &cfg, &mut rng).decorations.len();
        assert!((6450..=6750).contains(&trees), "{trees}");
    }

    #[test]
    fn tree_probability_extremes() {
        let mut rng = WorldRng::new(1);
        let none = WorldConfig {
            tree_probability: 0.0,
            ..Default::default()
        };
        let t = tile_with_markers(500, &mut rng, &none);
        assert!(decorate_tile(t, &none, &mut rng).decorations.is_empty());

        let all = WorldConfig {
            tree_probability: 1.0,
            ..Default::default()
        };
        let t = tile_with_markers(500, &mut rng, &all);
        let markers = t.markers.clone();
        let d = decorate_tile(t, &all, &mut rng).decorations;
        assert_eq!(d.len(), markers.len());
        for (m, tree) in markers.iter().zip(&d) {
            assert!((tree.position - m.position).length() <= all.tree_offset_radius + 1e-12);
        }
    }

    #[test]
    fn warmup_tiles_never_spawn() {
        let cfg = WorldConfig {
            spawn_probability: 1.0,
            ..Default::default()
        };
        let mut rng = WorldRng::new(5);
        for n in 0..=8 {
            let ctx = SpawnContext {
                previous_region: None,
                region_window: RegionTotals::default(),
                tiles_spawned: n,
            };
            assert_eq!(decide_spawn(&ctx, &cfg, &mut rng), None);
        }
        let ctx = SpawnContext {
            previous_region: None,
            region_window: RegionTotals::default(),
            tiles_spawned: 9,
        };
        assert!(decide_spawn(&ctx, &cfg, &mut rng).is_some());
    }

    #[test]
    fn region_rules() {
        let mut rng = WorldRng::new(0);
        let empty = RegionTotals::default();
        assert_eq!(decide_region(Some(Lane::Left), &empty, &mut rng), Lane::Center);
        assert_eq!(decide_region(Some(Lane::Right), &empty, &mut rng), Lane::Center);
        assert_eq!(decide_region(None, &empty, &mut rng), Lane::Center);
        let hist = RegionTotals::new(2.0, 0.0, 0.1);
        assert_eq!(decide_region(Some(Lane::Center), &hist, &mut rng), Lane::Right);
        let a: Vec<Lane> = {
            let mut r = WorldRng::new(8);
            (0..32).map(|_| decide_region(Some(Lane::Center), &empty, &mut r)).collect()
        };
        let b: Vec<Lane> = {
            let mut r = WorldRng::new(8);
            (0..32).map(|_| decide_region(Some(Lane::Center), &empty, &mut r)).collect()
        };
        assert_eq!(a, b);
        assert!(a.contains(&Lane::Left) && a.contains(&Lane::Right));
    }

    #[test]
    fn asset_follows_lane() {
        let cfg = WorldConfig {
            spawn_probability: 1.0,
            obstacle_probability: 1.0,
            ..Default::default()
        };
        let mut rng = WorldRng::new(4);
        let mut prev = None;
        for i in 9..200 {
            let ctx = SpawnContext {
                previous_region: prev,
                region_window: RegionTotals::default(),
                tiles_spawned: i,
            };
            let d = decide_spawn(&ctx, &cfg, &mut rng).unwrap();
            match d.kind {
                SpawnKind::Obstacle(ObstacleKind::Rock) => assert_eq!(d.lane, Lane::Center),
                SpawnKind::Obstacle(ObstacleKind::Branch) => assert!(d.lane.is_side()),
                SpawnKind::Enemy(_) => unreachable!(),
            }
            prev = Some(d.lane);
        }
    }

    #[test]
    fn advance_keeps_window() {
        let (mut w, mut rng) = world(1);
        let before: Vec<_> = w.tiles().cloned().collect();
        for _ in 0..10 {
            assert_eq!(w.advance(3.0, &mut rng), TileChanges::default());
        }
        assert_eq!(before, w.tiles().cloned().collect::<Vec<_>>());

        let c = w.advance(10.0, &mut rng);
        assert_eq!(c.despawned, vec![1]);
        assert_eq!(c.spawned.len(), 1);
        assert_eq!(w.tiles().len(), 15);
        assert_eq!(w.tiles().map(|t| t.index).max(), Some(16));

        // jumping several tiles at once still conserves the window
        w.advance(55.0, &mut rng);
        assert_eq!(w.tiles().len(), 15);
        assert_eq!(w.tiles().next().unwrap().index, 6);
    }

    #[test]
    fn gaze_window_steers_side_spawns() {
        let cfg = WorldConfig {
            spawn_probability: 1.0,
            ..Default::default()
        };
        let mut rng = WorldRng::new(12);
        let mut w = World::init(cfg, &mut rng);
        let left = GazeSample::valid(0.0, ScreenPoint { u: 0.1, v: 0.5 });
        for step in 1..=400 {
            for _ in 0..10 {
                w.histogram_mut().record(&left, 1.0 / 60.0);
            }
            w.advance(step as f64 * 10.0, &mut rng);
        }
        let mut prev: Option<Lane> = None;
        for (_, d, window) in w.decisions() {
            if prev == Some(Lane::Center) {
                // the player stares left, so side spawns land right
                if window.left > window.right {
                    assert_eq!(d.lane, Lane::Right);
                }
            }
            prev = Some(d.lane);
        }
        assert!(w.decisions().iter().filter(|d| d.1.lane == Lane::Right).count() > 100);
    }
}
