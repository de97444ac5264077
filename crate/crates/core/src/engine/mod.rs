//! Fixed-timestep orchestrator.
//!
//! Each tick runs, in order: input ingestion, avatar and enemy motion,
//! attention, fire, box interactions, the death check, tile advance, and
//! finally metric bookkeeping. Given the same config and input frames the
//! event log, and therefore its digest, is bit-identical.

mod config;
mod metrics;
mod trace;

pub use config::{AttentionConfig, AttentionMode, CameraConfig, SimConfig};
pub use metrics::{aggregate_sessions, percent, AggregateReport, MeanSte, SessionMetrics};
pub use trace::{parse_trace, write_trace, InputFrame, TRACE_HEADER};

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attention::{accumulate_dwell, resolve_attended, AttentionLevel, AttentionState, EntityId, GazeSample};
use crate::events::{Digest, EntityKind, Event, EventKind, EventLog};
use crate::geometry::{Aabb, Camera, ScreenPoint};
use crate::rng::{stream, StreamId, WorldRng};
use crate::rules::{self, Avatar, EnemyAnim, Enemy, Obstacle};
use crate::worldgen::{Lane, SpawnKind, Tile, World};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("input frame for tick {got} arrived at tick {expected}")]
    OutOfOrder { expected: u64, got: u64 },
    #[error("input frame for tick {0} lies beyond the end of the session")]
    PastSessionEnd(u64),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("trace line {line}: {message}")]
    Trace { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Attention-relevant view of one live entity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Attendable {
    pub id: EntityId,
    pub kind: EntityKind,
    pub gaze_box: Aabb,
    pub attention: AttentionState,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Counters {
    pub enemies_spawned: u64,
    pub enemies_killed: u64,
    pub elements_spawned: u64,
    pub elements_noticed: u64,
    pub deaths: u64,
}

impl Counters {
    fn observe(&mut self, kind: &EventKind) {
        match kind {
            EventKind::EntitySpawned { kind, .. } => {
                self.elements_spawned += 1;
                self.enemies_spawned += kind.is_enemy() as u64;
            }
            EventKind::EntityNoticed { .. } => self.elements_noticed += 1,
            EventKind::Shot { lethal: true, .. } => self.enemies_killed += 1,
            EventKind::AvatarDeath { .. } => self.deaths += 1,
            _ => {}
        }
    }

    pub fn metrics(&self) -> SessionMetrics {
        SessionMetrics::from_counts(
            self.enemies_spawned,
            self.enemies_killed,
            self.elements_spawned,
            self.elements_noticed,
            self.deaths,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AvatarView {
    pub z: f64,
    pub health: u32,
    pub crosshair: ScreenPoint,
    pub deaths: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityView {
    pub id: EntityId,
    pub kind: EntityKind,
    pub lane: Lane,
    pub z: f64,
    pub attention: AttentionLevel,
    /// Only present for enemies.
    pub anim: Option<EnemyAnim>,
}

/// Immutable copy of one tick's state for outside consumers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub tick: u64,
    pub avatar: AvatarView,
    pub entities: Vec<EntityView>,
    pub remaining: f64,
    pub metrics: SessionMetrics,
}

pub struct Engine {
    config: SimConfig,
    tick: u64,
    total_ticks: u64,
    avatar: Avatar,
    world: World,
    world_rng: WorldRng,
    death_rng: ChaCha8Rng,
    obstacles: Vec<Obstacle>,
    enemies: Vec<Enemy>,
    next_id: EntityId,
    log: EventLog,
    counters: Counters,
    finished: bool,
}

impl Engine {
    pub fn new(config: SimConfig) -> Result<Self, EngineError> {
        config.validate()?;
        let mut world_rng = WorldRng::new(config.seed);
        let world = World::init(config.world.clone(), &mut world_rng);
        let mut engine = Self {
            tick: 0,
            total_ticks: config.session_ticks(),
            avatar: Avatar::new(&config.rules),
            world,
            world_rng,
            death_rng: stream(config.seed, StreamId::DeathVariant),
            obstacles: Vec::new(),
            enemies: Vec::new(),
            next_id: 1,
            log: EventLog::default(),
            counters: Counters::default(),
            finished: false,
            config,
        };
        let initial: Vec<Tile> = engine.world.tiles().cloned().collect();
        for tile in &initial {
            engine.emit(0.0, EventKind::TileSpawned { index: tile.index });
            engine.spawn_from(tile, 0.0);
        }
        Ok(engine)
    }

    fn emit(&mut self, t: f64, kind: EventKind) {
        self.counters.observe(&kind);
        self.log.push(Event { t, kind });
    }

    fn spawn_from(&mut self, tile: &Tile, t: f64) {
        let Some(decision) = tile.spawn else { return };
        let id = self.next_id;
        self.next_id += 1;
        let cfg = &self.config;
        let x = decision.lane.center_x(&cfg.world);
        let z = tile.mid_z();
        let width = cfg.world.corridor_width;
        let scale = cfg.attention.gaze_box_scale;
        let auto = cfg.attention_mode == AttentionMode::AutoNoticed;
        let noticed = AttentionState::auto_noticed(cfg.attention.notice_threshold);
        let kind: EntityKind = match decision.kind {
            SpawnKind::Obstacle(k) => {
                let mut o = Obstacle::new(id, k, decision.lane, x, z, width, scale);
                if auto {
                    o.attention = noticed;
                }
                self.obstacles.push(o);
                k.into()
            }
            SpawnKind::Enemy(k) => {
                let mut e = Enemy::new(id, k, decision.lane, x, z, width, scale, &cfg.rules);
                if auto {
                    e.attention = noticed;
                }
                self.enemies.push(e);
                k.into()
            }
        };
        self.emit(
            t,
            EventKind::EntitySpawned {
                id,
                kind,
                lane: decision.lane,
                z,
                tile: tile.index,
            },
        );
        if auto {
            self.emit(t, EventKind::EntityNoticed { id });
        }
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    /// Index of the next tick to run.
    pub fn tick_index(&self) -> u64 {
        self.tick
    }

    pub fn total_ticks(&self) -> u64 {
        self.total_ticks
    }

    pub fn is_finished(&self) -> bool {
        self.tick >= self.total_ticks
    }

    pub fn time(&self) -> f64 {
        self.tick as f64 * self.config.timestep
    }

    pub fn avatar(&self) -> &Avatar {
        &self.avatar
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    pub fn obstacles(&self) -> &[Obstacle] {
        &self.obstacles
    }

    pub fn enemies(&self) -> &[Enemy] {
        &self.enemies
    }

    pub fn log(&self) -> &EventLog {
        &self.log
    }

    pub fn counters(&self) -> &Counters {
        &self.counters
    }

    pub fn metrics(&self) -> SessionMetrics {
        self.counters.metrics()
    }

    pub fn digest(&self) -> Digest {
        self.log.digest()
    }

    pub fn camera(&self) -> Camera {
        self.config.camera.camera_at(self.avatar.z)
    }

    /// Entities the gaze can land on: every obstacle, and enemies that are
    /// not dying or dead.
    pub fn attendables(&self) -> impl Iterator<Item = Attendable> + '_ {
        let obstacles = self.obstacles.iter().map(|o| Attendable {
            id: o.id,
            kind: o.entity_kind(),
            gaze_box: o.box_a,
            attention: o.attention,
        });
        let enemies = self.enemies.iter().filter(|e| e.is_alive()).map(|e| Attendable {
            id: e.id,
            kind: e.entity_kind(),
            gaze_box: e.box_b,
            attention: e.attention,
        });
        obstacles.chain(enemies)
    }

    fn attention_mut(&mut self, id: EntityId) -> Option<&mut AttentionState> {
        if let Some(o) = self.obstacles.iter_mut().find(|o| o.id == id) {
            return Some(&mut o.attention);
        }
        self.enemies.iter_mut().find(|e| e.id == id).map(|e| &mut e.attention)
    }

    pub fn tick(&mut self, input: &InputFrame) -> Result<(), EngineError> {
        if self.is_finished() {
            return Err(EngineError::PastSessionEnd(input.tick));
        }
        if input.tick != self.tick {
            return Err(EngineError::OutOfOrder {
                expected: self.tick,
                got: input.tick,
            });
        }
        let dt = self.config.timestep;
        let t = (self.tick + 1) as f64 * dt;

        // 1. input
        let aim_du = if input.aim_du.is_finite() { input.aim_du } else { 0.0 };
        let aim_dv = if input.aim_dv.is_finite() { input.aim_dv } else { 0.0 };
        let c = self.avatar.crosshair;
        self.avatar.crosshair = ScreenPoint::clamped(c.u + aim_du, c.v + aim_dv).unwrap_or(c);
        let gaze = input
            .gaze
            .and_then(|p| ScreenPoint::clamped(p.u, p.v).ok())
            .map(|p| GazeSample::valid(t, p));

        // 2. motion
        self.avatar.z += self.avatar.speed * dt;
        rules::step_enemies(&mut self.enemies, dt, self.config.rules.dying_duration);
        let camera = self.camera();

        // 3. attention
        if self.config.attention_mode == AttentionMode::Tracked {
            if let Some(sample) = gaze {
                let point = sample.point.expect("valid sample");
                let ray = camera.gaze_ray(point).expect("clamped point and valid camera");
                let attended = resolve_attended(&ray, self.attendables().map(|a| (a.id, a.gaze_box)));
                if let Some(id) = attended {
                    let threshold = self.config.attention.notice_threshold;
                    let state = self.attention_mut(id).expect("attended entity is live");
                    let before = *state;
                    *state = accumulate_dwell(before, true, dt, threshold);
                    let after = *state;
                    if before.level == AttentionLevel::Unseen && after.level != AttentionLevel::Unseen {
                        self.emit(t, EventKind::EntityGazed { id });
                    }
                    if !before.is_noticed() && after.is_noticed() {
                        self.emit(t, EventKind::EntityNoticed { id });
                    }
                }
                self.world.histogram_mut().record(&sample, dt);
            }
        }

        // 4. fire
        if input.fire {
            let ray = camera
                .gaze_ray(self.avatar.crosshair)
                .expect("crosshair is clamped");
            let variants = self.config.rules.death_variants;
            if let Some(ev) = rules::fire(&ray, &mut self.enemies, variants, &mut self.death_rng) {
                self.emit(t, ev);
            }
        }

        // 5. box interactions
        for ev in rules::box_interactions(&mut self.avatar, &mut self.obstacles, &mut self.enemies) {
            self.emit(t, ev);
        }

        // 6. death
        let grace = self.grace_zone();
        for ev in rules::check_death_and_respawn(&mut self.avatar, grace, &mut self.obstacles, &mut self.enemies) {
            self.emit(t, ev);
        }

        // 7. tiles
        let changes = self.world.advance(self.avatar.z, &mut self.world_rng);
        for index in changes.despawned {
            self.emit(t, EventKind::TileDespawned { index });
        }
        for tile in &changes.spawned {
            self.emit(t, EventKind::TileSpawned { index: tile.index });
            self.spawn_from(tile, t);
        }

        // 8. bookkeeping
        self.tick += 1;
        if self.is_finished() && !self.finished {
            self.finished = true;
            self.emit(t, EventKind::SessionEnded { ticks: self.tick });
        }
        Ok(())
    }

    /// The avatar's current tile and the one after it.
    fn grace_zone(&self) -> (f64, f64) {
        let len = self.config.world.tile_length;
        match self.world.tile_at(self.avatar.z) {
            Some(t) => (t.z_start, t.z_end + len),
            None => (self.avatar.z, self.avatar.z + 2.0 * len),
        }
    }

    pub fn snapshot(&self) -> Snapshot {
        let obstacles = self.obstacles.iter().map(|o| EntityView {
            id: o.id,
            kind: o.entity_kind(),
            lane: o.lane,
            z: o.position.z,
            attention: o.attention.level,
            anim: None,
        });
        let enemies = self.enemies.iter().map(|e| EntityView {
            id: e.id,
            kind: e.entity_kind(),
            lane: e.lane,
            z: e.position.z,
            attention: e.attention.level,
            anim: Some(e.anim),
        });
        let mut entities: Vec<EntityView> = obstacles.chain(enemies).collect();
        entities.sort_by_key(|e| e.id);
        Snapshot {
            tick: self.tick,
            avatar: AvatarView {
                z: self.avatar.z,
                health: self.avatar.health,
                crosshair: self.avatar.crosshair,
                deaths: self.avatar.deaths,
            },
            entities,
            remaining: (self.total_ticks - self.tick.min(self.total_ticks)) as f64 * self.config.timestep,
            metrics: self.metrics(),
        }
    }

    pub fn into_log(self) -> EventLog {
        self.log
    }
}

#[derive(Debug, Clone)]
pub struct SessionOutcome {
    pub metrics: SessionMetrics,
    pub log: EventLog,
}

impl SessionOutcome {
    pub fn digest(&self) -> Digest {
        self.log.digest()
    }
}

/// Runs a whole session from a recorded trace. Ticks missing from the trace
/// run with empty input; frames past the session end are an error.
pub fn run_session(config: &SimConfig, trace: &[InputFrame]) -> Result<SessionOutcome, EngineError> {
    let mut engine = Engine::new(config.clone())?;
    let total = engine.total_ticks();
    if let Some(last) = trace.last() {
        if last.tick >= total {
            return Err(EngineError::PastSessionEnd(last.tick));
        }
    }
    let mut frames = trace.iter().peekable();
    while !engine.is_finished() {
        let tick = engine.tick_index();
        let frame = match frames.peek() {
            Some(f) if f.tick == tick => *frames.next().expect("peeked"),
            Some(f) if f.tick < tick => {
                return Err(EngineError::OutOfOrder {
                    expected: tick,
                    got: f.tick,
                })
            }
            _ => InputFrame::empty(tick),
        };
        engine.tick(&frame)?;
    }
    Ok(SessionOutcome {
        metrics: engine.metrics(),
        log: engine.into_log(),
    })
}
