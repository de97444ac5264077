//! Entities and the interaction rules: shooting, obstacle approach, enemy
//! approach, avatar death, and the enemy animation state machine.
//!
//! Every favorable outcome is gated on the entity having been noticed:
//!
//! | interaction      | noticed                   | not noticed                  |
//! |------------------|---------------------------|------------------------------|
//! | shot at enemy    | dies instantly            | loses 1 hp (dies at 0)       |
//! | obstacle reached | avoided, no damage        | collision, avatar loses 1 hp |
//! | enemy reaches    | attack, avatar loses 1 hp | attack kills the avatar      |

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::attention::{AttentionState, EntityId};
use crate::events::{DespawnReason, EntityKind, EventKind};
use crate::geometry::{ray_aabb, Aabb, Ray, ScreenPoint, Vec3};
use crate::worldgen::{EnemyKind, Lane, ObstacleKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RulesConfig {
    pub max_health: u32,
    pub enemy_hp: u32,
    pub avatar_speed: f64,
    pub walker_speed: f64,
    pub runner_speed_factor: f64,
    /// Seconds a death animation plays before the enemy is inert.
    pub dying_duration: f64,
    pub death_variants: u8,
}

impl Default for RulesConfig {
    fn default() -> Self {
        Self {
            max_health: 3,
            enemy_hp: 2,
            avatar_speed: 6.0,
            walker_speed: 1.5,
            runner_speed_factor: 2.0,
            dying_duration: 1.0,
            death_variants: 3,
        }
    }
}

impl RulesConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.max_health == 0 || self.enemy_hp == 0 {
            return Err("max_health and enemy_hp must be at least 1".into());
        }
        if !(self.avatar_speed >= 0.0 && self.walker_speed >= 0.0 && self.runner_speed_factor >= 0.0) {
            return Err("speeds must be non-negative".into());
        }
        if self.avatar_speed.is_infinite() || self.walker_speed.is_infinite() || self.runner_speed_factor.is_infinite() {
            return Err("speeds must be finite".into());
        }
        if !(self.dying_duration >= 0.0) || self.death_variants == 0 {
            return Err("dying_duration must be non-negative and death_variants at least 1".into());
        }
        Ok(())
    }

    pub fn enemy_speed(&self, kind: EnemyKind) -> f64 {
        match kind {
            EnemyKind::Walker => self.walker_speed,
            EnemyKind::Runner => self.walker_speed * self.runner_speed_factor,
        }
    }
}

/// Height of the point used for avatar/box overlap.
pub const AVATAR_BODY_HEIGHT: f64 = 1.0;
const TRIGGER_CEILING: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Avatar {
    pub z: f64,
    pub speed: f64,
    pub health: u32,
    pub max_health: u32,
    pub crosshair: ScreenPoint,
    pub deaths: u32,
}

impl Avatar {
    pub fn new(cfg: &RulesConfig) -> Self {
        Self {
            z: 0.0,
            speed: cfg.avatar_speed,
            health: cfg.max_health,
            max_health: cfg.max_health,
            crosshair: ScreenPoint::CENTER,
            deaths: 0,
        }
    }

    pub fn body(&self) -> Vec3 {
        Vec3::new(0.0, AVATAR_BODY_HEIGHT, self.z)
    }

    fn damage(&mut self, amount: u32) {
        self.health = self.health.saturating_sub(amount);
    }
}

/// Box spanning the whole corridor cross-section between two z values.
fn corridor_slab(corridor_width: f64, z0: f64, z1: f64) -> Aabb {
    let half = corridor_width * 0.5;
    Aabb::new(Vec3::new(-half, 0.0, z0), Vec3::new(half, TRIGGER_CEILING, z1))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub id: EntityId,
    pub kind: ObstacleKind,
    pub lane: Lane,
    pub position: Vec3,
    pub attention: AttentionState,
    /// Mesh stand-in.
    pub body: Aabb,
    /// Gaze detection.
    pub box_a: Aabb,
    /// Collision trigger, in front.
    pub box_b: Aabb,
    /// Passage, behind.
    pub box_c: Aabb,
    pub triggered: bool,
}

impl Obstacle {
    pub fn new(id: EntityId, kind: ObstacleKind, lane: Lane, x: f64, z: f64, corridor_width: f64, gaze_scale: f64) -> Self {
        let body = match kind {
            ObstacleKind::Rock => Aabb::from_center(Vec3::new(x, 0.5, z), Vec3::new(0.8, 0.5, 0.5)),
            // the hanging branch itself, not the trunk
            ObstacleKind::Branch => Aabb::from_center(Vec3::new(x, 1.6, z), Vec3::new(0.9, 0.25, 0.3)),
        };
        let front = body.min.z;
        let back = body.max.z;
        Self {
            id,
            kind,
            lane,
            position: Vec3::new(x, 0.0, z),
            attention: AttentionState::unseen(),
            body,
            box_a: body.scaled(gaze_scale),
            box_b: corridor_slab(corridor_width, front - 1.5, front - 0.1),
            box_c: corridor_slab(corridor_width, back + 0.1, back + 3.5),
            triggered: false,
        }
    }

    pub fn entity_kind(&self) -> EntityKind {
        self.kind.into()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnemyAnim {
    Walking,
    Attacking,
    Dying { variant: u8 },
    Dead { variant: u8 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Enemy {
    pub id: EntityId,
    pub kind: EnemyKind,
    pub lane: Lane,
    pub position: Vec3,
    pub speed: f64,
    pub hp: u32,
    pub attention: AttentionState,
    pub anim: EnemyAnim,
    pub dying_elapsed: f64,
    /// Attack trigger, in front.
    pub box_a: Aabb,
    /// Gaze and bullet detection.
    pub box_b: Aabb,
    /// Passage, behind.
    pub box_c: Aabb,
    pub body: Aabb,
    pub attacked: bool,
}

impl Enemy {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        id: EntityId,
        kind: EnemyKind,
        lane: Lane,
        x: f64,
        z: f64,
        corridor_width: f64,
        gaze_scale: f64,
        cfg: &RulesConfig,
    ) -> Self {
        let body = Aabb::from_center(Vec3::new(x, 0.9, z), Vec3::new(0.4, 0.9, 0.3));
        Self {
            id,
            kind,
            lane,
            position: Vec3::new(x, 0.0, z),
            speed: cfg.enemy_speed(kind),
            hp: cfg.enemy_hp,
            attention: AttentionState::unseen(),
            anim: EnemyAnim::Walking,
            dying_elapsed: 0.0,
            box_a: corridor_slab(corridor_width, body.min.z - 2.1, body.min.z - 0.1),
            box_b: body.scaled(gaze_scale),
            box_c: corridor_slab(corridor_width, body.max.z + 0.1, body.max.z + 3.5),
            body,
            attacked: false,
        }
    }

    pub fn entity_kind(&self) -> EntityKind {
        self.kind.into()
    }

    /// Walking or mid-attack; dying and dead enemies are inert.
    pub fn is_alive(&self) -> bool {
        matches!(self.anim, EnemyAnim::Walking | EnemyAnim::Attacking)
    }

    /// Only walking enemies can be shot; an enemy whose attack has landed is
    /// spent.
    pub fn is_shootable(&self) -> bool {
        self.anim == EnemyAnim::Walking
    }

    fn translate_z(&mut self, dz: f64) {
        let d = Vec3::new(0.0, 0.0, dz);
        self.position = self.position + d;
        self.body = self.body.translated(d);
        self.box_a = self.box_a.translated(d);
        self.box_b = self.box_b.translated(d);
        self.box_c = self.box_c.translated(d);
    }

    fn start_dying(&mut self, variant: u8) {
        self.hp = 0;
        self.anim = EnemyAnim::Dying { variant };
        self.dying_elapsed = 0.0;
    }
}

/// Hitscan along `ray`. The nearest shootable enemy whose B-box is hit takes
/// the shot; returns `None` on a miss.
pub fn fire<R: Rng>(ray: &Ray, enemies: &mut [Enemy], death_variants: u8, variant_rng: &mut R) -> Option<EventKind> {
    let target = enemies
        .iter()
        .enumerate()
        .filter(|(_, e)| e.is_shootable())
        .filter_map(|(i, e)| ray_aabb(ray, &e.box_b).map(|t| (t, e.id, i)))
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .map(|(_, _, i)| i)?;
    let enemy = &mut enemies[target];
    let lethal = if enemy.attention.is_noticed() {
        true
    } else {
        enemy.hp = enemy.hp.saturating_sub(1);
        enemy.hp == 0
    };
    if lethal {
        let variant = variant_rng.random_range(0..death_variants);
        enemy.start_dying(variant);
    }
    Some(EventKind::Shot {
        target: enemy.id,
        lethal,
        hp: enemy.hp,
    })
}

/// Resolves the avatar reaching an obstacle's B-box. Callers guarantee this
/// is the first entry.
pub fn obstacle_approach(avatar: &mut Avatar, obstacle: &mut Obstacle) -> EventKind {
    obstacle.triggered = true;
    if obstacle.attention.is_noticed() {
        EventKind::ObstacleAvoided { id: obstacle.id }
    } else {
        avatar.damage(1);
        EventKind::ObstacleCollision {
            id: obstacle.id,
            health: avatar.health,
        }
    }
}

/// Resolves the avatar reaching an enemy's A-box. Corpses do not attack.
pub fn enemy_approach(avatar: &mut Avatar, enemy: &mut Enemy) -> Option<EventKind> {
    if !enemy.is_alive() || enemy.attacked {
        return None;
    }
    enemy.attacked = true;
    enemy.anim = EnemyAnim::Attacking;
    let lethal = !enemy.attention.is_noticed();
    if lethal {
        avatar.health = 0;
    } else {
        avatar.damage(1);
    }
    Some(EventKind::EnemyAttack {
        id: enemy.id,
        lethal,
        health: avatar.health,
    })
}

/// Edge-triggered box checks for one tick: obstacle B-boxes, enemy A-boxes,
/// then passage C-boxes (which remove the entity).
pub fn box_interactions(avatar: &mut Avatar, obstacles: &mut Vec<Obstacle>, enemies: &mut Vec<Enemy>) -> Vec<EventKind> {
    let mut events = Vec::new();
    let body = avatar.body();
    for o in obstacles.iter_mut() {
        if !o.triggered && o.box_b.contains(body) {
            events.push(obstacle_approach(avatar, o));
        }
    }
    for e in enemies.iter_mut() {
        if !e.attacked && e.box_a.contains(body) {
            if let Some(ev) = enemy_approach(avatar, e) {
                events.push(ev);
            }
        }
    }
    obstacles.retain(|o| {
        let passed = o.box_c.contains(body);
        if passed {
            events.push(EventKind::EntityDespawned {
                id: o.id,
                reason: DespawnReason::Passed,
            });
        }
        !passed
    });
    enemies.retain(|e| {
        let passed = e.box_c.contains(body);
        if passed {
            events.push(EventKind::EntityDespawned {
                id: e.id,
                reason: DespawnReason::Passed,
            });
        }
        !passed
    });
    events
}

/// End-of-tick health check. On death the avatar respawns at full health and
/// every entity whose position lies in `grace_zone` is cleared; the session
/// keeps running.
pub fn check_death_and_respawn(
    avatar: &mut Avatar,
    grace_zone: (f64, f64),
    obstacles: &mut Vec<Obstacle>,
    enemies: &mut Vec<Enemy>,
) -> Vec<EventKind> {
    if avatar.health > 0 {
        return Vec::new();
    }
    avatar.deaths += 1;
    avatar.health = avatar.max_health;
    let mut events = vec![EventKind::AvatarDeath { deaths: avatar.deaths }];
    let (z0, z1) = grace_zone;
    let inside = |z: f64| z >= z0 && z < z1;
    let mut cleared: Vec<EntityId> = Vec::new();
    obstacles.retain(|o| {
        let hit = inside(o.position.z);
        if hit {
            cleared.push(o.id);
        }
        !hit
    });
    enemies.retain(|e| {
        let hit = inside(e.position.z);
        if hit {
            cleared.push(e.id);
        }
        !hit
    });
    cleared.sort_unstable();
    events.extend(cleared.into_iter().map(|id| EventKind::EntityDespawned {
        id,
        reason: DespawnReason::Grace,
    }));
    events
}

/// Moves living enemies toward the avatar (-z) and plays out death
/// animations. Dying and dead enemies stay where they fell.
pub fn step_enemies(enemies: &mut [Enemy], dt: f64, dying_duration: f64) {
    for e in enemies.iter_mut() {
        match e.anim {
            EnemyAnim::Walking | EnemyAnim::Attacking => e.translate_z(-e.speed * dt),
            EnemyAnim::Dying { variant } => {
                e.dying_elapsed += dt;
                if e.dying_elapsed >= dying_duration {
                    e.anim = EnemyAnim::Dead { variant };
                }
            }
            EnemyAnim::Dead { .. } => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attention::{AttentionLevel, AttentionState};
    use rand::SeedableRng;

    const W: f64 = 6.0;

    fn cfg() -> RulesConfig {
        RulesConfig::default()
    }

    fn noticed() -> AttentionState {
        AttentionState::auto_noticed(0.5)
    }

    fn walker(id: EntityId, z: f64) -> Enemy {
        Enemy::new(id, EnemyKind::Walker, Lane::Center, 0.0, z, W, 1.5, &cfg())
    }

    fn center_ray() -> Ray {
        Ray::new(Vec3::new(0.0, 1.7, 0.0), Vec3::new(0.0, -0.08, 1.0))
    }

    fn rng() -> rand_chacha::ChaCha8Rng {
        rand_chacha::ChaCha8Rng::seed_from_u64(0)
    }

    #[test]
    fn noticed_enemy_dies_to_one_shot() {
        let mut es = vec![walker(1, 10.0)];
        es[0].attention = noticed();
        let ev = fire(&center_ray(), &mut es, 3, &mut rng()).unwrap();
        assert_eq!(ev, EventKind::Shot { target: 1, lethal: true, hp: 0 });
        assert!(matches!(es[0].anim, EnemyAnim::Dying { variant } if variant < 3));
    }

    #[test]
    fn unnoticed_enemy_is_only_hurt() {
        let mut es = vec![walker(1, 10.0)];
        let ev = fire(&center_ray(), &mut es, 3, &mut rng()).unwrap();
        assert_eq!(ev, EventKind::Shot { target: 1, lethal: false, hp: 1 });
        assert_eq!(es[0].anim, EnemyAnim::Walking);
        let ev = fire(&center_ray(), &mut es, 3, &mut rng()).unwrap();
        assert_eq!(ev, EventKind::Shot { target: 1, lethal: true, hp: 0 });
        // the corpse no longer takes shots
        assert_eq!(fire(&center_ray(), &mut es, 3, &mut rng()), None);
    }

    #[test]
    fn miss_changes_nothing() {
        let mut es = vec![walker(1, 10.0)];
        let before = es.clone();
        let up = Ray::new(Vec3::new(0.0, 1.7, 0.0), Vec3::new(0.0, 1.0, 0.2));
        assert_eq!(fire(&up, &mut es, 3, &mut rng()), None);
        assert_eq!(es, before);
    }

    #[test]
    fn nearest_enemy_takes_the_shot() {
        let mut es = vec![walker(2, 20.0), walker(1, 10.0)];
        let ev = fire(&center_ray(), &mut es, 3, &mut rng()).unwrap();
        assert_eq!(ev, EventKind::Shot { target: 1, lethal: false, hp: 1 });
    }

    #[test]
    fn obstacle_outcomes() {
        let mut a = Avatar::new(&cfg());
        let mut rock = Obstacle::new(1, ObstacleKind::Rock, Lane::Center, 0.0, 20.0, W, 1.5);
        rock.attention = noticed();
        assert_eq!(obstacle_approach(&mut a, &mut rock), EventKind::ObstacleAvoided { id: 1 });
        assert_eq!(a.health, 3);

        let mut branch = Obstacle::new(2, ObstacleKind::Branch, Lane::Left, -2.0, 20.0, W, 1.5);
        assert_eq!(
            obstacle_approach(&mut a, &mut branch),
            EventKind::ObstacleCollision { id: 2, health: 2 }
        );
    }

    #[test]
    fn obstacle_trigger_is_edge_triggered() {
        let mut a = Avatar::new(&cfg());
        let mut obstacles = vec![Obstacle::new(1, ObstacleKind::Rock, Lane::Center, 0.0, 20.0, W, 1.5)];
        let mut enemies = Vec::new();
        let mut events = Vec::new();
        for step in 0..400 {
            a.z = step as f64 * 0.1;
            events.extend(box_interactions(&mut a, &mut obstacles, &mut enemies));
        }
        let collisions = events.iter().filter(|e| matches!(e, EventKind::ObstacleCollision { .. })).count();
        assert_eq!(collisions, 1);
        assert!(obstacles.is_empty(), "passage box should have removed it");
        assert!(matches!(events.last(), Some(EventKind::EntityDespawned { id: 1, reason: DespawnReason::Passed })));
    }

    #[test]
    fn enemy_attack_outcomes() {
        let mut a = Avatar::new(&cfg());
        let mut w = walker(1, 10.0);
        w.attention = noticed();
        assert_eq!(
            enemy_approach(&mut a, &mut w),
            Some(EventKind::EnemyAttack { id: 1, lethal: false, health: 2 })
        );
        assert_eq!(w.anim, EnemyAnim::Attacking);
        assert_eq!(enemy_approach(&mut a, &mut w), None, "one attack per enemy");

        let mut a = Avatar::new(&cfg());
        let mut r = Enemy::new(2, EnemyKind::Runner, Lane::Left, -2.0, 10.0, W, 1.5, &cfg());
        assert_eq!(
            enemy_approach(&mut a, &mut r),
            Some(EventKind::EnemyAttack { id: 2, lethal: true, health: 0 })
        );
        let ev = check_death_and_respawn(&mut a, (0.0, 20.0), &mut vec![], &mut vec![]);
        assert_eq!(ev, vec![EventKind::AvatarDeath { deaths: 1 }]);
    }

    #[test]
    fn corpses_do_not_attack() {
        let mut a = Avatar::new(&cfg());
        let mut w = walker(1, 10.0);
        w.start_dying(0);
        assert_eq!(enemy_approach(&mut a, &mut w), None);
        w.anim = EnemyAnim::Dead { variant: 0 };
        assert_eq!(enemy_approach(&mut a, &mut w), None);
        assert_eq!(a.health, 3);
    }

    #[test]
    fn death_and_grace_window() {
        let mut a = Avatar::new(&cfg());
        a.health = 1;
        assert!(check_death_and_respawn(&mut a, (0.0, 20.0), &mut vec![], &mut vec![]).is_empty());

        let mut obstacles = vec![
            Obstacle::new(1, ObstacleKind::Rock, Lane::Center, 0.0, 15.0, W, 1.5),
            Obstacle::new(2, ObstacleKind::Rock, Lane::Center, 0.0, 35.0, W, 1.5),
        ];
        let mut enemies = vec![walker(3, 5.0)];
        a.health = 0;
        // a second lethal hit in the same tick cannot push health lower
        a.damage(1);
        let ev = check_death_and_respawn(&mut a, (0.0, 20.0), &mut obstacles, &mut enemies);
        assert_eq!(a.deaths, 1);
        assert_eq!(a.health, 3);
        assert_eq!(ev[0], EventKind::AvatarDeath { deaths: 1 });
        assert_eq!(ev.len(), 3);
        assert_eq!(obstacles.len(), 1);
        assert!(enemies.is_empty());
    }

    #[test]
    fn enemy_kinematics() {
        let c = cfg();
        let mut es = vec![walker(1, 30.0), Enemy::new(2, EnemyKind::Runner, Lane::Right, 2.0, 30.0, W, 1.5, &c)];
        step_enemies(&mut es, 1.0, c.dying_duration);
        let walked = 30.0 - es[0].position.z;
        let ran = 30.0 - es[1].position.z;
        assert!((walked - 1.5).abs() < 1e-12);
        assert!((ran - 2.0 * walked).abs() < 1e-12);
        // boxes travel with the body
        assert!((es[0].box_b.center().z - es[0].position.z).abs() < 1e-12);

        es[0].start_dying(1);
        let frozen = es[0].position;
        step_enemies(&mut es, 0.5, c.dying_duration);
        assert_eq!(es[0].position, frozen);
        assert_eq!(es[0].anim, EnemyAnim::Dying { variant: 1 });
        step_enemies(&mut es, 0.5, c.dying_duration);
        assert_eq!(es[0].anim, EnemyAnim::Dead { variant: 1 });
        step_enemies(&mut es, 3.0, c.dying_duration);
        assert_eq!(es[0].position, frozen);
    }

    #[test]
    fn box_order_along_corridor() {
        let o = Obstacle::new(1, ObstacleKind::Branch, Lane::Right, 2.0, 50.0, W, 1.5);
        assert!(o.box_b.max.z < o.box_c.min.z && o.box_a.center().z < o.box_c.min.z);
        assert!(o.box_a.contains_box(&o.body));
        let e = walker(2, 50.0);
        assert!(e.box_a.max.z < e.box_c.min.z && e.box_b.center().z < e.box_c.min.z);
        assert_eq!(e.attention.level, AttentionLevel::Unseen);
    }
}
