//! Append-only event log and its replay digest.
//!
//! Each event serializes to one canonical JSON line `{t, kind, id?, data?}`
//! and the digest is FNV-1a (64 bit) over those lines, newline-terminated.

use std::hash::Hasher;

use fnv::FnvHasher;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::attention::EntityId;
use crate::worldgen::{EnemyKind, Lane, ObstacleKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EntityKind {
    Rock,
    Branch,
    Walker,
    Runner,
}

impl EntityKind {
    pub fn is_enemy(self) -> bool {
        matches!(self, EntityKind::Walker | EntityKind::Runner)
    }
}

impl From<ObstacleKind> for EntityKind {
    fn from(k: ObstacleKind) -> Self {
        match k {
            ObstacleKind::Rock => EntityKind::Rock,
            ObstacleKind::Branch => EntityKind::Branch,
        }
    }
}

impl From<EnemyKind> for EntityKind {
    fn from(k: EnemyKind) -> Self {
        match k {
            EnemyKind::Walker => EntityKind::Walker,
            EnemyKind::Runner => EntityKind::Runner,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DespawnReason {
    /// The avatar entered the entity's passage box.
    Passed,
    /// Cleared from around the avatar after a death.
    Grace,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EventKind {
    TileSpawned { index: u64 },
    TileDespawned { index: u64 },
    EntitySpawned { id: EntityId, kind: EntityKind, lane: Lane, z: f64, tile: u64 },
    EntityGazed { id: EntityId },
    EntityNoticed { id: EntityId },
    EntityDespawned { id: EntityId, reason: DespawnReason },
    Shot { target: EntityId, lethal: bool, hp: u32 },
    ObstacleAvoided { id: EntityId },
    ObstacleCollision { id: EntityId, health: u32 },
    EnemyAttack { id: EntityId, lethal: bool, health: u32 },
    AvatarDeath { deaths: u32 },
    SessionEnded { ticks: u64 },
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::TileSpawned { .. } => "TileSpawned",
            EventKind::TileDespawned { .. } => "TileDespawned",
            EventKind::EntitySpawned { .. } => "EntitySpawned",
            EventKind::EntityGazed { .. } => "EntityGazed",
            EventKind::EntityNoticed { .. } => "EntityNoticed",
            EventKind::EntityDespawned { .. } => "EntityDespawned",
            EventKind::Shot { .. } => "Shot",
            EventKind::ObstacleAvoided { .. } => "ObstacleAvoided",
            EventKind::ObstacleCollision { .. } => "ObstacleCollision",
            EventKind::EnemyAttack { .. } => "EnemyAttack",
            EventKind::AvatarDeath { .. } => "AvatarDeath",
            EventKind::SessionEnded { .. } => "SessionEnded",
        }
    }

    pub fn entity(&self) -> Option<EntityId> {
        match *self {
            EventKind::EntitySpawned { id, .. }
            | EventKind::EntityGazed { id }
            | EventKind::EntityNoticed { id }
            | EventKind::EntityDespawned { id, .. }
            | EventKind::ObstacleAvoided { id }
            | EventKind::ObstacleCollision { id, .. }
            | EventKind::EnemyAttack { id, .. } => Some(id),
            EventKind::Shot { target, .. } => Some(target),
            _ => None,
        }
    }

    fn data(&self) -> Option<Value> {
        Some(match *self {
            EventKind::TileSpawned { index } | EventKind::TileDespawned { index } => json!({ "index": index }),
            EventKind::EntitySpawned { kind, lane, z, tile, .. } => {
                json!({ "kind": kind, "lane": lane, "z": z, "tile": tile })
            }
            EventKind::EntityDespawned { reason, .. } => json!({ "reason": reason }),
            EventKind::Shot { lethal, hp, .. } => json!({ "lethal": lethal, "hp": hp }),
            EventKind::ObstacleCollision { health, .. } => json!({ "health": health }),
            EventKind::EnemyAttack { lethal, health, .. } => json!({ "lethal": lethal, "health": health }),
            EventKind::AvatarDeath { deaths } => json!({ "deaths": deaths }),
            EventKind::SessionEnded { ticks } => json!({ "ticks": ticks }),
            EventKind::EntityGazed { .. } | EventKind::EntityNoticed { .. } | EventKind::ObstacleAvoided { .. } => {
                return None
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    /// Session time in seconds at the end of the tick that produced it.
    pub t: f64,
    pub kind: EventKind,
}

#[derive(Serialize)]
struct Line<'a> {
    t: f64,
    kind: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    id: Option<EntityId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    data: Option<Value>,
}

impl Event {
    fn line(&self) -> Line<'static> {
        Line {
            t: self.t,
            kind: self.kind.name(),
            id: self.kind.entity(),
            data: self.kind.data(),
        }
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self.line()).expect("event lines always serialize")
    }

    /// Canonical single-line form: keys `t, kind, id, data` in that order,
    /// `data` keys sorted, no whitespace.
    pub fn to_line(&self) -> String {
        serde_json::to_string(&self.line()).expect("event lines always serialize")
    }
}

/// 64-bit replay token, printed as 16 lowercase hex digits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Digest(pub u64);

impl std::fmt::Display for Digest {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

impl std::str::FromStr for Digest {
    type Err = std::num::ParseIntError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        u64::from_str_radix(s.trim(), 16).map(Digest)
    }
}

#[derive(Debug, Clone)]
pub struct EventLog {
    events: Vec<Event>,
    /// Running FNV-1a state over the serialized lines.
    hash: u64,
}

impl Default for EventLog {
    fn default() -> Self {
        Self {
            events: Vec::new(),
            hash: FnvHasher::default().finish(),
        }
    }
}

impl EventLog {
    pub fn push(&mut self, event: Event) {
        debug_assert!(self.events.last().is_none_or(|e| e.t <= event.t));
        let mut h = FnvHasher::with_key(self.hash);
        h.write(event.to_line().as_bytes());
        h.write(b"\n");
        self.hash = h.finish();
        self.events.push(event);
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn digest(&self) -> Digest {
        Digest(self.hash)
    }

    /// Newline-delimited JSON, one event per line.
    pub fn to_ndjson(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&e.to_line());
            out.push('\n');
        }
        out
    }
}

/// Digest of an already serialized NDJSON log.
pub fn digest_ndjson(ndjson: &str) -> Digest {
    let mut h = FnvHasher::default();
    h.write(ndjson.as_bytes());
    Digest(h.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_line_shape() {
        let e = Event {
            t: 0.5,
            kind: EventKind::Shot {
                target: 7,
                lethal: true,
                hp: 0,
            },
        };
        assert_eq!(e.to_line(), r#"{"t":0.5,"kind":"Shot","id":7,"data":{"hp":0,"lethal":true}}"#);
        let n = Event {
            t: 1.0,
            kind: EventKind::EntityNoticed { id: 3 },
        };
        assert_eq!(n.to_line(), r#"{"t":1.0,"kind":"EntityNoticed","id":3}"#);
    }

    #[test]
    fn digest_matches_serialized_form() {
        let mut log = EventLog::default();
        log.push(Event {
            t: 0.0,
            kind: EventKind::TileSpawned { index: 1 },
        });
        log.push(Event {
            t: 0.25,
            kind: EventKind::AvatarDeath { deaths: 1 },
        });
        assert_eq!(log.digest(), digest_ndjson(&log.to_ndjson()));
        let text = log.digest().to_string();
        assert_eq!(text.len(), 16);
        assert_eq!(text.parse::<Digest>().unwrap(), log.digest());
        // FNV-1a offset basis for the empty log
        assert_eq!(EventLog::default().digest(), Digest(0xcbf29ce484222325));
    }
}
