//! Named random sub-streams derived from one master seed.
//!
//! Every consumer draws from its own ChaCha stream, so adding draws in one
//! place never shifts the sequence seen by another.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamId {
    Decoration = 1,
    Spawn = 2,
    EnemyKind = 3,
    Tiebreak = 4,
    DeathVariant = 5,
}

pub fn stream(seed: u64, id: StreamId) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id as u64);
    rng
}

#[derive(Debug, Clone)]
pub struct WorldRng {
    pub decoration: ChaCha8Rng,
    pub spawn: ChaCha8Rng,
    pub enemy_kind: ChaCha8Rng,
    pub tiebreak: ChaCha8Rng,
}

impl WorldRng {
    pub fn new(seed: u64) -> Self {
        Self {
            decoration: stream(seed, StreamId::Decoration),
            spawn: stream(seed, StreamId::Spawn),
            enemy_kind: stream(seed, StreamId::EnemyKind),
            tiebreak: stream(seed, StreamId::Tiebreak),
        }
    }

    pub fn coin(&mut self) -> bool {
        self.tiebreak.random_bool(0.5)
    }
}
