// SPDX-License-Identifier: MIT OR Apache-2.0

//! Deterministic seeding.
//!
//! Every replication, draw or path gets its own generator whose seed is a
//! counter-based mix of the master seed, so results never depend on the
//! order in which workers pick up items.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Generator used throughout the crate.
pub type SimRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SimSeed(pub u64);

impl SimSeed {
    pub const fn new(master: u64) -> Self {
        SimSeed(master)
    }

    /// Child seed for stream `index`.
    pub fn derive(self, index: u64) -> SimSeed {
        SimSeed(splitmix64(self.0 ^ splitmix64(index.wrapping_add(0x632b_e59b_d9b4_e019))))
    }

    pub fn rng(self) -> SimRng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

impl Default for SimSeed {
    fn default() -> Self {
        SimSeed(20_240_601)
    }
}

impl From<u64> for SimSeed {
    fn from(v: u64) -> Self {
        SimSeed(v)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
