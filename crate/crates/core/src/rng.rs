//! Seeded, splittable random sources.
//!
//! Every stochastic routine takes either an explicit generator or a
//! [`SeedTree`] node. Child nodes are derived by hashing the parent seed with
//! an index, so parallel tasks can own independent substreams and results do
//! not depend on scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used throughout the crate.
pub type SimRng = ChaCha8Rng;

/// A node in a deterministic tree of seeds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SeedTree {
    seed: u64,
}

impl SeedTree {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent child node for task `index`.
    pub fn child(&self, index: u64) -> Self {
        let mixed = splitmix64(self.seed ^ splitmix64(index.wrapping_add(0x6a09_e667_f3bc_c909)));
        Self { seed: mixed }
    }

    /// Child keyed by a label, for named substreams ("calibration", "noise_a", ...).
    pub fn named(&self, label: &str) -> Self {
        // FNV-1a over the label bytes
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in label.bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        self.child(h)
    }

    pub fn rng(&self) -> SimRng {
        SimRng::seed_from_u64(self.seed)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
