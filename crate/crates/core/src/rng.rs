//! Deterministic, hierarchical random-number streams.
//!
//! Every sampler takes an explicit stream so that a run is a pure function of
//! (seed, replicate, layer, role). Child streams are derived by mixing a tag
//! into the parent key, which keeps parallel replicates bit-reproducible and
//! statistically independent of each other.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Well-known stream roles inside one coupling layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Poisson,
    ThinFirst,
    ThinSecond,
    Estimator,
    Scratch,
}

impl Role {
    fn tag(self) -> u64 {
        match self {
            Role::Poisson => 0x706f_6973,
            Role::ThinFirst => 0x7468_6e31,
            Role::ThinSecond => 0x7468_6e32,
            Role::Estimator => 0x6573_7469,
            Role::Scratch => 0x7363_7261,
        }
    }
}

/// A splittable stream key. Cheap to copy; `rng()` instantiates the generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    key: [u64; 4],
}

// SplitMix64 finalizer; good avalanche for key mixing.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn from_seed(seed: u64) -> Self {
        let a = mix(seed);
        let b = mix(a ^ 0x5851_f42d_4c95_7f2d);
        let c = mix(b ^ 0x1405_7b7e_f767_814f);
        let d = mix(c ^ 0x2b32_1ed6_9843_23f5);
        RngStream { key: [a, b, c, d] }
    }

    /// Derive an independent child stream from an integer tag.
    pub fn child(&self, tag: u64) -> Self {
        let t = mix(tag);
        let a = mix(self.key[0] ^ t);
        let b = mix(self.key[1].rotate_left(17) ^ t.wrapping_mul(0x9e37_79b9));
        let c = mix(self.key[2] ^ a);
        let d = mix(self.key[3] ^ b);
        RngStream { key: [a, b, c, d] }
    }

    pub fn replicate(&self, index: u64) -> Self {
        self.child(0x7265_7000_0000_0000 ^ index)
    }

    pub fn layer(&self, index: u64) -> Self {
        self.child(0x6c61_7900_0000_0000 ^ index)
    }

    pub fn role(&self, role: Role) -> Self {
        self.child(role.tag())
    }

    /// Instantiate the generator for this stream.
    pub fn rng(&self) -> ChaCha12Rng {
        let mut seed = [0u8; 32];
        for (i, w) in self.key.iter().enumerate() {
            seed[8 * i..8 * (i + 1)].copy_from_slice(&w.to_le_bytes());
        }
        ChaCha12Rng::from_seed(seed)
    }
}
