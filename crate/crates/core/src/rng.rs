//! Counter-based deterministic random numbers.
//!
//! Every output is a pure function of a 64-bit key and a 64-bit counter, so
//! a stream can be reproduced bit-for-bit on any platform and replications
//! can be scheduled in any order. All arithmetic is wrapping `u64`:
//!
//! ```text
//! GOLDEN = 0x9E37_79B9_7F4A_7C15
//! mix(z):
//!     z = (z ^ (z >> 30)) * 0xBF58_476D_1CE4_E5B9
//!     z = (z ^ (z >> 27)) * 0x94D0_49BB_1331_11EB
//!     z ^ (z >> 31)
//! block(key, i)        = mix(key + GOLDEN * (i + 1))
//! uniform(key, i)      = (block(key, i) >> 11) * 2^-53          in [0, 1)
//! derive_seed(seed, r) = mix(mix(seed) ^ (0xD1B5_4A32_D192_ED03 * (r + 1)))
//! ```
//!
//! `block(seed, 0), block(seed, 1), …` is exactly the SplitMix64 sequence for
//! `seed`.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const STREAM: u64 = 0xD1B5_4A32_D192_ED03;

/// SplitMix64 finalizer.
#[inline]
pub const fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The `index`-th 64-bit output of the stream keyed by `key`.
#[inline]
pub const fn block(key: u64, index: u64) -> u64 {
    mix(key.wrapping_add(GOLDEN.wrapping_mul(index.wrapping_add(1))))
}

/// Seed for replication `index` under a master seed.
#[inline]
pub const fn derive_seed(master: u64, index: u64) -> u64 {
    mix(mix(master) ^ STREAM.wrapping_mul(index.wrapping_add(1)))
}

/// Top 53 bits of a word mapped onto `[0, 1)`.
#[inline]
pub fn to_unit(word: u64) -> f64 {
    (word >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// A keyed stream with a running counter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CounterRng {
    key: u64,
    counter: u64,
}

impl CounterRng {
    pub const fn new(key: u64) -> Self {
        CounterRng { key, counter: 0 }
    }

    /// Position the stream at an arbitrary counter.
    pub const fn at(key: u64, counter: u64) -> Self {
        CounterRng { key, counter }
    }

    pub const fn counter(&self) -> u64 {
        self.counter
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let out = block(self.key, self.counter);
        self.counter = self.counter.wrapping_add(1);
        out
    }

    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        to_unit(self.next_u64())
    }
}
