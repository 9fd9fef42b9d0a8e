//! Counter-based random streams.
//!
//! Every random draw in the crate is a pure function of `(seed, path, counter)`.
//! A trial's stream is keyed by hashing the experiment seed together with the
//! trial's coordinates, so trials can be evaluated in any order or on any
//! number of threads and still see exactly the same numbers.

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer (Stafford variant 13).
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from a parent seed and a sequence of integer tags.
///
/// Distinct tag paths give statistically independent children; the same
/// path always gives the same child.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix64(seed ^ 0x5851_f42d_4c95_7f2d), |acc, &tag| {
        mix64(acc.wrapping_add(GOLDEN_GAMMA).wrapping_add(mix64(tag.wrapping_add(GOLDEN_GAMMA))))
    })
}

/// A stream of 64-bit values `mix64(key + counter * gamma)`.
#[derive(Debug, Clone)]
pub struct CounterRng {
    key: u64,
    counter: u64,
}

impl CounterRng {
    pub fn new(seed: u64, path: &[u64]) -> Self {
        Self {
            key: derive_seed(seed, path),
            counter: 0,
        }
    }

    /// Stream for trial `index` of the experiment keyed by `seed`.
    pub fn for_trial(seed: u64, index: u64) -> Self {
        Self::new(seed, &[index])
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN_GAMMA)))
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `[-1, 1)`.
    #[inline]
    pub fn next_symmetric(&mut self) -> f64 {
        2.0 * self.next_f64() - 1.0
    }
}
