//! Seeded random stream used by every stochastic step (track shuffling, swap
//! moves, bootstrap sampling, feature subsets, SMOTE).
//!
//! The generator is SplitMix64 (Steele, Lea & Flood; Vigna's reference
//! `splitmix64.c`): state advances by `0x9e3779b97f4a7c15` and each output is
//! the mixed state. The seed is used as the initial state verbatim.
//!
//! Derived draws are fixed here so that outputs stay bit-identical:
//! * `below(n)` = high 64 bits of `next_u64() * n` (multiply-shift; the bias
//!   is below 2^-40 for every `n` this crate uses);
//! * `unit()` = `(next_u64() >> 11) * 2^-53`, uniform on `[0, 1)`.

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

/// 64-bit seed driving a [`SeededStream`].
pub type Seed = u64;

#[derive(Debug, Clone)]
pub struct SeededStream {
    inner: SplitMix64,
}

impl SeededStream {
    pub fn new(seed: Seed) -> Self {
        Self {
            inner: SplitMix64::from_seed(seed.to_le_bytes()),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform integer in `0..n`. `n` must be non-zero.
    pub fn below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    /// Uniform real in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Fisher-Yates shuffle, walking from the back.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }

    /// `count` distinct indices from `0..n`, in draw order (partial Fisher-Yates).
    pub fn sample_indices(&mut self, n: usize, count: usize) -> alloc::vec::Vec<usize> {
        let mut pool: alloc::vec::Vec<usize> = (0..n).collect();
        let count = count.min(n);
        for i in 0..count {
            let j = i + self.below(n - i);
            pool.swap(i, j);
        }
        pool.truncate(count);
        pool
    }
}
