//! Reproducible pseudo-random numbers.
//!
//! All randomized constructions draw from [`SplitMix64`]: a 64-bit state that
//! advances by the golden-ratio increment `0x9E3779B97F4A7C15` and is finalized
//! by two xor-shift/multiply rounds
//!
//! ```text
//! z = state += 0x9E3779B97F4A7C15
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! out = z ^ (z >> 31)
//! ```
//!
//! Bounded draws use rejection sampling on the top of the 64-bit range so
//! every value in `0..bound` is exactly equally likely. The whole procedure is
//! integer-only, so a seed yields the same stream on every platform.

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw from `0..bound`. Panics on `bound == 0`.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "empty range");
        // largest multiple of `bound` that fits; values above it are rejected
        let zone = u64::MAX - (u64::MAX % bound + 1) % bound;
        loop {
            let x = self.next_u64();
            if x <= zone {
                return x % bound;
            }
        }
    }

    pub fn index(&mut self, len: usize) -> usize {
        self.below(len as u64) as usize
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.index(i + 1);
            items.swap(i, j);
        }
    }

    /// Uniform `size`-subset of `0..universe`, returned sorted.
    pub fn subset(&mut self, universe: usize, size: usize) -> Vec<usize> {
        assert!(size <= universe);
        let mut pool: Vec<usize> = (0..universe).collect();
        for i in 0..size {
            let j = i + self.index(universe - i);
            pool.swap(i, j);
        }
        let mut out = pool[..size].to_vec();
        out.sort_unstable();
        out
    }
}
