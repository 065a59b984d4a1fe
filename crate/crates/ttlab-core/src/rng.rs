//! Counter-based randomness: every draw is a pure function of
//! `(master_seed, stream_id, node key)`.
//!
//! ChaCha8 is used as the underlying generator. The 256-bit key is derived
//! from the seed pair and the 64-bit ChaCha stream selects the per-node
//! substream, so samplers can visit nodes in any order (breadth-first,
//! depth-first, or from several threads) and still produce bit-identical
//! output.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Identifies one reproducible randomness source.
///
/// Distinct `(master_seed, stream_id)` pairs give statistically independent
/// streams; identical pairs give bit-identical sample paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self {
            master_seed,
            stream_id,
        }
    }

    /// Derive an independent stream for a named sub-purpose (tree sampling
    /// vs. reference sampling inside one experiment, and so on).
    pub fn child(&self, tag: u64) -> Self {
        Self {
            master_seed: self.master_seed,
            stream_id: splitmix64(self.stream_id ^ splitmix64(tag.wrapping_add(GOLDEN))),
        }
    }

    /// Stream for replica `index` of an experiment. Pure in
    /// `(master_seed, stream_id, index)`, so replicas can be generated in
    /// any worker order.
    pub fn replica(&self, index: u64) -> Self {
        self.child(index.wrapping_mul(2).wrapping_add(1))
    }

    fn key(&self) -> [u8; 32] {
        let mut state = splitmix64(self.master_seed ^ GOLDEN) ^ splitmix64(self.stream_id);
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            state = splitmix64(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        key
    }
}

pub(crate) fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(GOLDEN);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Key of the root node's substream inside a sampler.
pub(crate) const ROOT_NODE_KEY: u64 = 0x7465_6D70_6F72_616C;

/// Substream key of the `index`-th child drawn under a node with key
/// `parent`. Follows the child through sorting and trimming, which is what
/// makes trimmed and untrimmed trees couple pathwise.
pub(crate) fn child_node_key(parent: u64, index: u64) -> u64 {
    splitmix64(parent ^ index.wrapping_add(1).wrapping_mul(GOLDEN))
}

/// One ChaCha8 substream.
pub struct StreamRng {
    inner: ChaCha8Rng,
}

impl StreamRng {
    /// The substream of `node_key` under `seed`.
    pub fn for_node(seed: &SeedSpec, node_key: u64) -> Self {
        let mut inner = ChaCha8Rng::from_seed(seed.key());
        inner.set_stream(node_key);
        Self { inner }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on the open interval (0, 1): values are (k + 1/2) * 2^-53,
    /// never exactly 0 or 1.
    #[inline]
    pub fn uniform_open01(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Exponential(1) by inverse CDF from an open-interval uniform.
    #[inline]
    pub fn exp1(&mut self) -> f64 {
        -self.uniform_open01().ln()
    }

    /// Uniform index in `0..bound` without modulo bias.
    pub fn uniform_index(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "uniform_index: empty range");
        let zone = u64::MAX - (u64::MAX - bound + 1) % bound;
        loop {
            let raw = self.next_u64();
            if raw <= zone {
                return raw % bound;
            }
        }
    }
}
