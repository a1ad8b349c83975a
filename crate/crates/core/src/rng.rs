//! Counter-based random streams.
//!
//! Every subject of every replicate reads from its own ChaCha8 stream,
//! addressed by `(master_seed, replicate, slot)`: the master seed is the key,
//! the replicate index is the ChaCha stream id and the slot selects a disjoint
//! 2^32-word block of that stream. Nothing depends on the order in which
//! streams are opened, so results do not depend on the worker count.

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dist::normal_quantile;

/// Slot reserved for replicate-level draws (e.g. subsampling indices).
pub const REPLICATE_SLOT: u64 = u64::MAX >> 32;

pub struct Stream {
    inner: ChaCha8Rng,
}

impl Stream {
    pub fn new(master_seed: u64, replicate: u64, slot: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(master_seed);
        inner.set_stream(replicate);
        inner.set_word_pos(u128::from(slot) << 32);
        Stream { inner }
    }

    /// Stream for the `subject`-th subject of replicate `replicate`.
    pub fn subject(master_seed: u64, replicate: u64, subject: u64) -> Self {
        assert!(subject < REPLICATE_SLOT, "subject index out of range");
        Self::new(master_seed, replicate, subject)
    }

    pub fn replicate(master_seed: u64, replicate: u64) -> Self {
        Self::new(master_seed, replicate, REPLICATE_SLOT)
    }

    /// Uniform on the open interval (0, 1) with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        let bits = self.inner.next_u64() >> 11;
        (bits as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal by inversion of a stream uniform.
    pub fn std_normal(&mut self) -> f64 {
        normal_quantile(self.uniform())
    }

    pub fn normal(&mut self, mean: f64, sd: f64) -> f64 {
        mean + sd * self.std_normal()
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.inner
    }
}
