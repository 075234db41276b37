//! Keyed random streams.
//!
//! Every stream is a ChaCha8 generator whose 256-bit key is the four 64-bit
//! words `(problem seed, run seed, worker, iteration)` laid out verbatim, so
//! distinct tuples always give distinct keys and no stream depends on how
//! many other streams were drawn before it or on which thread draws it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Worker slot reserved for the parameter initialization stream.
pub const INIT_WORKER: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub problem_seed: u64,
    pub run_seed: u64,
    pub worker: u64,
    pub iteration: u64,
}

impl StreamKey {
    pub fn rng(&self) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        for (chunk, word) in key.chunks_exact_mut(8).zip([
            self.problem_seed,
            self.run_seed,
            self.worker,
            self.iteration,
        ]) {
            chunk.copy_from_slice(&word.to_le_bytes());
        }
        ChaCha8Rng::from_seed(key)
    }
}

/// FNV-1a over the bit patterns of `values`. Stable across platforms and
/// releases, which `DefaultHasher` does not promise.
pub fn fingerprint(values: &[f64]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    values.iter().fold(OFFSET, |mut h, v| {
        for byte in v.to_bits().to_le_bytes() {
            h ^= u64::from(byte);
            h = h.wrapping_mul(PRIME);
        }
        h
    })
}
