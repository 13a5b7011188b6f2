//! Counter-based, splittable randomness.
//!
//! Every random word in the library is addressed by `(seed, stream, counter)`.
//! Streams are derived from a tag and a list of integers, so setup randomness
//! and per-query randomness can never alias.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Identifier of an independent random stream under one master seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StreamId(pub u64);

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl StreamId {
    /// Derives a stream id from a textual tag and a path of integers.
    pub fn derive(tag: &str, path: &[u64]) -> Self {
        // FNV-1a over the tag, then fold the path through splitmix.
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in tag.bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        let mut acc = splitmix(h);
        for &p in path {
            acc = splitmix(acc ^ splitmix(p));
        }
        StreamId(acc)
    }

    /// A child stream of this one.
    pub fn child(self, tag: &str, index: u64) -> Self {
        StreamId::derive(tag, &[self.0, index])
    }
}

/// A reproducible generator positioned on one stream.
#[derive(Clone, Debug)]
pub struct StreamRng {
    seed: u64,
    stream: StreamId,
    inner: ChaCha8Rng,
}

fn key_from_seed(seed: u64) -> [u8; 32] {
    let mut key = [0u8; 32];
    let mut s = seed;
    for chunk in key.chunks_mut(8) {
        s = splitmix(s);
        chunk.copy_from_slice(&s.to_le_bytes());
    }
    key
}

impl StreamRng {
    pub fn new(seed: u64, stream: StreamId) -> Self {
        let mut inner = ChaCha8Rng::from_seed(key_from_seed(seed));
        inner.set_stream(stream.0);
        Self { seed, stream, inner }
    }

    /// The `counter`-th 64-bit word of `(seed, stream)`, without touching any state.
    pub fn word_at(seed: u64, stream: StreamId, counter: u64) -> u64 {
        let mut rng = ChaCha8Rng::from_seed(key_from_seed(seed));
        rng.set_stream(stream.0);
        rng.set_word_pos(u128::from(counter) * 2);
        rng.next_u64()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> StreamId {
        self.stream
    }

    /// A fresh generator on a derived child stream under the same seed.
    pub fn fork(&self, tag: &str, index: u64) -> StreamRng {
        StreamRng::new(self.seed, self.stream.child(tag, index))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in the open interval `(0, 1)`.
    #[inline]
    pub fn open01(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, n)`. Unbiased (Lemire's multiply-and-reject).
    #[inline]
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        let mut m = u128::from(self.next_u64()) * u128::from(n);
        let mut lo = m as u64;
        if lo < n {
            let threshold = n.wrapping_neg() % n;
            while lo < threshold {
                m = u128::from(self.next_u64()) * u128::from(n);
                lo = m as u64;
            }
        }
        (m >> 64) as u64
    }

    #[inline]
    pub fn index(&mut self, n: usize) -> usize {
        self.below(n as u64) as usize
    }

    /// True with probability `p`.
    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }
}
