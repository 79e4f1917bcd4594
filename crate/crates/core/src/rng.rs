//! Deterministic, hierarchical random streams.
//!
//! A [`Substream`] is a 256-bit ChaCha key derived from a master seed and a
//! path of integer labels (sweep point, repetition, ...). Each frame then
//! draws from its own ChaCha stream id, so results never depend on which
//! worker handled which frame.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Substream {
    key: [u64; 4],
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Substream {
    pub fn new(master_seed: u64) -> Self {
        let mut s = master_seed;
        Self {
            key: [
                splitmix64(&mut s),
                splitmix64(&mut s),
                splitmix64(&mut s),
                splitmix64(&mut s),
            ],
        }
    }

    /// Independent child stream for `label`.
    pub fn child(&self, label: u64) -> Self {
        let mut key = [0u64; 4];
        for (k, word) in key.iter_mut().enumerate() {
            let mut s = self.key[k] ^ label.rotate_left(17 * k as u32 + 7);
            // Two rounds so neighbouring labels decorrelate across all words.
            splitmix64(&mut s);
            s ^= self.key[(k + 1) % 4];
            *word = splitmix64(&mut s);
        }
        Self { key }
    }

    /// Generator for frame `index` of this stream.
    pub fn frame_rng(&self, index: u64) -> ChaCha8Rng {
        let mut seed = [0u8; 32];
        for (chunk, word) in seed.chunks_exact_mut(8).zip(self.key) {
            chunk.copy_from_slice(&word.to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(index);
        rng
    }
}
