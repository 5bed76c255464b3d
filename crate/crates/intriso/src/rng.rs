//! One seed per run, split into independent ChaCha streams by label.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunRng {
    seed: u64,
}

impl RunRng {
    pub fn new(seed: u64) -> Self {
        RunRng { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Generator for one module. Streams with different labels do not
    /// overlap, and a stream does not depend on how others were used.
    pub fn stream(&self, label: &str) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(fnv1a(label));
        rng
    }
}

/// 64-bit FNV-1a; stable across platforms and compiler versions, unlike
/// the std hasher.
fn fnv1a(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}
