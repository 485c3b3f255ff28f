use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used by every sampler. ChaCha supports 2^64 independent
/// streams per key, which is what the substream discipline relies on.
pub type StreamRng = ChaCha8Rng;

/// Reproducible seed: a 64-bit key plus a stream index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngSeed {
    pub seed: u64,
    pub stream: u64,
}

impl RngSeed {
    pub fn new(seed: u64) -> Self {
        Self { seed, stream: 0 }
    }

    pub fn rng(&self) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }

    /// Child seed for independent work unit `index`. Children of distinct
    /// parents use distinct keys, so nested splitting does not collide.
    pub fn substream(&self, index: u64) -> RngSeed {
        RngSeed {
            seed: splitmix64(self.seed ^ splitmix64(self.stream.wrapping_add(0x5851_F42D_4C95_7F2D))),
            stream: index,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn same_seed_same_sequence() {
        let a: Vec<u64> = {
            let mut r = RngSeed::new(7).substream(3).rng();
            (0..8).map(|_| r.next_u64()).collect()
        };
        let b: Vec<u64> = {
            let mut r = RngSeed::new(7).substream(3).rng();
            (0..8).map(|_| r.next_u64()).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn substreams_differ() {
        let base = RngSeed::new(7);
        let x = base.substream(0).rng().next_u64();
        let y = base.substream(1).rng().next_u64();
        let z = base.substream(0).substream(0).rng().next_u64();
        assert_ne!(x, y);
        assert_ne!(x, z);
    }
}
