//! Seeded random streams.
//!
//! Every stream is a ChaCha20 generator. Independent streams for parallel
//! work are obtained from one 64-bit seed by selecting the ChaCha stream
//! number, so the values drawn by replication `i` never depend on how the
//! replications were scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type StreamRng = ChaCha20Rng;

/// Generator for `seed`, stream 0.
pub fn from_seed(seed: u64) -> StreamRng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Generator for the pair `(seed, stream)`.
pub fn stream(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// SplitMix64 finalizer, used to fold extra keys into a seed.
pub fn mix(seed: u64, key: u64) -> u64 {
    let mut z = seed ^ key.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a over a string, for keying seeds by names.
pub fn key_of(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn same_seed_same_stream() {
        let mut a = stream(7, 3);
        let mut b = stream(7, 3);
        for _ in 0..64 {
            assert_eq!(a.random::<u64>(), b.random::<u64>());
        }
    }

    #[test]
    fn streams_differ() {
        let mut a = stream(7, 0);
        let mut b = stream(7, 1);
        assert_ne!(a.random::<u64>(), b.random::<u64>());
        assert_ne!(mix(1, 2), mix(1, 3));
        assert_ne!(key_of("normal"), key_of("t9"));
    }

    #[test]
    fn known_first_draw_is_pinned() {
        // Guards against silent generator changes across dependency bumps.
        assert_eq!(from_seed(42).random::<u64>(), 9_482_535_800_248_027_256);
        assert_eq!(from_seed(42).random::<u64>(), stream(42, 0).random::<u64>());
    }
}
