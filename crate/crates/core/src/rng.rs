//! Deterministic seed derivation. Every stochastic component draws from its
//! own ChaCha stream keyed by `(base seed, stream tag)`, so results are
//! bit-reproducible and independent of evaluation order.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tag for station positions and tier marks.
pub const STREAM_STATIONS: u64 = 0x01;
/// Stream tag for shadowing fields.
pub const STREAM_SHADOWING: u64 = 0x02;
/// Stream tag for mean-cell Monte Carlo sampling.
pub const STREAM_MEANCELL: u64 = 0x03;

/// SplitMix64-style mix of a base seed with a stream tag.
pub fn mix_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// RNG for a derived stream.
pub fn stream_rng(base: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix_seed(base, stream))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_distinct_and_stable() {
        assert_ne!(mix_seed(1, STREAM_STATIONS), mix_seed(1, STREAM_SHADOWING));
        assert_ne!(mix_seed(1, STREAM_STATIONS), mix_seed(2, STREAM_STATIONS));
        assert_eq!(mix_seed(42, 7), mix_seed(42, 7));
    }
}
