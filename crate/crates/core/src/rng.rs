//! Deterministic seed derivation for independent RNG streams.
//!
//! Chains, datasets, and per-parent Monte Carlo integrals each get their own
//! stream derived from a base seed plus structural coordinates (chain index,
//! iteration, parent index, ...), so runs are bit-reproducible regardless of
//! scheduling.

use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;

fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mix a base seed with structural coordinates into a child seed.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    let mut s = splitmix64(base ^ 0x9E37_79B9_7F4A_7C15);
    for &p in parts {
        s = splitmix64(s.wrapping_add(0x9E37_79B9_7F4A_7C15) ^ p);
    }
    s
}

/// The stream cipher RNG used throughout; fixed algorithm, so draws are
/// stable for a given seed.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_seeds_differ_by_coordinate() {
        let a = derive_seed(1, &[0, 0]);
        let b = derive_seed(1, &[0, 1]);
        let c = derive_seed(1, &[1, 0]);
        let d = derive_seed(2, &[0, 0]);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_ne!(b, c);
        assert_ne!(a, d);
    }

    #[test]
    fn derivation_is_stable() {
        assert_eq!(derive_seed(7, &[3, 11]), derive_seed(7, &[3, 11]));
    }
}
