//! Per-row random streams.
//!
//! Row `i` of a run with master seed `s` draws from
//! `ChaCha8Rng::seed_from_u64(splitmix64(s ^ i))`, where `i` counts rows in
//! output order (n-grid position major, replicate minor). Rows are
//! therefore independent of each other and of execution order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The SplitMix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn row_rng(seed: u64, row: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ row))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn splitmix_reference_values() {
        // First outputs of the reference generator seeded with 0.
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
        assert_eq!(splitmix64(0x9E37_79B9_7F4A_7C15), 0x6E78_9E6A_A1B9_65F4);
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = row_rng(7, 3).random();
        let b: u64 = row_rng(7, 3).random();
        let c: u64 = row_rng(7, 4).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
