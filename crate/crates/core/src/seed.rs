//! Deterministic per-path sub-seed derivation.
//!
//! Path `i` of an ensemble with master seed `m` uses
//! `splitmix64(m ^ splitmix64(i + 1))`, where `splitmix64` is the standard
//! 64-bit avalanche finalizer
//!
//! ```text
//! z += 0x9E3779B97F4A7C15
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! z ^ (z >> 31)
//! ```
//!
//! The derivation depends only on `(m, i)`, so results are independent of
//! scheduling and worker count.

/// One round of the splitmix64 generator/finalizer.
#[inline]
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sub-seed for path `path_index` under `master_seed`.
#[inline]
pub fn path_seed(master_seed: u64, path_index: u64) -> u64 {
    splitmix64(master_seed ^ splitmix64(path_index.wrapping_add(1)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix_reference_values() {
        // First three outputs of the reference splitmix64 stream seeded at 0:
        // state advances by the golden-ratio increment before finalizing.
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
        assert_eq!(
            splitmix64(0x9E37_79B9_7F4A_7C15),
            0x6E78_9E6A_A1B9_65F4
        );
        assert_eq!(
            splitmix64(0x9E37_79B9_7F4A_7C15_u64.wrapping_mul(2)),
            0x06C4_5D18_8009_454F
        );
    }

    #[test]
    fn path_seeds_are_distinct() {
        let mut seen = std::collections::HashSet::new();
        for i in 0..10_000u64 {
            assert!(seen.insert(path_seed(42, i)));
        }
    }

    #[test]
    fn path_seed_depends_on_master() {
        assert_ne!(path_seed(1, 0), path_seed(2, 0));
    }
}
