//! Random streams for replicas.
//!
//! Every replica owns an independent PCG-64 stream (`rand_pcg::Pcg64`, the
//! 128-bit-state XSL-RR generator with 64-bit output). The stream seed of
//! replica `i` under base seed `s` is
//!
//! ```text
//! replica_seed(s, i) = s XOR splitmix64(i)
//! ```
//!
//! and the generator is initialised with `Pcg64::seed_from_u64`. This
//! derivation is part of the reproducibility contract of every report.

use rand::SeedableRng;
use rand_pcg::Pcg64;

/// The SplitMix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn replica_seed(base: u64, replica: u64) -> u64 {
    base ^ splitmix64(replica)
}

pub fn stream(seed: u64) -> Pcg64 {
    Pcg64::seed_from_u64(seed)
}

/// Stream seeds of replicas `0..count`.
pub fn replica_seeds(base: u64, count: usize) -> Vec<u64> {
    (0..count as u64).map(|i| replica_seed(base, i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn splitmix_reference_values() {
        // first outputs of the reference SplitMix64 generator seeded with 0
        assert_eq!(splitmix64(0), 0xe220_a839_7b1d_cdaf);
        assert_eq!(splitmix64(0x9e37_79b9_7f4a_7c15), 0x6e78_9e6a_a1b9_65f4);
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let mut a = stream(replica_seed(7, 3));
        let mut b = stream(replica_seed(7, 3));
        let mut c = stream(replica_seed(7, 4));
        let xa: Vec<u64> = (0..4).map(|_| a.next_u64()).collect();
        let xb: Vec<u64> = (0..4).map(|_| b.next_u64()).collect();
        let xc: Vec<u64> = (0..4).map(|_| c.next_u64()).collect();
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
        assert_eq!(replica_seeds(7, 5)[3], replica_seed(7, 3));
    }
}
