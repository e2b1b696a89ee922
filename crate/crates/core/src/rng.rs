//! Seed derivation for independent, reproducible random substreams.
//!
//! Every stochastic component draws from a ChaCha stream keyed by
//! `(seed, domain, index)`. Output therefore depends only on those three
//! values, never on thread count or call order.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// An RNG for substream `index` of the given `domain` under a user seed.
pub fn seeded_rng(seed: u64, domain: &[u8], index: u64) -> ChaCha8Rng {
    let mut h = seed;
    for &b in domain {
        h = splitmix64(h ^ u64::from(b));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(h);
    rng.set_stream(index);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let mut a = seeded_rng(7, b"x", 0);
        let mut b = seeded_rng(7, b"x", 0);
        let mut c = seeded_rng(7, b"x", 1);
        let mut d = seeded_rng(7, b"y", 0);
        let va = a.next_u64();
        assert_eq!(va, b.next_u64());
        assert_ne!(va, c.next_u64());
        assert_ne!(va, d.next_u64());
    }
}
