//! Counter-based random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 stream addressed by
//! `(master seed, domain, a, b)`; the cipher's word position is the counter.
//! A consumer that always takes a fixed number of words per item (for
//! example one measurement snapshot) can jump straight to item `i`, so results
//! never depend on how work is split across threads.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// What a stream is used for; keeps streams of different consumers disjoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Disorder = 1,
    ProductState = 2,
    Snapshot = 3,
    GaussianNoise = 4,
    ChebyshevTimes = 5,
    Sampler = 6,
    Test = 7,
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The stream for `(seed, domain, a, b)`, positioned at word 0.
pub fn stream(seed: u64, domain: Domain, a: u64, b: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    let mut s = mix64(seed ^ mix64(domain as u64));
    for chunk in key.chunks_exact_mut(8) {
        s = mix64(s);
        chunk.copy_from_slice(&s.to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(mix64(a ^ mix64(b.wrapping_add(0x5851_F42D_4C95_7F2D))));
    rng
}

/// Like [`stream`] but positioned at item `index` of `words_per_item` 32-bit
/// words each.
pub fn stream_at(seed: u64, domain: Domain, a: u64, b: u64, index: u64, words_per_item: u64) -> ChaCha8Rng {
    let mut rng = stream(seed, domain, a, b);
    rng.set_word_pos(index as u128 * words_per_item as u128);
    rng
}

/// Uniform in `[0, 1)` with 53 random bits; consumes one `u64`.
#[inline]
pub fn unit_f64<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform in `{0, …, n-1}` by multiply-shift; consumes one `u64`.
#[inline]
pub fn below<R: RngCore + ?Sized>(rng: &mut R, n: u64) -> u64 {
    ((rng.next_u64() as u128 * n as u128) >> 64) as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: [u64; 4] = core::array::from_fn({
            let mut r = stream(7, Domain::Snapshot, 1, 2);
            move |_| r.next_u64()
        });
        let b: [u64; 4] = core::array::from_fn({
            let mut r = stream(7, Domain::Snapshot, 1, 2);
            move |_| r.next_u64()
        });
        let c: [u64; 4] = core::array::from_fn({
            let mut r = stream(7, Domain::Snapshot, 2, 1);
            move |_| r.next_u64()
        });
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn random_access_matches_sequential() {
        let mut seq = stream(3, Domain::Snapshot, 0, 0);
        for _ in 0..10 {
            seq.next_u64();
        }
        let next = seq.next_u64();
        // 10 u64 = 20 words = 5 items of 4 words
        let mut jump = stream_at(3, Domain::Snapshot, 0, 0, 5, 4);
        assert_eq!(jump.next_u64(), next);
    }

    #[test]
    fn below_and_unit_ranges() {
        let mut r = stream(1, Domain::Test, 0, 0);
        let mut counts = [0usize; 3];
        for _ in 0..30_000 {
            let u = unit_f64(&mut r);
            assert!((0.0..1.0).contains(&u));
            counts[below(&mut r, 3) as usize] += 1;
        }
        assert!(counts.iter().all(|&c| (9_500..10_500).contains(&c)));
    }
}
