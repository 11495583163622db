//! Seeded random streams.
//!
//! Every random quantity in the crate is drawn from an explicit [`Prng`].
//! Independent streams are derived from a parent seed with [`derive_seed`],
//! so the draws of one component never shift the draws of another.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Prng = ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Order-sensitive hash of a sequence of words.
pub fn hash64(words: &[u64]) -> u64 {
    words
        .iter()
        .fold(0x243F_6A88_85A3_08D3, |acc, &w| mix64(acc ^ mix64(w)))
}

/// Seed of the child stream `tag` of `parent`.
pub fn derive_seed(parent: u64, tag: u64) -> u64 {
    hash64(&[parent, tag])
}

pub fn prng(seed: u64) -> Prng {
    Prng::seed_from_u64(seed)
}

/// Index drawn from the discrete distribution `probs`.
///
/// Falls back to the last index with positive mass when rounding leaves the
/// cumulative sum just below the uniform draw.
pub fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    last
}

/// As [`sample_index`] over sparse `(index, probability)` pairs.
pub fn sample_sparse<R: Rng + ?Sized>(entries: &[(usize, f64)], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for &(i, p) in entries {
        acc += p;
        if u < acc {
            return i;
        }
    }
    entries.last().map_or(0, |e| e.0)
}
