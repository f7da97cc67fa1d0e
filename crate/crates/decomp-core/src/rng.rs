//! Seeded randomness. Every randomized construction in this crate takes a
//! `u64` seed and is fully deterministic given it.

use crate::rat::Rat;
use alloc::vec::Vec;
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derive an independent stream for a sub-task without consuming the parent.
pub fn substream(seed: u64, tag: u64) -> ChaCha8Rng {
    seeded(seed ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// Bernoulli trial with exact rational probability, resolved at 2^-64.
pub fn bernoulli(rng: &mut ChaCha8Rng, p: &Rat) -> bool {
    if p.is_negative() {
        return false;
    }
    let scaled: BigInt = (p.numer() << 64) / p.denom();
    match scaled.to_u64() {
        Some(threshold) => rng.gen::<u64>() < threshold,
        None => true, // p >= 1
    }
}

pub fn shuffled(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        idx.swap(i, j);
    }
    idx
}

pub fn shuffle<T>(rng: &mut ChaCha8Rng, items: &mut [T]) {
    for i in (1..items.len()).rev() {
        let j = rng.gen_range(0..=i);
        items.swap(i, j);
    }
}

/// k distinct values from 0..n, in random order.
pub fn sample_distinct(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    assert!(k <= n);
    let mut idx = shuffled(rng, n);
    idx.truncate(k);
    idx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, rat_int};

    #[test]
    fn deterministic_given_seed() {
        let a: Vec<usize> = shuffled(&mut seeded(7), 20);
        let b: Vec<usize> = shuffled(&mut seeded(7), 20);
        assert_eq!(a, b);
    }

    #[test]
    fn bernoulli_extremes() {
        let mut rng = seeded(1);
        assert!((0..100).all(|_| bernoulli(&mut rng, &rat_int(1))));
        assert!((0..100).all(|_| !bernoulli(&mut rng, &rat_int(0))));
        let hits = (0..2000).filter(|_| bernoulli(&mut rng, &rat(1, 2))).count();
        assert!((800..1200).contains(&hits));
    }
}
