//! Seeded samplers for exact rational test data.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::opt::{PureIndex, Sign, StateDelta, SystemShape};
use crate::rational::{normalize_counts, q};
use crate::Q;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random distribution with strictly positive rational weights.
pub fn distribution<R: Rng>(rng: &mut R, len: usize) -> Vec<Q> {
    let counts: Vec<u64> = (0..len).map(|_| rng.gen_range(1..=20)).collect();
    normalize_counts(&counts)
}

/// Random distribution where each weight may also be zero (never all zero).
pub fn sparse_distribution<R: Rng>(rng: &mut R, len: usize) -> Vec<Q> {
    loop {
        let counts: Vec<u64> = (0..len)
            .map(|_| if rng.gen_bool(0.3) { 0 } else { rng.gen_range(1..=12) })
            .collect();
        if counts.iter().any(|&c| c > 0) {
            return normalize_counts(&counts);
        }
    }
}

/// Splits the rational `total` into `parts` non-negative random pieces.
pub fn split<R: Rng>(rng: &mut R, total: &Q, parts: usize) -> Vec<Q> {
    distribution(rng, parts).into_iter().map(|w| w * total).collect()
}

pub fn shape<R: Rng>(rng: &mut R, max_factors: usize, max_size: usize) -> SystemShape {
    let n = rng.gen_range(1..=max_factors);
    SystemShape::new((0..n).map(|_| rng.gen_range(2..=max_size)).collect()).expect("sizes ≥ 2")
}

pub fn pure_index<R: Rng>(rng: &mut R, shape: &SystemShape) -> PureIndex {
    let rank = rng.gen_range(0..shape.size());
    PureIndex::unrank(shape, rank).expect("rank in range")
}

pub fn sign<R: Rng>(rng: &mut R) -> Sign {
    if rng.gen_bool(0.5) {
        Sign::Plus
    } else {
        Sign::Minus
    }
}

/// Random signed delta with small rational entries on a sparse support.
pub fn delta<R: Rng>(rng: &mut R, shape: &SystemShape) -> StateDelta {
    let mut entries: Vec<(PureIndex, Q)> = Vec::new();
    for x in PureIndex::all(shape) {
        if rng.gen_bool(0.6) {
            entries.push((x, q(rng.gen_range(-12..=12), rng.gen_range(1..=9))));
        }
    }
    StateDelta::new(shape.clone(), entries).expect("labels drawn from the shape")
}
