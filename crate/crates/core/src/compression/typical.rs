//! `(N, δ)`-typical sets, stored as unions of type classes.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use super::source::{class_mass, multinomial, Source, TypeClass};
use crate::rational::to_f64;
use crate::{BctError, Result, Q};

/// Slack added to `δ` in the inclusive membership test, absorbing rounding
/// in the floating-point logarithms.
pub const TIE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct TypicalSet {
    source: Source,
    n: usize,
    delta: f64,
    /// Typical classes, in the source's class order.
    classes: Vec<TypeClass>,
    cardinality: BigUint,
    mass: Q,
}

/// `|-(1/N) log2 P(i) - H(p)| ≤ δ` for a string with group counts `counts`.
pub fn class_is_typical(source: &Source, counts: &[usize], n: usize, delta: f64) -> bool {
    let log_prob: f64 = counts
        .iter()
        .zip(source.groups())
        .map(|(&c, g)| c as f64 * to_f64(&g.prob).log2())
        .sum();
    (-log_prob / n as f64 - source.entropy()).abs() <= delta + TIE_SLACK
}

impl TypicalSet {
    pub fn new(source: &Source, n: usize, delta: f64) -> Result<Self> {
        if n == 0 {
            return Err(BctError::InvalidParameter("N must be at least 1".into()));
        }
        if delta.is_nan() || delta <= 0.0 || delta.is_infinite() {
            return Err(BctError::InvalidParameter(format!(
                "δ must be positive, got {delta}"
            )));
        }
        let classes: Vec<TypeClass> = source
            .type_classes(n)
            .into_iter()
            .filter(|c| class_is_typical(source, &c.counts, n, delta))
            .collect();
        let cardinality = classes.iter().map(|c| c.strings.clone()).sum();
        let mass = class_mass(&classes);
        Ok(Self {
            source: source.clone(),
            n,
            delta,
            classes,
            cardinality,
            mass,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn source(&self) -> &Source {
        &self.source
    }

    pub fn classes(&self) -> &[TypeClass] {
        &self.classes
    }

    /// Number of typical local strings.
    pub fn cardinality(&self) -> &BigUint {
        &self.cardinality
    }

    /// `P(i ∈ T)`, exact.
    pub fn mass(&self) -> &Q {
        &self.mass
    }

    pub fn is_empty(&self) -> bool {
        self.cardinality.is_zero()
    }

    fn counts_of(&self, locals: &[usize]) -> Option<Vec<usize>> {
        let mut counts = vec![0usize; self.source.groups().len()];
        for &i in locals {
            counts[self.source.group_of(i)?] += 1;
        }
        Some(counts)
    }

    pub fn contains(&self, locals: &[usize]) -> bool {
        locals.len() == self.n
            && self
                .counts_of(locals)
                .is_some_and(|c| self.classes.iter().any(|t| t.counts == c))
    }

    /// Typical completions of a prefix with group counts `prefix`.
    fn completions(&self, prefix: &[usize]) -> BigUint {
        let mut total = BigUint::zero();
        for t in &self.classes {
            if t.counts.iter().zip(prefix).any(|(a, b)| a < b) {
                continue;
            }
            let rest: Vec<usize> = t.counts.iter().zip(prefix).map(|(a, b)| a - b).collect();
            let mut ways = multinomial(&rest);
            for (&k, g) in rest.iter().zip(self.source.groups()) {
                ways *= num_traits::pow(BigUint::from(g.symbols.len()), k);
            }
            total += ways;
        }
        total
    }

    /// Position of a typical string among the typical strings in canonical
    /// (lexicographic) order.
    pub fn rank(&self, locals: &[usize]) -> Option<u128> {
        if !self.contains(locals) {
            return None;
        }
        let mut prefix = vec![0usize; self.source.groups().len()];
        let mut rank = BigUint::zero();
        for &i in locals {
            for a in 0..i {
                if let Some(g) = self.source.group_of(a) {
                    prefix[g] += 1;
                    rank += self.completions(&prefix);
                    prefix[g] -= 1;
                }
            }
            prefix[self.source.group_of(i)?] += 1;
        }
        rank.to_u128()
    }

    /// Inverse of [`Self::rank`].
    pub fn unrank(&self, rank: u128) -> Option<Vec<usize>> {
        let mut r = BigUint::from(rank);
        if r >= self.cardinality {
            return None;
        }
        let mut prefix = vec![0usize; self.source.groups().len()];
        let mut locals = Vec::with_capacity(self.n);
        for _ in 0..self.n {
            let mut chosen = None;
            for a in 0..self.source.size() {
                let Some(g) = self.source.group_of(a) else {
                    continue;
                };
                prefix[g] += 1;
                let count = self.completions(&prefix);
                if r < count {
                    chosen = Some(a);
                    break;
                }
                prefix[g] -= 1;
                r -= count;
            }
            locals.push(chosen?);
        }
        Some(locals)
    }

    /// `(P(T) 2^{N(H-δ)}, 2^{N(H+δ)})`: every typical string has probability
    /// in `[2^{-N(H+δ)}, 2^{-N(H-δ)}]`, which brackets `|T|`.
    pub fn cardinality_bounds(&self) -> (f64, f64) {
        let h = self.source.entropy();
        let n = self.n as f64;
        let lower = to_f64(&self.mass) * (n * (h - self.delta)).exp2();
        let upper = (n * (h + self.delta)).exp2();
        (lower, upper)
    }

    /// `|T|` checked against [`Self::cardinality_bounds`], with relative slack
    /// for the rounding in the bounds themselves.
    pub fn cardinality_within_bounds(&self) -> bool {
        let (lower, upper) = self.cardinality_bounds();
        let card = self.cardinality.to_f64().unwrap_or(f64::INFINITY);
        let slack = 1e-9;
        card >= lower * (1.0 - slack) && card <= upper * (1.0 + slack)
    }
}

/// Free-function form of [`TypicalSet::new`].
pub fn typical_set(p: &[Q], n: usize, delta: f64) -> Result<TypicalSet> {
    TypicalSet::new(&Source::new(p.to_vec())?, n, delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use num_traits::One;

    fn strings(d: usize, n: usize) -> impl Iterator<Item = Vec<usize>> {
        (0..d.pow(n as u32)).map(move |mut r| {
            let mut v = vec![0; n];
            for slot in v.iter_mut().rev() {
                *slot = r % d;
                r /= d;
            }
            v
        })
    }

    #[test]
    fn uniform_source_everything_typical() {
        let t = typical_set(&[q(1, 2), q(1, 2)], 7, 1e-6).unwrap();
        assert_eq!(t.mass(), &Q::one());
        assert_eq!(t.cardinality(), &BigUint::from(128u32));
    }

    #[test]
    fn pure_source_single_string() {
        let t = typical_set(&[Q::one(), Q::zero()], 5, 0.1).unwrap();
        assert_eq!(t.mass(), &Q::one());
        assert_eq!(t.cardinality(), &BigUint::one());
        assert!(t.contains(&[0; 5]));
        assert!(!t.contains(&[0, 0, 1, 0, 0]));
    }

    #[test]
    fn biased_source_matches_brute_force() {
        let p = [q(9, 10), q(1, 10)];
        let (n, delta) = (10, 0.2);
        let t = typical_set(&p, n, delta).unwrap();
        let pf = [0.9f64, 0.1];
        let h = -(0.9f64 * 0.9f64.log2() + 0.1 * 0.1f64.log2());
        let mut mass = 0.0;
        let mut card = 0u32;
        for s in strings(2, n) {
            let lp: f64 = s.iter().map(|&i| pf[i].log2()).sum();
            let typical = (-lp / n as f64 - h).abs() <= delta;
            assert_eq!(t.contains(&s), typical, "{s:?}");
            if typical {
                card += 1;
                mass += s.iter().map(|&i| pf[i]).product::<f64>();
            }
        }
        assert_eq!(t.cardinality(), &BigUint::from(card));
        assert!((to_f64(t.mass()) - mass).abs() < 1e-12);
    }

    #[test]
    fn rank_is_lexicographic_position() {
        let p = [q(1, 2), q(1, 3), q(1, 6)];
        let t = typical_set(&p, 5, 0.15).unwrap();
        let mut next = 0u128;
        for s in strings(3, 5) {
            match t.rank(&s) {
                Some(r) => {
                    assert_eq!(r, next);
                    assert_eq!(t.unrank(r).unwrap(), s);
                    next += 1;
                }
                None => assert!(!t.contains(&s)),
            }
        }
        assert_eq!(BigUint::from(next), *t.cardinality());
        assert!(t.unrank(next).is_none());
    }

    #[test]
    fn zero_probability_symbols_never_typical() {
        let t = typical_set(&[q(1, 2), q(1, 2), Q::zero()], 3, 0.5).unwrap();
        assert!(!t.contains(&[0, 2, 1]));
        assert_eq!(t.cardinality(), &BigUint::from(8u32));
    }

    #[test]
    fn cardinality_bounds_hold() {
        for n in [4, 8, 12, 14] {
            let t = typical_set(&[q(7, 10), q(3, 10)], n, 0.1).unwrap();
            assert!(t.cardinality_within_bounds(), "N = {n}");
        }
    }

    #[test]
    fn invalid_parameters() {
        assert!(typical_set(&[q(1, 2), q(1, 2)], 0, 0.1).is_err());
        assert!(typical_set(&[q(1, 2), q(1, 2)], 3, 0.0).is_err());
    }
}
