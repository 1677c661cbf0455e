//! Memoryless sources and the type-class view of their messages.

use num_bigint::BigUint;
use num_traits::{One, Signed, Zero};

use crate::opt::{compose_states, State, SystemShape};
use crate::rational::{format_rational, from_biguint, inv_pow2, to_f64};
use crate::{BctError, Result, Q, DEFAULT_MEMORY_BOUND};

/// A normalized distribution over the pure states of a single system, with
/// its symbols grouped by equal probability.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Source {
    p: Vec<Q>,
    /// Nonzero probability groups, sorted by probability descending.
    groups: Vec<Group>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Group {
    pub prob: Q,
    /// Symbols with this probability, ascending.
    pub symbols: Vec<usize>,
}

/// All local strings whose symbol counts per group are `counts`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeClass {
    pub counts: Vec<usize>,
    /// Probability of each string in the class.
    pub prob: Q,
    /// Number of local strings in the class.
    pub strings: BigUint,
}

impl Source {
    pub fn new(p: Vec<Q>) -> Result<Self> {
        if p.len() < 2 {
            return Err(BctError::InvalidDistribution(format!(
                "a source needs at least 2 symbols, got {}",
                p.len()
            )));
        }
        if let Some(x) = p.iter().find(|x| x.is_negative()) {
            return Err(BctError::InvalidDistribution(format!(
                "negative probability {}",
                format_rational(x)
            )));
        }
        let total: Q = p.iter().sum();
        if !total.is_one() {
            return Err(BctError::InvalidDistribution(format!(
                "probabilities sum to {}",
                format_rational(&total)
            )));
        }
        let mut groups: Vec<Group> = Vec::new();
        for (i, x) in p.iter().enumerate().filter(|(_, x)| x.is_positive()) {
            match groups.iter_mut().find(|g| &g.prob == x) {
                Some(g) => g.symbols.push(i),
                None => groups.push(Group {
                    prob: x.clone(),
                    symbols: vec![i],
                }),
            }
        }
        groups.sort_by(|a, b| b.prob.cmp(&a.prob));
        Ok(Self { p, groups })
    }

    pub fn probabilities(&self) -> &[Q] {
        &self.p
    }

    pub fn size(&self) -> usize {
        self.p.len()
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    /// Group of a symbol, `None` for zero-probability symbols.
    pub fn group_of(&self, symbol: usize) -> Option<usize> {
        self.groups.iter().position(|g| g.symbols.contains(&symbol))
    }

    pub fn max_prob(&self) -> &Q {
        &self.groups[0].prob
    }

    pub fn is_pure(&self) -> bool {
        self.groups.len() == 1 && self.groups[0].symbols.len() == 1
    }

    pub fn entropy(&self) -> f64 {
        crate::entropy::entropy_bits(self.p.iter().map(to_f64))
    }

    /// `(H(p) + 1) / 2`.
    pub fn information_content(&self) -> f64 {
        (self.entropy() + 1.0) / 2.0
    }

    pub fn state(&self) -> State {
        State::from_probabilities(&self.p).expect("validated distribution")
    }

    /// Probability of a local string.
    pub fn string_prob(&self, locals: &[usize]) -> Q {
        locals.iter().map(|&i| &self.p[i]).product()
    }

    /// Type classes of length-`n` strings over the nonzero symbols, sorted by
    /// string probability descending (ties by counts, lexicographically
    /// descending).
    pub fn type_classes(&self, n: usize) -> Vec<TypeClass> {
        let g = self.groups.len();
        let mut out = Vec::new();
        let mut counts = vec![0usize; g];
        compositions(n, 0, &mut counts, &mut |c| {
            let prob = c
                .iter()
                .zip(&self.groups)
                .map(|(&k, grp)| num_traits::pow(grp.prob.clone(), k))
                .product();
            let mut strings = multinomial(c);
            for (&k, grp) in c.iter().zip(&self.groups) {
                strings *= num_traits::pow(BigUint::from(grp.symbols.len()), k);
            }
            out.push(TypeClass {
                counts: c.to_vec(),
                prob,
                strings,
            });
        });
        out.sort_by(|a, b| b.prob.cmp(&a.prob).then_with(|| b.counts.cmp(&a.counts)));
        out
    }
}

fn compositions(n: usize, k: usize, counts: &mut [usize], f: &mut dyn FnMut(&[usize])) {
    if k + 1 == counts.len() {
        counts[k] = n;
        f(counts);
        return;
    }
    for c in (0..=n).rev() {
        counts[k] = c;
        compositions(n - c, k + 1, counts, f);
    }
}

/// `(Σ c)! / Π c!`.
pub fn multinomial(counts: &[usize]) -> BigUint {
    let mut result = BigUint::one();
    let mut total = 0u64;
    for &c in counts {
        for j in 1..=c as u64 {
            total += 1;
            result = result * BigUint::from(total) / BigUint::from(j);
        }
    }
    result
}

/// Number of message entries `D_A^N 2^{N-1}`, if it fits.
pub fn message_entries(d: usize, n: usize) -> Option<u128> {
    (d as u128)
        .checked_pow(n as u32)?
        .checked_mul(1u128.checked_shl(n.checked_sub(1)? as u32)?)
}

pub(crate) fn check_memory(d: usize, n: usize, bound: u128) -> Result<u128> {
    match message_entries(d, n) {
        Some(e) if e <= bound => Ok(e),
        other => Err(BctError::MemoryBound {
            entries: other.unwrap_or(u128::MAX),
            bound,
        }),
    }
}

/// `ρ^{⊠N}`: weight `p_i 2^{-(N-1)}` on every `(i, s)`, left-nested.
pub fn message_distribution(rho: &State, n: usize) -> Result<State> {
    message_distribution_bounded(rho, n, DEFAULT_MEMORY_BOUND)
}

pub fn message_distribution_bounded(rho: &State, n: usize, bound: u128) -> Result<State> {
    if n == 0 {
        return Err(BctError::InvalidParameter("N must be at least 1".into()));
    }
    if !rho.is_deterministic() {
        return Err(BctError::NotDeterministic(format_rational(&rho.total())));
    }
    if rho.shape().len() != 1 {
        return Err(BctError::InvalidShape(format!(
            "messages are built from a single-system state, got {}",
            rho.shape()
        )));
    }
    let d = rho.shape().factors()[0];
    check_memory(d, n, bound)?;
    let mut msg = rho.clone();
    for _ in 1..n {
        msg = compose_states(&msg, rho);
    }
    Ok(msg)
}

/// Shape `A^{⊠N}` for a source of size `d`.
pub fn message_shape(d: usize, n: usize) -> Result<SystemShape> {
    SystemShape::repeated(d, n)
}

/// Weight of each message entry for a class: `prob · 2^{-(N-1)}`.
pub fn entry_weight(class: &TypeClass, n: usize) -> Q {
    &class.prob * inv_pow2((n - 1) as u32)
}

/// Total mass carried by a set of classes.
pub fn class_mass<'a, I: IntoIterator<Item = &'a TypeClass>>(classes: I) -> Q {
    classes
        .into_iter()
        .fold(Q::zero(), |acc, c| acc + &c.prob * from_biguint(&c.strings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opt::PureIndex;
    use crate::rational::q;

    #[test]
    fn grouping_and_classes() {
        let s = Source::new(vec![q(1, 4), q(1, 2), q(1, 4), Q::zero()]).unwrap();
        assert_eq!(s.groups().len(), 2);
        assert_eq!(s.groups()[0].symbols, vec![1]);
        assert_eq!(s.groups()[1].symbols, vec![0, 2]);
        assert_eq!(s.group_of(3), None);
        let classes = s.type_classes(3);
        assert_eq!(classes.len(), 4);
        let strings: BigUint = classes.iter().map(|c| c.strings.clone()).sum();
        assert_eq!(strings, BigUint::from(27u32));
        assert_eq!(class_mass(&classes), Q::one());
        assert!(classes.windows(2).all(|w| w[0].prob >= w[1].prob));
    }

    #[test]
    fn rejects_bad_sources() {
        assert!(Source::new(vec![q(1, 2), q(1, 4)]).is_err());
        assert!(Source::new(vec![q(3, 2), q(-1, 2)]).is_err());
        assert!(Source::new(vec![Q::one()]).is_err());
    }

    #[test]
    fn multinomial_values() {
        assert_eq!(multinomial(&[2, 1]), BigUint::from(3u32));
        assert_eq!(multinomial(&[3, 3, 2]), BigUint::from(560u32));
        assert_eq!(multinomial(&[0, 0]), BigUint::one());
    }

    #[test]
    fn message_examples() {
        let rho = State::from_probabilities(&[q(1, 2), q(1, 2)]).unwrap();
        assert_eq!(message_distribution(&rho, 1).unwrap(), rho);
        let m2 = message_distribution(&rho, 2).unwrap();
        assert_eq!(m2.support_len(), 8);
        assert!(m2.iter().all(|(_, w)| *w == q(1, 8)));
        assert!(message_distribution(&rho, 0).is_err());
        assert!(matches!(
            message_distribution_bounded(&rho, 10, 1000),
            Err(BctError::MemoryBound { .. })
        ));
    }

    #[test]
    fn message_marginal_is_product() {
        let p = vec![q(1, 6), q(1, 3), q(1, 2)];
        let rho = State::from_probabilities(&p).unwrap();
        let msg = message_distribution(&rho, 3).unwrap();
        let mut marginal = std::collections::BTreeMap::new();
        for (x, w) in msg.iter() {
            *marginal.entry(x.locals().to_vec()).or_insert_with(Q::zero) += w;
        }
        assert_eq!(marginal.len(), 27);
        for (i, w) in marginal {
            let expected: Q = i.iter().map(|&k| &p[k]).product();
            assert_eq!(w, expected);
        }
        let any = PureIndex::all(msg.shape()).next().unwrap();
        assert_eq!(msg.weight(&any), q(1, 6 * 6 * 6 * 4));
    }
}
