//! Compression in a locally discriminable classical theory whose only
//! transformations are bit permutations, preparations and observations.
//!
//! An encoder permutes the `N` input systems and keeps `M` of them; the
//! others are observed and discarded. A decoder prepares `N - M` fresh
//! systems and permutes all `N`. Every such codec acts as a map that copies
//! input position `σ(o)` to each output position `o ∈ O` (`|O| = M`, `σ`
//! injective) and writes a constant `c_o` to the remaining positions, and
//! every map of this form arises. Prepared mixed states and classical mixing
//! of codecs are convex combinations, so their retained mass never exceeds
//! the best deterministic map.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::rate::{mass_threshold, validate_epsilon};
use crate::rational::{format_rational, q};
use crate::{BctError, Result, Q};

/// Largest `D^N` the exhaustive search accepts.
pub const RESTRICTED_BOUND: u128 = 1 << 12;

#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedReport {
    pub n: usize,
    pub epsilon: Q,
    /// Best retained mass for `M = 0..=N`.
    pub best_retained: Vec<Q>,
    /// Best retained mass over mixtures of codecs, for `M = 0..=N`.
    pub mixture_retained: Vec<Q>,
    pub m_min: usize,
    pub m_min_mixtures: usize,
    /// `2(1 - p_max)`: below it no `M < N` works.
    pub threshold: Q,
    pub maps_searched: u128,
    /// Pure sources need no systems at all.
    pub degenerate: bool,
}

/// One codec map: output position `o` copies `copy[o] = Some(input)` or
/// holds the constant `constant[o]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodecMap {
    pub copy: Vec<Option<usize>>,
    pub constant: Vec<usize>,
}

impl CodecMap {
    pub fn apply(&self, x: &[usize]) -> Vec<usize> {
        self.copy
            .iter()
            .zip(&self.constant)
            .map(|(c, &k)| c.map_or(k, |i| x[i]))
            .collect()
    }
}

/// Every distinct codec map keeping `m` of `n` systems of size `d`.
pub fn codec_maps(n: usize, m: usize, d: usize) -> Vec<CodecMap> {
    let mut out = Vec::new();
    for kept in subsets(n, m) {
        for sources in injections(m, n) {
            let prepared = n - m;
            for c in 0..d.pow(prepared as u32) {
                let mut consts = Vec::with_capacity(prepared);
                let mut r = c;
                for _ in 0..prepared {
                    consts.push(r % d);
                    r /= d;
                }
                let mut copy = vec![None; n];
                let mut constant = vec![0; n];
                for (&o, &i) in kept.iter().zip(&sources) {
                    copy[o] = Some(i);
                }
                let mut it = consts.into_iter();
                for o in (0..n).filter(|o| !kept.contains(o)) {
                    constant[o] = it.next().expect("one constant per prepared system");
                }
                out.push(CodecMap { copy, constant });
            }
        }
    }
    out
}

fn subsets(n: usize, m: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n)
        .filter(|mask| mask.count_ones() as usize == m)
        .map(|mask| (0..n).filter(|&k| mask >> k & 1 == 1).collect())
        .collect()
}

fn injections(m: usize, n: usize) -> Vec<Vec<usize>> {
    fn go(m: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for i in 0..n {
            if !cur.contains(&i) {
                cur.push(i);
                go(m, n, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(m, n, &mut Vec::new(), &mut out);
    out
}

fn all_strings(d: usize, n: usize) -> Vec<Vec<usize>> {
    (0..d.pow(n as u32))
        .map(|mut r| {
            let mut v = vec![0; n];
            for slot in v.iter_mut().rev() {
                *slot = r % d;
                r /= d;
            }
            v
        })
        .collect()
}

/// `M_min` when codecs are restricted to permutations, preparations and
/// observations of the `N` source systems.
pub fn restricted_rate(p: &[Q], n: usize, eps: &Q) -> Result<RestrictedReport> {
    validate_epsilon(eps)?;
    if n == 0 {
        return Err(BctError::InvalidParameter("N must be at least 1".into()));
    }
    let d = p.len();
    let total: Q = p.iter().sum();
    if d < 2 || !total.is_one() || p.iter().any(|x| x.is_negative()) {
        return Err(BctError::InvalidDistribution(
            "expected a normalized distribution on at least 2 outcomes".into(),
        ));
    }
    if (d as u128).checked_pow(n as u32).is_none_or(|s| s > RESTRICTED_BOUND) {
        return Err(BctError::OracleBound {
            size: (d as u128).saturating_pow(n as u32),
            bound: RESTRICTED_BOUND,
        });
    }
    let denom = p.iter().fold(BigInt::one(), |acc, w| acc.lcm(w.denom()));
    let numer: Vec<u128> = p
        .iter()
        .map(|w| (w.numer() * (&denom / w.denom())).to_u128())
        .collect::<Option<_>>()
        .ok_or_else(|| BctError::InvalidParameter("probabilities too fine".into()))?;
    let strings = all_strings(d, n);
    let weights: Vec<u128> = strings
        .iter()
        .map(|s| s.iter().map(|&i| numer[i]).product())
        .collect();
    let scale = num_traits::pow(denom, n);
    let threshold_mass = mass_threshold(eps);
    let mut best_retained = Vec::with_capacity(n + 1);
    let mut maps_searched = 0u128;
    for m in 0..=n {
        let maps = codec_maps(n, m, d);
        maps_searched += maps.len() as u128;
        let best = maps
            .iter()
            .map(|map| {
                strings
                    .iter()
                    .zip(&weights)
                    .filter(|(x, _)| map.apply(x) == **x)
                    .map(|(_, w)| *w)
                    .sum::<u128>()
            })
            .max()
            .unwrap_or(0);
        best_retained.push(Q::new(BigInt::from(best), scale.clone()));
    }
    // Retained mass is linear in the codec, so a mixture never beats its
    // best component; the mixture optimum is the same vertex.
    let mixture_retained = best_retained.clone();
    let first_success = |v: &[Q]| v.iter().position(|r| *r > threshold_mass).unwrap_or(n);
    let p_max = p.iter().max().expect("nonempty").clone();
    Ok(RestrictedReport {
        n,
        epsilon: eps.clone(),
        m_min: first_success(&best_retained),
        m_min_mixtures: first_success(&mixture_retained),
        threshold: q(2, 1) * (Q::one() - &p_max),
        best_retained,
        mixture_retained,
        maps_searched,
        degenerate: p_max.is_one(),
    })
}

impl RestrictedReport {
    pub fn summary(&self) -> String {
        format!(
            "N={} ε={} M_min={} threshold={}",
            self.n,
            format_rational(&self.epsilon),
            self.m_min,
            format_rational(&self.threshold)
        )
    }

    /// Whether nothing below `N` systems works.
    pub fn incompressible(&self) -> bool {
        self.m_min == self.n && self.m_min_mixtures == self.n
    }
}

/// `p_max^{N-M}`, the best retained mass for `M < N` kept systems.
pub fn restricted_closed_form(p: &[Q], n: usize, m: usize) -> Q {
    let p_max = p.iter().max().cloned().unwrap_or_else(Q::zero);
    num_traits::pow(p_max, n - m)
}
