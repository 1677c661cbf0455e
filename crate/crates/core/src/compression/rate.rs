//! Minimal fixed-length rates: exact top-K evaluation, rate curves and the
//! information-content estimate.

use std::cmp::Ordering;

use num_bigint::BigUint;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use super::source::{check_memory, entry_weight, message_distribution_bounded, Source, TypeClass};
use crate::opt::{compose_states, PureIndex, State};
use crate::rational::{format_rational, from_biguint, q, to_f64};
use crate::{BctError, Result, Q, DEFAULT_MEMORY_BOUND};

pub fn validate_epsilon(eps: &Q) -> Result<()> {
    if !eps.is_positive() || *eps >= q(2, 1) {
        return Err(BctError::InvalidParameter(format!(
            "ε must lie in (0, 2), got {}",
            format_rational(eps)
        )));
    }
    Ok(())
}

/// Retained mass a point-mass codec needs for `D̃ < ε`: strictly more than
/// `1 - ε/2`.
pub fn mass_threshold(eps: &Q) -> Q {
    Q::one() - eps / q(2, 1)
}

/// `D_{B^{⊠M}} = 2^{2M-1}` codewords.
pub fn codewords(m: u32) -> BigUint {
    assert!(m >= 1, "at least one bibit");
    BigUint::one() << (2 * m - 1)
}

/// Sum of the `k` largest weights of `ρ^{⊠N}`.
pub fn top_k_mass(source: &Source, n: usize, k: &BigUint) -> Q {
    top_k_from_classes(&source.type_classes(n), n, k)
}

/// Top-K mass over classes already sorted by probability descending.
pub fn top_k_from_classes(classes: &[TypeClass], n: usize, k: &BigUint) -> Q {
    let mut remaining = k.clone();
    let mut mass = Q::zero();
    for class in classes {
        if remaining.is_zero() {
            break;
        }
        let entries = &class.strings << (n - 1);
        let take = if entries < remaining { entries } else { remaining.clone() };
        mass += entry_weight(class, n) * from_biguint(&take);
        remaining -= take;
    }
    mass
}

/// Message entries sorted by weight descending, ties by canonical index
/// ascending.
pub fn sorted_message(p: &[Q], n: usize) -> Result<Vec<(PureIndex, Q)>> {
    sorted_message_bounded(p, n, DEFAULT_MEMORY_BOUND)
}

pub fn sorted_message_bounded(p: &[Q], n: usize, bound: u128) -> Result<Vec<(PureIndex, Q)>> {
    let rho = Source::new(p.to_vec())?.state();
    let msg = message_distribution_bounded(&rho, n, bound)?;
    let mut entries: Vec<(PureIndex, Q)> = msg.iter().map(|(x, w)| (x.clone(), w.clone())).collect();
    // The state is stored in canonical order, so a stable sort keeps the tie
    // rule.
    entries.sort_by(|a, b| b.1.cmp(&a.1));
    Ok(entries)
}

/// [`top_k_mass`] by explicit enumeration of the message weights.
pub fn top_k_mass_enumerated(p: &[Q], n: usize, k: u128) -> Result<Q> {
    let entries = sorted_message(p, n)?;
    Ok(entries
        .iter()
        .take(usize::try_from(k).unwrap_or(usize::MAX))
        .map(|(_, w)| w)
        .sum())
}

/// Least `M ≥ 1` whose `2^{2M-1}` codewords can retain more than `1 - ε/2`
/// of the mass of `ρ^{⊠N}`.
pub fn exact_rate(p: &[Q], n: usize, eps: &Q) -> Result<u32> {
    exact_rate_source(&Source::new(p.to_vec())?, n, eps)
}

pub fn exact_rate_source(source: &Source, n: usize, eps: &Q) -> Result<u32> {
    if n == 0 {
        return Err(BctError::InvalidParameter("N must be at least 1".into()));
    }
    validate_epsilon(eps)?;
    let threshold = mass_threshold(eps);
    let classes = source.type_classes(n);
    let mut m = 1u32;
    loop {
        if top_k_from_classes(&classes, n, &codewords(m)) > threshold {
            return Ok(m);
        }
        m += 1;
    }
}

/// [`exact_rate`] over the explicitly enumerated message; refuses sizes
/// above the memory bound.
pub fn exact_rate_enumerated(p: &[Q], n: usize, eps: &Q) -> Result<u32> {
    validate_epsilon(eps)?;
    let entries = sorted_message(p, n)?;
    let threshold = mass_threshold(eps);
    let mut mass = Q::zero();
    let mut taken = 0u128;
    let mut m = 1u32;
    let mut iter = entries.iter();
    loop {
        let k = 1u128 << (2 * m - 1);
        while taken < k {
            match iter.next() {
                Some((_, w)) => {
                    mass += w;
                    taken += 1;
                }
                None => break,
            }
        }
        if mass > threshold {
            return Ok(m);
        }
        m += 1;
    }
}

/// The `k` entries a top-K codec retains, in the tie-broken order.
pub fn top_k_strings(p: &[Q], n: usize, k: usize) -> Result<Vec<PureIndex>> {
    Ok(sorted_message(p, n)?
        .into_iter()
        .take(k)
        .map(|(x, _)| x)
        .collect())
}

/// Lower bound on `M_min`: `K w_max ≥ top-K mass > 1 - ε/2` forces
/// `M > (log2((1 - ε/2)/w_max) + 1)/2` with `w_max = p_max^N 2^{-(N-1)}`.
pub fn converse_bound(source: &Source, n: usize, eps: &Q) -> f64 {
    let w_max_log = n as f64 * to_f64(source.max_prob()).log2() - (n as f64 - 1.0);
    ((to_f64(&mass_threshold(eps))).log2() - w_max_log + 1.0) / 2.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatePoint {
    pub n: usize,
    pub m_min: u32,
    pub rate: f64,
    /// `M_min - target·N` over `N`, i.e. `rate - target`.
    pub gap: f64,
    pub converse: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateCurve {
    pub epsilon: Q,
    /// `(H(p) + 1) / 2`.
    pub target: f64,
    pub points: Vec<RatePoint>,
    /// Largest rate over the upper half of the computed window; finite-N
    /// evidence for the limsup, not the limit itself.
    pub limit_estimate: f64,
    pub deviation: f64,
}

impl RateCurve {
    pub fn point(&self, n: usize) -> Option<&RatePoint> {
        self.points.iter().find(|p| p.n == n)
    }
}

pub fn rate_curve(source: &Source, eps: &Q, ns: &[usize]) -> Result<RateCurve> {
    validate_epsilon(eps)?;
    if ns.is_empty() {
        return Err(BctError::InvalidParameter("empty N range".into()));
    }
    let target = source.information_content();
    let points = ns
        .par_iter()
        .map(|&n| {
            let m_min = exact_rate_source(source, n, eps)?;
            let rate = m_min as f64 / n as f64;
            Ok(RatePoint {
                n,
                m_min,
                rate,
                gap: rate - target,
                converse: converse_bound(source, n, eps),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let n_max = *ns.iter().max().expect("nonempty");
    let limit_estimate = points
        .iter()
        .filter(|p| 2 * p.n > n_max)
        .map(|p| p.rate)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(RateCurve {
        epsilon: eps.clone(),
        target,
        points,
        limit_estimate,
        deviation: limit_estimate - target,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct InfoContentReport {
    pub entropy: f64,
    pub target: f64,
    pub curves: Vec<RateCurve>,
}

impl InfoContentReport {
    /// Tightest per-ε estimate.
    pub fn best_estimate(&self) -> f64 {
        self.curves
            .iter()
            .map(|c| c.limit_estimate)
            .min_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal))
            .unwrap_or(f64::NAN)
    }
}

/// Rate curves over `N = 1..=n_max` for every ε in the grid.
pub fn info_content_estimate(p: &[Q], eps_grid: &[Q], n_max: usize) -> Result<InfoContentReport> {
    let source = Source::new(p.to_vec())?;
    if n_max == 0 {
        return Err(BctError::InvalidParameter("N_max must be at least 1".into()));
    }
    let ns: Vec<usize> = (1..=n_max).collect();
    let curves = eps_grid
        .iter()
        .map(|eps| rate_curve(&source, eps, &ns))
        .collect::<Result<Vec<_>>>()?;
    Ok(InfoContentReport {
        entropy: source.entropy(),
        target: source.information_content(),
        curves,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdditivityReport {
    /// Weights `½ p_i q_j` of `ρ ⊠ σ` in canonical order.
    pub composite: Vec<Q>,
    /// `(H(p)+1)/2 + (H(q)+1)/2`.
    pub target_sum: f64,
    /// `(H(r)+1)/2` for the composite distribution `r`.
    pub composite_target: f64,
    pub curve: RateCurve,
}

pub fn additivity_check(p: &[Q], q_dist: &[Q], n_max: usize, eps: &Q) -> Result<AdditivityReport> {
    let a = Source::new(p.to_vec())?;
    let b = Source::new(q_dist.to_vec())?;
    let joint: State = compose_states(&a.state(), &b.state());
    let composite = joint.dense();
    let source = Source::new(composite.clone())?;
    let ns: Vec<usize> = (1..=n_max.max(1)).collect();
    let curve = rate_curve(&source, eps, &ns)?;
    Ok(AdditivityReport {
        composite,
        target_sum: a.information_content() + b.information_content(),
        composite_target: source.information_content(),
        curve,
    })
}

/// Sizes refused by the explicit paths.
pub fn enumerable(d: usize, n: usize) -> bool {
    check_memory(d, n, DEFAULT_MEMORY_BOUND).is_ok()
}

/// `M_min / N` as an exact ratio.
pub fn rate_ratio(m: u32, n: usize) -> Q {
    q(m as i64, n as i64)
}

/// Number of codewords as `u128`, when it fits.
pub fn codewords_u128(m: u32) -> Option<u128> {
    codewords(m).to_u128()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_source_example() {
        let p = [Q::one(), Q::zero()];
        assert_eq!(exact_rate(&p, 4, &q(1, 10)).unwrap(), 2);
        for n in 1..=18 {
            assert_eq!(exact_rate(&p, n, &q(1, 10)).unwrap() as usize, n.div_ceil(2));
        }
    }

    #[test]
    fn uniform_source_rate_one() {
        let p = [q(1, 2), q(1, 2)];
        for n in 1..=10 {
            for eps in [q(1, 2), q(1, 10), q(1, 50)] {
                assert_eq!(exact_rate(&p, n, &eps).unwrap() as usize, n);
            }
        }
    }

    #[test]
    fn type_classes_match_enumeration() {
        let sources = [
            vec![q(3, 4), q(1, 4)],
            vec![q(1, 2), q(1, 3), q(1, 6)],
            vec![q(1, 4), q(1, 4), q(1, 2), Q::zero()],
        ];
        for p in &sources {
            let s = Source::new(p.clone()).unwrap();
            for n in 1..=5 {
                for k in [1u128, 2, 7, 8, 32, 100] {
                    assert_eq!(
                        top_k_mass(&s, n, &BigUint::from(k)),
                        top_k_mass_enumerated(p, n, k).unwrap()
                    );
                }
                for eps in [q(1, 5), q(3, 5), q(1, 1), q(1, 50)] {
                    assert_eq!(
                        exact_rate(p, n, &eps).unwrap(),
                        exact_rate_enumerated(p, n, &eps).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn strict_threshold() {
        // (1,0) at N = 1: one entry of weight 1 in 2 codewords, any ε works.
        assert_eq!(exact_rate(&[Q::one(), Q::zero()], 1, &q(1, 100)).unwrap(), 1);
        // Uniform bit at N = 1, M = 1 keeps everything.
        assert_eq!(exact_rate(&[q(1, 2), q(1, 2)], 1, &q(1, 2)).unwrap(), 1);
        // N = 2 uniform: 8 entries of 1/8; M = 1 keeps 1/4, needing ε > 3/2.
        assert_eq!(exact_rate(&[q(1, 2), q(1, 2)], 2, &q(3, 2)).unwrap(), 2);
        assert_eq!(exact_rate(&[q(1, 2), q(1, 2)], 2, &q(7, 4)).unwrap(), 1);
    }

    #[test]
    fn epsilon_validation() {
        let p = [q(1, 2), q(1, 2)];
        assert!(exact_rate(&p, 2, &Q::zero()).is_err());
        assert!(exact_rate(&p, 2, &q(2, 1)).is_err());
        assert!(exact_rate(&p, 0, &q(1, 2)).is_err());
    }

    #[test]
    fn tie_break_is_canonical() {
        let top = top_k_strings(&[q(1, 2), q(1, 2)], 2, 3).unwrap();
        let shape = super::super::source::message_shape(2, 2).unwrap();
        let ranks: Vec<u128> = top.iter().map(|x| x.rank(&shape)).collect();
        assert_eq!(ranks, vec![0, 1, 2]);
    }

    #[test]
    fn info_content_examples() {
        let r = info_content_estimate(&[q(1, 2), q(1, 2)], &[q(1, 10)], 8).unwrap();
        assert_eq!(r.curves[0].limit_estimate, 1.0);
        let r = info_content_estimate(&[Q::one(), Q::zero()], &[q(1, 10)], 16).unwrap();
        assert!((r.target - 0.5).abs() < 1e-12);
        assert!(r.best_estimate() - 0.5 <= 1.0 / 9.0 + 1e-12);
        for point in &r.curves[0].points {
            assert!(point.m_min as f64 >= point.converse - 1e-9);
        }
    }

    #[test]
    fn additivity_targets() {
        let pure = [Q::one(), Q::zero()];
        let uniform = [q(1, 2), q(1, 2)];
        let r = additivity_check(&pure, &pure, 6, &q(1, 10)).unwrap();
        assert!((r.target_sum - 1.0).abs() < 1e-12);
        assert!((r.composite_target - r.target_sum).abs() < 1e-12);
        let r = additivity_check(&uniform, &uniform, 6, &q(1, 10)).unwrap();
        assert!((r.target_sum - 2.0).abs() < 1e-12);
        assert_eq!(r.curve.limit_estimate, 2.0);
        let r = additivity_check(&pure, &uniform, 6, &q(1, 10)).unwrap();
        assert!((r.composite_target - 1.5).abs() < 1e-12);
        assert_eq!(r.composite.len(), 8);
    }
}
