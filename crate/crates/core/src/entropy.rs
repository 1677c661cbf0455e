//! Shannon entropy and the measurement (S1), hybrid (S2) and preparation
//! (S3) entropies of a state, with their regularizations.
//!
//! In a simplicial theory atomic effects are multiples of vertex effects, so
//! an atomic observation test is described by how each vertex's unit of the
//! deterministic effect is split. All three entropies reduce to the Shannon
//! entropy of the unique pure decomposition; the oracles below search tests
//! explicitly and serve as falsifiers of that closed form.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use rand::Rng;
use rayon::prelude::*;

use crate::opt::{compose_states, Effect, ObservationTest, PureIndex, State, SystemShape};
use crate::rational::{format_rational, to_f64};
use crate::sample;
use crate::{BctError, Result, Q, DEFAULT_MEMORY_BOUND, DEFAULT_ORACLE_BOUND, TOLERANCE};

/// Base-2 Shannon entropy of an exactly normalized distribution.
pub fn shannon(p: &[Q]) -> Result<f64> {
    if p.iter().any(|x| x.is_negative()) {
        return Err(BctError::InvalidDistribution("negative entry".into()));
    }
    let total: Q = p.iter().sum();
    if !total.is_one() {
        return Err(BctError::InvalidDistribution(format!(
            "entries sum to {}",
            format_rational(&total)
        )));
    }
    Ok(entropy_bits(p.iter().map(to_f64)))
}

/// `-Σ x log2 x` with `0 log 0 = 0`; no normalization check.
pub fn entropy_bits<I: IntoIterator<Item = f64>>(p: I) -> f64 {
    p.into_iter()
        .filter(|&x| x > 0.0)
        .map(|x| -x * x.log2())
        .sum()
}

/// Which of the three entropies a computation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EntropyKind {
    /// S1: infimum of the outcome entropy over atomic observation tests.
    Measurement,
    /// S2: supremum of the mutual information between decomposition and
    /// outcome.
    Hybrid,
    /// S3: infimum of the entropy of pure decompositions.
    Preparation,
}

impl EntropyKind {
    pub const ALL: [EntropyKind; 3] = [
        EntropyKind::Measurement,
        EntropyKind::Hybrid,
        EntropyKind::Preparation,
    ];

    pub fn from_number(which: u8) -> Result<Self> {
        match which {
            1 => Ok(EntropyKind::Measurement),
            2 => Ok(EntropyKind::Hybrid),
            3 => Ok(EntropyKind::Preparation),
            _ => Err(BctError::InvalidParameter(format!(
                "entropy selector must be 1, 2 or 3, got {which}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyReport {
    pub h: f64,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    /// `S_i(ρ^{⊠N}) / N` for `N = 1..=n_max`.
    pub sreg_at_n: BTreeMap<usize, f64>,
    /// The `N → ∞` value `H + 1`.
    pub sreg_limit: f64,
    pub tolerance: f64,
}

/// Closed forms: `S1 = S2 = S3 = H(p)` and `S_i(ρ^{⊠N})/N = H + 1 - 1/N`,
/// treating `ρ` as a state of the unique system of its size.
pub fn entropies_closed_form(rho: &State, n_max: usize) -> Result<EntropyReport> {
    let h = shannon(&rho.weight_vector())?;
    let sreg_at_n = (1..=n_max)
        .map(|n| (n, h + 1.0 - 1.0 / n as f64))
        .collect();
    Ok(EntropyReport {
        h,
        s1: h,
        s2: h,
        s3: h,
        sreg_at_n,
        sreg_limit: h + 1.0,
        tolerance: TOLERANCE,
    })
}

/// Atomic observation test: for each pure index (canonical order) the
/// fractions its vertex effect is split into.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomicTest {
    splits: Vec<Vec<Q>>,
}

impl AtomicTest {
    pub fn new(shape: &SystemShape, splits: Vec<Vec<Q>>) -> Result<Self> {
        if splits.len() as u128 != shape.size() {
            return Err(BctError::InvalidParameter(format!(
                "{} vertex splits for a system of size {}",
                splits.len(),
                shape.size()
            )));
        }
        for (k, parts) in splits.iter().enumerate() {
            let total: Q = parts.iter().sum();
            if parts.is_empty() || !total.is_one() || parts.iter().any(|x| !x.is_positive()) {
                return Err(BctError::InvalidParameter(format!(
                    "vertex {k} split is not a positive partition of one"
                )));
            }
        }
        Ok(Self { splits })
    }

    /// The perfectly discriminating test.
    pub fn perfect(shape: &SystemShape) -> Self {
        Self {
            splits: vec![vec![Q::one()]; shape.size() as usize],
        }
    }

    /// Random refinement with up to `max_parts` outcomes per vertex.
    pub fn random<R: Rng>(rng: &mut R, shape: &SystemShape, max_parts: usize) -> Self {
        let splits = (0..shape.size())
            .map(|_| {
                let parts = rng.gen_range(1..=max_parts.max(1));
                sample::distribution(rng, parts)
            })
            .collect();
        Self { splits }
    }

    pub fn to_test(&self, shape: &SystemShape) -> ObservationTest {
        let effects = PureIndex::all(shape)
            .zip(&self.splits)
            .flat_map(|(x, parts)| {
                parts.iter().map(move |lambda| {
                    Effect::atomic(shape.clone(), x.clone(), lambda.clone()).expect("λ in (0, 1]")
                })
            })
            .collect();
        ObservationTest::new(effects).expect("splits partition the deterministic effect")
    }
}

/// `H(J)` for the outcome `J` of `test` on `rho`.
pub fn outcome_entropy(rho: &State, test: &ObservationTest) -> f64 {
    entropy_bits(test.probabilities(rho).iter().map(to_f64))
}

/// `H(I:J)` for `q(i, j) = p_i (a_j | φ_i)` with `(p_i, φ_i)` the pure
/// decomposition of `rho`.
pub fn mutual_information(rho: &State, test: &ObservationTest) -> f64 {
    let mut joint = Vec::new();
    let mut outcome = vec![Q::zero(); test.effects().len()];
    for (x, p) in rho.iter() {
        for (j, e) in test.effects().iter().enumerate() {
            let q = p * e.value(x);
            outcome[j] += &q;
            joint.push(q);
        }
    }
    let hx = entropy_bits(rho.iter().map(|(_, p)| to_f64(p)));
    let hj = entropy_bits(outcome.iter().map(to_f64));
    let hxj = entropy_bits(joint.iter().map(to_f64));
    hx + hj - hxj
}

/// Random-search budget for the entropy oracles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBudget {
    /// Random atomic tests tried besides the perfect one.
    pub candidates: usize,
    pub max_parts: usize,
    pub seed: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            candidates: 100,
            max_parts: 4,
            seed: 0,
        }
    }
}

/// Result of a finite test search. `best` is the best value found, never a
/// certified optimum.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleOutcome {
    pub best: f64,
    pub perfect_test: f64,
    /// Values of the random candidates, in generation order.
    pub samples: Vec<f64>,
}

fn search<F>(rho: &State, budget: SearchBudget, score: F, minimize: bool) -> Result<OracleOutcome>
where
    F: Fn(&State, &ObservationTest) -> f64 + Sync,
{
    let shape = rho.shape();
    if shape.size() > DEFAULT_ORACLE_BOUND {
        return Err(BctError::OracleBound {
            size: shape.size(),
            bound: DEFAULT_ORACLE_BOUND,
        });
    }
    if !rho.is_deterministic() {
        return Err(BctError::NotDeterministic(format_rational(&rho.total())));
    }
    let mut rng = sample::rng(budget.seed);
    let tests: Vec<AtomicTest> = (0..budget.candidates)
        .map(|_| AtomicTest::random(&mut rng, shape, budget.max_parts))
        .collect();
    let perfect_test = score(rho, &AtomicTest::perfect(shape).to_test(shape));
    let samples: Vec<f64> = tests
        .par_iter()
        .map(|t| score(rho, &t.to_test(shape)))
        .collect();
    let best = samples.iter().copied().fold(perfect_test, |acc, v| {
        if minimize {
            acc.min(v)
        } else {
            acc.max(v)
        }
    });
    Ok(OracleOutcome {
        best,
        perfect_test,
        samples,
    })
}

/// S1 by search: minimizes `H(J)` over the perfect test and random atomic
/// refinements of it.
pub fn s1_oracle(rho: &State, budget: SearchBudget) -> Result<OracleOutcome> {
    search(rho, budget, outcome_entropy, true)
}

/// S2 by search: maximizes `H(I:J)` over the same family.
pub fn s2_oracle(rho: &State, budget: SearchBudget) -> Result<OracleOutcome> {
    search(rho, budget, mutual_information, false)
}

/// S3: the simplex decomposition is unique, so the infimum is the entropy of
/// the weights.
pub fn s3(rho: &State) -> Result<f64> {
    shannon(&rho.weight_vector())
}

/// `S_i(ρ^{⊠N}) / N` for a single-system source `p`, computed both from the
/// closed form `H + 1 - 1/N` and directly from the message weights; errors
/// if the two disagree beyond [`TOLERANCE`].
pub fn s_reg(p: &[Q], n: usize, which: EntropyKind) -> Result<f64> {
    if n == 0 {
        return Err(BctError::InvalidParameter("N must be at least 1".into()));
    }
    let h = shannon(p)?;
    let closed = h + 1.0 - 1.0 / n as f64;
    let direct = message_entropy_direct(p, n, which)? / n as f64;
    if (closed - direct).abs() > TOLERANCE {
        return Err(BctError::Disagreement {
            what: format!("S_{which:?}(ρ^⊠{n})/{n}"),
            left: closed.to_string(),
            right: direct.to_string(),
        });
    }
    Ok(direct)
}

/// Entropy of `ρ^{⊠N}` from its weights `p_i 2^{-(N-1)}`, streamed over the
/// local strings. Each local string carries `2^{N-1}` equal sign-string
/// weights.
fn message_entropy_direct(p: &[Q], n: usize, which: EntropyKind) -> Result<f64> {
    let d = p.len() as u128;
    let strings = d
        .checked_pow(n as u32)
        .filter(|&c| c <= DEFAULT_MEMORY_BOUND)
        .ok_or(BctError::MemoryBound {
            entries: d.saturating_pow(n as u32),
            bound: DEFAULT_MEMORY_BOUND,
        })?;
    let pf: Vec<f64> = p.iter().map(to_f64).collect();
    let multiplicity = (1u64 << (n - 1)) as f64;
    let term = |rank: u128| -> f64 {
        let mut r = rank;
        let mut prob = 1.0;
        for _ in 0..n {
            prob *= pf[(r % d) as usize];
            r /= d;
        }
        if prob == 0.0 {
            return 0.0;
        }
        let w = prob / multiplicity;
        -multiplicity * w * w.log2()
    };
    let h_weights: f64 = (0..strings).into_par_iter().map(term).sum();
    // The optimal test is the perfect one for every kind; its joint
    // distribution with the decomposition is diagonal, so H(I:J) = H(J).
    let _ = which;
    Ok(h_weights)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuperadditivityReport {
    /// `S(|i)) + S(|j))`.
    pub s_parts: f64,
    /// `S(Σ)` for `Σ = |i) ⊠ |j)`.
    pub s_sigma: f64,
    /// `S(Σ ⊠ Σ)`.
    pub s_sigma2: f64,
    /// `S(Σ^{⊠2^k}) / 2^k` for `k = 0..=doublings`.
    pub doubling_ratios: Vec<f64>,
    pub strict_superadditivity: bool,
    pub additivity_violated: bool,
    pub doubling_nondecreasing: bool,
}

/// Builds `Σ = |i) ⊠ |j)` for pure `i` on `a` and `j` on `b` and measures
/// the entropy growth under repeated doubling.
pub fn superadditivity_witness(
    a: &SystemShape,
    i: &PureIndex,
    b: &SystemShape,
    j: &PureIndex,
    doublings: usize,
) -> Result<SuperadditivityReport> {
    let left = State::pure(a.clone(), i.clone())?;
    let right = State::pure(b.clone(), j.clone())?;
    let s_parts = s3(&left)? + s3(&right)?;
    let sigma = compose_states(&left, &right);
    let mut ratios = vec![s3(&sigma)?];
    let mut power = sigma.clone();
    for k in 1..=doublings.max(1) {
        power = compose_states(&power, &power);
        ratios.push(s3(&power)? / (1u64 << k) as f64);
    }
    let s_sigma = ratios[0];
    let s_sigma2 = 2.0 * ratios[1];
    let doubling_nondecreasing = ratios.windows(2).all(|w| w[1] >= w[0] - TOLERANCE);
    ratios.truncate(doublings + 1);
    Ok(SuperadditivityReport {
        s_parts,
        s_sigma,
        s_sigma2,
        strict_superadditivity: s_sigma2 > 2.0 * s_sigma + TOLERANCE,
        additivity_violated: s_sigma > s_parts + TOLERANCE,
        doubling_nondecreasing,
        doubling_ratios: ratios,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= TOLERANCE
    }

    #[test]
    fn shannon_examples() {
        assert!(close(shannon(&[q(1, 2), q(1, 2)]).unwrap(), 1.0));
        assert!(close(shannon(&[q(1, 1), Q::zero()]).unwrap(), 0.0));
        let h = shannon(&[q(9, 10), q(1, 10)]).unwrap();
        assert!((h - 0.4690).abs() < 1e-4);
        assert!(shannon(&[q(1, 2), q(1, 4)]).is_err());
        assert!(shannon(&[q(3, 2), q(-1, 2)]).is_err());
    }

    #[test]
    fn closed_forms() {
        let rho = State::from_probabilities(&[q(1, 2), q(1, 2)]).unwrap();
        let r = entropies_closed_form(&rho, 4).unwrap();
        assert!(close(r.s1, 1.0) && close(r.s2, 1.0) && close(r.s3, 1.0));
        assert!(close(r.sreg_at_n[&4], 1.75));
        assert!(close(r.sreg_limit, 2.0));

        let bit = SystemShape::elementary(2).unwrap();
        let pure = State::pure(bit.clone(), PureIndex::single(1)).unwrap();
        assert!(close(entropies_closed_form(&pure, 1).unwrap().h, 0.0));

        let product = compose_states(&pure, &pure);
        assert!(close(entropies_closed_form(&product, 1).unwrap().s3, 1.0));
    }

    #[test]
    fn oracles_bracket_closed_form() {
        let rho = State::from_probabilities(&[q(1, 6), q(1, 3), q(1, 2)]).unwrap();
        let h = s3(&rho).unwrap();
        let budget = SearchBudget {
            candidates: 100,
            max_parts: 4,
            seed: 3,
        };
        let s1 = s1_oracle(&rho, budget).unwrap();
        assert!(close(s1.perfect_test, h));
        assert!(close(s1.best, h));
        assert!(s1.samples.iter().all(|&v| v >= h - TOLERANCE));
        let s2 = s2_oracle(&rho, budget).unwrap();
        assert!(close(s2.perfect_test, h));
        assert!(close(s2.best, h));
        assert!(s2.samples.iter().all(|&v| v <= h + TOLERANCE));
    }

    #[test]
    fn constant_test_carries_no_information() {
        let rho = State::from_probabilities(&[q(1, 6), q(1, 3), q(1, 2)]).unwrap();
        let constant = ObservationTest::new(vec![Effect::deterministic(rho.shape().clone())]).unwrap();
        assert!(close(mutual_information(&rho, &constant), 0.0));
        assert!(!constant.is_atomic());
    }

    #[test]
    fn pure_state_oracles_vanish() {
        let bit = SystemShape::elementary(2).unwrap();
        let pure = State::pure(bit, PureIndex::single(0)).unwrap();
        let out = s1_oracle(&pure, SearchBudget::default()).unwrap();
        assert!(close(out.best, 0.0));
    }

    #[test]
    fn regularized_entropy_two_paths() {
        let p = [q(1, 2), q(1, 2)];
        assert!(close(s_reg(&p, 4, EntropyKind::Measurement).unwrap(), 1.75));
        let p = [q(1, 5), q(4, 5)];
        let h = shannon(&p).unwrap();
        for which in EntropyKind::ALL {
            assert!(close(s_reg(&p, 1, which).unwrap(), h));
        }
        assert!(s_reg(&p, 0, EntropyKind::Hybrid).is_err());
    }

    #[test]
    fn direct_path_matches_materialized_message() {
        let p = [q(1, 3), q(1, 6), q(1, 2)];
        let rho = State::from_probabilities(&p).unwrap();
        let mut msg = rho.clone();
        for n in 2..=4 {
            msg = compose_states(&msg, &rho);
            let direct = message_entropy_direct(&p, n, EntropyKind::Preparation).unwrap();
            assert!(close(s3(&msg).unwrap(), direct));
        }
    }

    #[test]
    fn superadditivity_for_bits() {
        let bit = SystemShape::elementary(2).unwrap();
        let r = superadditivity_witness(&bit, &PureIndex::single(0), &bit, &PureIndex::single(1), 3)
            .unwrap();
        assert!(close(r.s_sigma, 1.0));
        assert!(close(r.s_sigma2, 3.0));
        assert!(r.strict_superadditivity && r.additivity_violated && r.doubling_nondecreasing);
        let expected = [1.0, 1.5, 1.75, 1.875];
        for (a, b) in r.doubling_ratios.iter().zip(expected) {
            assert!(close(*a, b));
        }
    }

    #[test]
    fn atomic_test_validation() {
        let bit = SystemShape::elementary(2).unwrap();
        assert!(AtomicTest::new(&bit, vec![vec![Q::one()]]).is_err());
        assert!(AtomicTest::new(&bit, vec![vec![q(1, 2), q(1, 2)], vec![Q::one()]]).is_ok());
        assert!(AtomicTest::new(&bit, vec![vec![q(1, 2)], vec![Q::one()]]).is_err());
        assert!(AtomicTest::perfect(&bit).to_test(&bit).is_atomic());
    }
}
