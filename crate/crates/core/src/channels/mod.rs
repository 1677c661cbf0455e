//! Deterministic BCT transformations.
//!
//! A channel `A → B` is a family of distributions `λ^{(i)}` over
//! `{1..D_B} × {+,-}`. Next to an ancilla it acts as
//! `(x k)_s ↦ Σ λ^{(x)}_{m,τ} (m k)_{τ s}`. Channels between composite
//! systems are stored flat, indexed by the canonical rank of the pure index.

mod digitizer;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_traits::{One, Signed, Zero};
use rand::Rng;

use crate::opt::{bipartition, join, PureIndex, Side, Sign, State, StateDelta, SystemShape};
use crate::rational::{format_rational, parse_rational};
use crate::sample;
use crate::{BctError, Result, Q};

pub use digitizer::{asymptotic_rate, build_digitizer, digitizer_register_len, Digitizer};

/// One output outcome `(m, τ)` with its probability.
pub type Entry = (usize, Sign, Q);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Channel {
    in_size: usize,
    out_size: usize,
    rows: Vec<Vec<Entry>>,
}

impl Channel {
    /// Validates and canonicalizes rows: duplicates merged, zeros dropped,
    /// entries sorted by `(m, τ)`, each row summing to exactly one.
    pub fn new(in_size: usize, out_size: usize, rows: Vec<Vec<Entry>>) -> Result<Self> {
        if in_size < 2 || out_size < 2 {
            return Err(BctError::InvalidChannel(format!(
                "sizes must be at least 2, got {in_size} -> {out_size}"
            )));
        }
        if rows.len() != in_size {
            return Err(BctError::InvalidChannel(format!(
                "{} rows given for input size {in_size}",
                rows.len()
            )));
        }
        let mut canonical = Vec::with_capacity(in_size);
        for (i, row) in rows.into_iter().enumerate() {
            let mut merged: BTreeMap<(usize, Sign), Q> = BTreeMap::new();
            for (m, tau, p) in row {
                if m >= out_size {
                    return Err(BctError::InvalidChannel(format!(
                        "row {}: output {} exceeds size {out_size}",
                        i + 1,
                        m + 1
                    )));
                }
                if p.is_negative() {
                    return Err(BctError::InvalidChannel(format!("row {}: negative entry", i + 1)));
                }
                *merged.entry((m, tau)).or_insert_with(Q::zero) += p;
            }
            let total: Q = merged.values().sum();
            if !total.is_one() {
                return Err(BctError::InvalidChannel(format!(
                    "row {} sums to {}",
                    i + 1,
                    format_rational(&total)
                )));
            }
            canonical.push(
                merged
                    .into_iter()
                    .filter(|(_, p)| !p.is_zero())
                    .map(|((m, t), p)| (m, t, p))
                    .collect(),
            );
        }
        Ok(Self {
            in_size,
            out_size,
            rows: canonical,
        })
    }

    /// Channel whose row `i` is the point mass on `map(i)`.
    pub fn point_mass<F>(in_size: usize, out_size: usize, map: F) -> Result<Self>
    where
        F: Fn(usize) -> (usize, Sign),
    {
        let rows = (0..in_size)
            .map(|i| {
                let (m, t) = map(i);
                vec![(m, t, Q::one())]
            })
            .collect();
        Self::new(in_size, out_size, rows)
    }

    pub fn identity(size: usize) -> Result<Self> {
        Self::point_mass(size, size, |i| (i, Sign::Plus))
    }

    pub fn sign_flip(size: usize) -> Result<Self> {
        Self::point_mass(size, size, |i| (i, Sign::Minus))
    }

    /// Random channel, entries exact rationals with random support.
    pub fn random<R: Rng>(rng: &mut R, in_size: usize, out_size: usize) -> Result<Self> {
        let rows = (0..in_size)
            .map(|_| {
                let outcomes: Vec<(usize, Sign)> = (0..out_size)
                    .flat_map(|m| Sign::ALL.map(|t| (m, t)))
                    .filter(|_| rng.gen_bool(0.5))
                    .collect();
                let outcomes = if outcomes.is_empty() {
                    vec![(rng.gen_range(0..out_size), sample::sign(rng))]
                } else {
                    outcomes
                };
                let weights = sample::distribution(rng, outcomes.len());
                outcomes
                    .into_iter()
                    .zip(weights)
                    .map(|((m, t), p)| (m, t, p))
                    .collect()
            })
            .collect();
        Self::new(in_size, out_size, rows)
    }

    /// Random permutation of the inputs with random signs.
    pub fn random_reversible<R: Rng>(rng: &mut R, size: usize) -> Result<Self> {
        let mut perm: Vec<usize> = (0..size).collect();
        for k in (1..size).rev() {
            perm.swap(k, rng.gen_range(0..=k));
        }
        let signs: Vec<Sign> = (0..size).map(|_| sample::sign(rng)).collect();
        Self::point_mass(size, size, |i| (perm[i], signs[i]))
    }

    pub fn in_size(&self) -> usize {
        self.in_size
    }

    pub fn out_size(&self) -> usize {
        self.out_size
    }

    pub fn row(&self, i: usize) -> &[Entry] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<Entry>] {
        &self.rows
    }

    /// Probability of `(m, τ)` in row `i`.
    pub fn entry(&self, i: usize, m: usize, tau: Sign) -> Q {
        self.rows[i]
            .iter()
            .find(|(mm, tt, _)| *mm == m && *tt == tau)
            .map(|(_, _, p)| p.clone())
            .unwrap_or_else(Q::zero)
    }

    /// Every row is a point mass and `i ↦ m` is a bijection.
    pub fn is_reversible(&self) -> bool {
        if self.in_size != self.out_size {
            return false;
        }
        let mut hit = vec![false; self.out_size];
        for row in &self.rows {
            match row.as_slice() {
                [(m, _, _)] if !hit[*m] => hit[*m] = true,
                _ => return false,
            }
        }
        true
    }

    /// Action on a bare system: signs are marginalized,
    /// `x ↦ Σ_m (Σ_τ λ^{(x)}_{m,τ}) |m)`.
    pub fn apply_local(&self, rho: &State) -> Result<State> {
        self.check_input(rho.shape())?;
        let mut out: BTreeMap<PureIndex, Q> = BTreeMap::new();
        for (x, w) in rho.iter() {
            for (m, _, p) in &self.rows[x.rank(rho.shape()) as usize] {
                *out.entry(PureIndex::single(*m)).or_insert_with(Q::zero) += w * p;
            }
        }
        State::new(self.output_shape(), out)
    }

    /// Linear extension of [`Self::apply_local`] to signed deltas.
    pub fn apply_local_delta(&self, delta: &StateDelta) -> Result<StateDelta> {
        self.check_input(delta.shape())?;
        let entries: Vec<(PureIndex, Q)> = delta
            .iter()
            .flat_map(|(x, w)| {
                self.rows[x.rank(delta.shape()) as usize]
                    .iter()
                    .map(move |(m, _, p)| (PureIndex::single(*m), w * p))
            })
            .collect();
        StateDelta::new(self.output_shape(), entries)
    }

    /// Applies the channel to one block of a bipartite state.
    ///
    /// `psi` is split as `(L R)_s` with `L` the first `cut` factors; the block
    /// on `side` (treated as a single system of its total size) is the input.
    /// The output block is recorded as a single factor of size `out_size`.
    pub fn apply_with_ancilla(&self, psi: &State, cut: usize, side: Side) -> Result<State> {
        let shape = psi.shape();
        if cut == 0 || cut >= shape.len() {
            return Err(BctError::CutOutOfRange {
                cut,
                factors: shape.len(),
            });
        }
        let left_shape = shape.slice(0..cut);
        let right_shape = shape.slice(cut..shape.len());
        let target_shape = match side {
            Side::Left => &left_shape,
            Side::Right => &right_shape,
        };
        self.check_input(target_shape)?;
        let out_shape = match side {
            Side::Left => self.output_shape().compose(&right_shape),
            Side::Right => left_shape.compose(&self.output_shape()),
        };
        let mut out: BTreeMap<PureIndex, Q> = BTreeMap::new();
        for (x, w) in psi.iter() {
            let (l, r, s) = bipartition(x, cut)?;
            let target = match side {
                Side::Left => &l,
                Side::Right => &r,
            };
            for (m, tau, p) in &self.rows[target.rank(target_shape) as usize] {
                let m = PureIndex::single(*m);
                let y = match side {
                    Side::Left => join(&m, &r, *tau * s),
                    Side::Right => join(&l, &m, *tau * s),
                };
                *out.entry(y).or_insert_with(Q::zero) += w * p;
            }
        }
        State::new(out_shape, out)
    }

    /// `self ∘ first`: `λ^{(i)}_{k,σ} = Σ [σ = τ τ'] λ1^{(i)}_{m,τ} λ2^{(m)}_{k,τ'}`.
    pub fn after(&self, first: &Channel) -> Result<Channel> {
        compose_seq(self, first)
    }

    fn check_input(&self, shape: &SystemShape) -> Result<()> {
        let size = shape.size();
        if size != self.in_size as u128 {
            return Err(BctError::SizeMismatch {
                expected: self.in_size as u128,
                found: size,
            });
        }
        Ok(())
    }

    fn output_shape(&self) -> SystemShape {
        SystemShape::elementary(self.out_size).expect("out_size ≥ 2")
    }

    /// One line per input, `i: (m1,τ1)=p1 (m2,τ2)=p2 ...`, 1-based, preceded
    /// by a `# in=.. out=..` header.
    pub fn to_text(&self) -> String {
        let mut out = format!("# in={} out={}\n", self.in_size, self.out_size);
        for (i, row) in self.rows.iter().enumerate() {
            let _ = write!(out, "{}:", i + 1);
            for (m, t, p) in row {
                let _ = write!(out, " ({},{})={}", m + 1, t.as_char(), format_rational(p));
            }
            out.push('\n');
        }
        out
    }

    /// Parses [`Self::to_text`] output. Without a header the output size is
    /// the largest index mentioned.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut declared: Option<(usize, usize)> = None;
        let mut rows: Vec<(usize, Vec<Entry>)> = Vec::new();
        for (k, line) in text.lines().enumerate() {
            let err = |msg: String| BctError::Parse { line: k + 1, msg };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(header) = line.strip_prefix('#') {
                let mut sizes = (None, None);
                for part in header.split_whitespace() {
                    if let Some(v) = part.strip_prefix("in=") {
                        sizes.0 = Some(v.parse().map_err(|_| err("bad `in=`".into()))?);
                    } else if let Some(v) = part.strip_prefix("out=") {
                        sizes.1 = Some(v.parse().map_err(|_| err("bad `out=`".into()))?);
                    }
                }
                if let (Some(a), Some(b)) = sizes {
                    declared = Some((a, b));
                }
                continue;
            }
            let (head, body) = line
                .split_once(':')
                .ok_or_else(|| err("expected `i: (m,τ)=p ...`".into()))?;
            let i: usize = head
                .trim()
                .parse()
                .ok()
                .filter(|&i: &usize| i >= 1)
                .ok_or_else(|| err(format!("bad input index `{head}`")))?;
            let mut entries = Vec::new();
            for token in body.split_whitespace() {
                let (outcome, p) = token
                    .split_once('=')
                    .ok_or_else(|| err(format!("bad entry `{token}`")))?;
                let inner = outcome
                    .strip_prefix('(')
                    .and_then(|o| o.strip_suffix(')'))
                    .ok_or_else(|| err(format!("bad outcome `{outcome}`")))?;
                let (m, t) = inner
                    .split_once(',')
                    .ok_or_else(|| err(format!("bad outcome `{outcome}`")))?;
                let m: usize = m
                    .trim()
                    .parse()
                    .ok()
                    .filter(|&m: &usize| m >= 1)
                    .ok_or_else(|| err(format!("bad output index `{m}`")))?;
                let mut chars = t.trim().chars();
                let tau = match (chars.next().and_then(Sign::from_char), chars.next()) {
                    (Some(tau), None) => tau,
                    _ => return Err(err(format!("bad sign `{t}`"))),
                };
                let p = parse_rational(p).map_err(|e| err(e.to_string()))?;
                entries.push((m - 1, tau, p));
            }
            rows.push((i - 1, entries));
        }
        rows.sort_by_key(|(i, _)| *i);
        if rows.iter().enumerate().any(|(k, (i, _))| k != *i) {
            return Err(BctError::Parse {
                line: 0,
                msg: "input indices must be exactly 1..D_A".into(),
            });
        }
        let max_out = rows
            .iter()
            .flat_map(|(_, r)| r.iter().map(|(m, _, _)| m + 1))
            .max()
            .unwrap_or(0);
        let (in_size, out_size) = declared.unwrap_or((rows.len(), max_out));
        Self::new(in_size, out_size, rows.into_iter().map(|(_, r)| r).collect())
    }
}

/// Sequential composition `c2 ∘ c1`; relative signs multiply.
pub fn compose_seq(c2: &Channel, c1: &Channel) -> Result<Channel> {
    if c1.out_size != c2.in_size {
        return Err(BctError::SizeMismatch {
            expected: c2.in_size as u128,
            found: c1.out_size as u128,
        });
    }
    let rows = c1
        .rows
        .iter()
        .map(|row| {
            row.iter()
                .flat_map(|(m, tau, a)| {
                    c2.rows[*m]
                        .iter()
                        .map(move |(k, tau2, b)| (*k, *tau * *tau2, a * b))
                })
                .collect()
        })
        .collect();
    Channel::new(c1.in_size, c2.out_size, rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opt::{compose_states, op_norm};
    use crate::rational::q;
    use crate::sample::rng;
    use Sign::{Minus, Plus};

    fn bit() -> SystemShape {
        SystemShape::elementary(2).unwrap()
    }

    fn pure(shape: &SystemShape, x: PureIndex) -> State {
        State::pure(shape.clone(), x).unwrap()
    }

    #[test]
    fn identity_leaves_states_unchanged() {
        let psi = compose_states(
            &State::from_probabilities(&[q(1, 3), q(2, 3)]).unwrap(),
            &State::from_probabilities(&[q(1, 5), q(4, 5)]).unwrap(),
        );
        let id = Channel::identity(2).unwrap();
        assert_eq!(id.apply_with_ancilla(&psi, 1, Side::Right).unwrap(), psi);
        assert_eq!(id.apply_with_ancilla(&psi, 1, Side::Left).unwrap(), psi);
        let rho = State::from_probabilities(&[q(1, 3), q(2, 3)]).unwrap();
        assert_eq!(id.apply_local(&rho).unwrap(), rho);
    }

    #[test]
    fn sign_flip_multiplies_relative_sign() {
        let sh = SystemShape::new(vec![2, 2]).unwrap();
        let x = PureIndex::from_parts(vec![0, 1], vec![Plus]);
        let out = Channel::sign_flip(2)
            .unwrap()
            .apply_with_ancilla(&pure(&sh, x), 1, Side::Right)
            .unwrap();
        assert_eq!(out, pure(&sh, PureIndex::from_parts(vec![0, 1], vec![Minus])));
    }

    #[test]
    fn bit_swap_on_first_factor() {
        let one = pure(&bit(), PureIndex::single(0));
        let psi = compose_states(&one, &one);
        let swap = Channel::point_mass(2, 2, |i| (1 - i, Plus)).unwrap();
        let out = swap.apply_with_ancilla(&psi, 1, Side::Left).unwrap();
        let two = pure(&bit(), PureIndex::single(1));
        assert_eq!(out, compose_states(&two, &one));
        assert_eq!(out.weight(&PureIndex::from_parts(vec![1, 0], vec![Minus])), q(1, 2));
    }

    #[test]
    fn constant_channel_gives_point_mass() {
        let c = Channel::point_mass(3, 2, |_| (1, Minus)).unwrap();
        let rho = State::from_probabilities(&[q(1, 2), q(1, 3), q(1, 6)]).unwrap();
        assert_eq!(c.apply_local(&rho).unwrap(), pure(&bit(), PureIndex::single(1)));
    }

    #[test]
    fn apply_local_matches_dense_matrix_product() {
        let mut r = rng(11);
        for _ in 0..20 {
            let c = Channel::random(&mut r, 3, 4).unwrap();
            let p = sample::distribution(&mut r, 3);
            let rho = State::from_probabilities(&p).unwrap();
            // dense column-stochastic matrix T[m][i] = Σ_τ λ^{(i)}_{m,τ}
            let mut t = vec![vec![Q::zero(); 3]; 4];
            for (i, row) in c.rows().iter().enumerate() {
                for (m, _, w) in row {
                    t[*m][i] += w;
                }
            }
            let expected: Vec<Q> = t
                .iter()
                .map(|col| col.iter().zip(&p).map(|(a, b)| a * b).sum())
                .collect();
            assert_eq!(c.apply_local(&rho).unwrap().dense(), expected);
        }
    }

    #[test]
    fn sequential_composition() {
        let mut r = rng(5);
        let c = Channel::random(&mut r, 3, 2).unwrap();
        assert_eq!(compose_seq(&c, &Channel::identity(3).unwrap()).unwrap(), c);
        assert_eq!(compose_seq(&Channel::identity(2).unwrap(), &c).unwrap(), c);
        let flip = Channel::sign_flip(4).unwrap();
        assert_eq!(compose_seq(&flip, &flip).unwrap(), Channel::identity(4).unwrap());
        assert!(compose_seq(&c, &c).is_err());
    }

    #[test]
    fn composition_agrees_with_applying_twice() {
        let mut r = rng(8);
        let sh = SystemShape::new(vec![2, 2]).unwrap();
        for _ in 0..10 {
            let c1 = Channel::random(&mut r, 2, 2).unwrap();
            let c2 = Channel::random(&mut r, 2, 2).unwrap();
            let c21 = compose_seq(&c2, &c1).unwrap();
            for x in PureIndex::all(&sh) {
                let psi = pure(&sh, x);
                for side in [Side::Left, Side::Right] {
                    let twice = c2
                        .apply_with_ancilla(&c1.apply_with_ancilla(&psi, 1, side).unwrap(), 1, side)
                        .unwrap();
                    assert_eq!(c21.apply_with_ancilla(&psi, 1, side).unwrap(), twice);
                }
            }
        }
    }

    #[test]
    fn size_mismatch_is_reported() {
        let c = Channel::identity(3).unwrap();
        let rho = State::from_probabilities(&[q(1, 2), q(1, 2)]).unwrap();
        assert!(matches!(c.apply_local(&rho), Err(BctError::SizeMismatch { .. })));
        let psi = compose_states(&rho, &rho);
        assert!(c.apply_with_ancilla(&psi, 1, Side::Left).is_err());
        assert!(c.apply_with_ancilla(&psi, 2, Side::Left).is_err());
    }

    #[test]
    fn invalid_rows_are_rejected() {
        assert!(Channel::new(2, 2, vec![vec![(0, Plus, q(1, 2))], vec![(0, Plus, Q::one())]]).is_err());
        assert!(Channel::new(2, 2, vec![vec![(2, Plus, Q::one())], vec![(0, Plus, Q::one())]]).is_err());
        assert!(Channel::new(
            2,
            2,
            vec![vec![(0, Plus, q(3, 2)), (1, Plus, q(-1, 2))], vec![(0, Plus, Q::one())]]
        )
        .is_err());
    }

    #[test]
    fn multi_factor_block_is_flattened() {
        // channel on the first two factors of a three-factor state
        let mut r = rng(21);
        let sh = SystemShape::new(vec![2, 2, 3]).unwrap();
        let x = PureIndex::from_parts(vec![1, 0, 2], vec![Minus, Plus]);
        let c = Channel::random(&mut r, 8, 3).unwrap();
        let out = c.apply_with_ancilla(&pure(&sh, x.clone()), 2, Side::Left).unwrap();
        assert_eq!(out.shape().factors(), &[3, 3]);
        let (l, rr, s) = bipartition(&x, 2).unwrap();
        let block = l.rank(&sh.slice(0..2)) as usize;
        for (m, tau, p) in c.row(block) {
            let y = join(&PureIndex::single(*m), &rr, *tau * s);
            assert_eq!(out.weight(&y), *p);
        }
    }

    #[test]
    fn text_round_trip() {
        let mut r = rng(2);
        let c = Channel::random(&mut r, 3, 2).unwrap();
        let text = c.to_text();
        assert_eq!(Channel::from_text(&text).unwrap(), c);
        let c = Channel::from_text("1: (2,+)=1/2 (1,-)=1/2\n2: (2,-)=1").unwrap();
        assert_eq!(c.entry(0, 1, Plus), q(1, 2));
        assert_eq!(c.entry(1, 1, Minus), Q::one());
        assert!(Channel::from_text("1: (2,x)=1\n2: (1,+)=1").is_err());
        assert!(Channel::from_text("1: (1,+)=1/2\n2: (1,+)=1").is_err());
    }

    #[test]
    fn reversibility_detection() {
        let mut r = rng(3);
        assert!(Channel::random_reversible(&mut r, 5).unwrap().is_reversible());
        assert!(!Channel::point_mass(2, 2, |_| (0, Plus)).unwrap().is_reversible());
        let rho = State::from_probabilities(&[q(1, 2), q(1, 4), q(1, 4)]).unwrap();
        let sigma = State::from_probabilities(&[q(1, 3), q(1, 3), q(1, 3)]).unwrap();
        let d = StateDelta::difference(&rho, &sigma).unwrap();
        let u = Channel::random_reversible(&mut r, 3).unwrap();
        assert_eq!(op_norm(&u.apply_local_delta(&d).unwrap()), op_norm(&d));
    }
}
