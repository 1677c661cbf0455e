use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_traits::{One, Signed, Zero};

use super::{join, PureIndex, Sign, SystemShape};
use crate::rational::{format_rational, parse_rational, q};
use crate::{BctError, Result, Q};

/// Sub-normalized mixture of pure states, stored sparsely in canonical order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct State {
    shape: SystemShape,
    weights: BTreeMap<PureIndex, Q>,
}

impl State {
    /// Builds a state from `(label, weight)` pairs; repeated labels are merged
    /// and zero weights dropped.
    pub fn new<I>(shape: SystemShape, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (PureIndex, Q)>,
    {
        let mut weights: BTreeMap<PureIndex, Q> = BTreeMap::new();
        for (x, w) in entries {
            x.check(&shape)?;
            if w.is_negative() {
                return Err(BctError::InvalidState(format!("negative weight at {x}")));
            }
            *weights.entry(x).or_insert_with(Q::zero) += w;
        }
        weights.retain(|_, w| !w.is_zero());
        let total: Q = weights.values().sum();
        if total > Q::one() {
            return Err(BctError::InvalidState(format!(
                "total weight {} exceeds 1",
                format_rational(&total)
            )));
        }
        Ok(Self { shape, weights })
    }

    pub(crate) fn from_map_unchecked(shape: SystemShape, weights: BTreeMap<PureIndex, Q>) -> Self {
        debug_assert!(weights.values().all(|w| w.is_positive()));
        Self { shape, weights }
    }

    /// `Σ_i p_i |i)` on an elementary system of size `p.len()`.
    pub fn from_probabilities(p: &[Q]) -> Result<Self> {
        let shape = SystemShape::elementary(p.len())?;
        Self::new(
            shape,
            p.iter()
                .enumerate()
                .map(|(i, w)| (PureIndex::single(i), w.clone())),
        )
    }

    pub fn pure(shape: SystemShape, x: PureIndex) -> Result<Self> {
        Self::new(shape, [(x, Q::one())])
    }

    /// The deterministic state of the trivial system.
    pub fn unit() -> Self {
        let mut weights = BTreeMap::new();
        weights.insert(PureIndex::unit(), Q::one());
        Self {
            shape: SystemShape::trivial(),
            weights,
        }
    }

    pub fn shape(&self) -> &SystemShape {
        &self.shape
    }

    pub fn weight(&self, x: &PureIndex) -> Q {
        self.weights.get(x).cloned().unwrap_or_else(Q::zero)
    }

    /// Non-zero weights in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (&PureIndex, &Q)> {
        self.weights.iter()
    }

    pub fn support_len(&self) -> usize {
        self.weights.len()
    }

    pub fn total(&self) -> Q {
        self.weights.values().sum()
    }

    pub fn is_deterministic(&self) -> bool {
        self.total().is_one()
    }

    pub fn is_pure(&self) -> bool {
        self.weights.len() == 1 && self.weights.values().all(|w| w.is_one())
    }

    /// Weights over every pure index, canonical order.
    pub fn dense(&self) -> Vec<Q> {
        PureIndex::all(&self.shape).map(|x| self.weight(&x)).collect()
    }

    /// Non-zero weights only, canonical order.
    pub fn weight_vector(&self) -> Vec<Q> {
        self.weights.values().cloned().collect()
    }

    pub fn scaled(&self, factor: &Q) -> Result<Self> {
        Self::new(
            self.shape.clone(),
            self.weights.iter().map(|(x, w)| (x.clone(), w * factor)),
        )
    }

    pub fn compose(&self, other: &State) -> State {
        compose_states(self, other)
    }

    pub fn minus(&self, other: &State) -> Result<StateDelta> {
        StateDelta::difference(self, other)
    }

    /// Lines `i1,...,in|s1...s(n-1): p/q` in canonical order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (x, w) in &self.weights {
            let _ = writeln!(out, "{x}: {}", format_rational(w));
        }
        out
    }

    pub fn from_text(shape: SystemShape, text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (k, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |msg: String| BctError::Parse { line: k + 1, msg };
            let (label, weight) = line
                .rsplit_once(':')
                .ok_or_else(|| parse_err("expected `label: p/q`".into()))?;
            let x = PureIndex::parse(label.trim()).map_err(parse_err)?;
            let w = parse_rational(weight).map_err(|e| parse_err(e.to_string()))?;
            entries.push((x, w));
        }
        Self::new(shape, entries)
    }
}

/// Parallel composition `ρ ⊠ σ`: pure `i, j` go to `½[(ij)_+ + (ij)_-]`,
/// extended bilinearly. The trivial system acts as the identity.
pub fn compose_states(rho: &State, sigma: &State) -> State {
    if rho.shape.is_trivial() {
        return sigma.scaled(&rho.total()).expect("scaling by a weight ≤ 1");
    }
    if sigma.shape.is_trivial() {
        return rho.scaled(&sigma.total()).expect("scaling by a weight ≤ 1");
    }
    let half = q(1, 2);
    let mut weights = BTreeMap::new();
    for (x, a) in &rho.weights {
        for (y, b) in &sigma.weights {
            let w = a * b * &half;
            for s in Sign::ALL {
                weights.insert(join(x, y, s), w.clone());
            }
        }
    }
    State {
        shape: rho.shape.compose(&sigma.shape),
        weights,
    }
}

/// Signed combination of states on one shape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateDelta {
    shape: SystemShape,
    weights: BTreeMap<PureIndex, Q>,
}

impl StateDelta {
    pub fn new<I>(shape: SystemShape, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (PureIndex, Q)>,
    {
        let mut weights: BTreeMap<PureIndex, Q> = BTreeMap::new();
        for (x, w) in entries {
            x.check(&shape)?;
            *weights.entry(x).or_insert_with(Q::zero) += w;
        }
        weights.retain(|_, w| !w.is_zero());
        Ok(Self { shape, weights })
    }

    pub fn zero(shape: SystemShape) -> Self {
        Self {
            shape,
            weights: BTreeMap::new(),
        }
    }

    pub fn from_state(state: &State) -> Self {
        Self {
            shape: state.shape.clone(),
            weights: state.weights.clone(),
        }
    }

    pub fn difference(a: &State, b: &State) -> Result<Self> {
        Self::from_state(a).plus(&Self::from_state(b).scaled(&-Q::one()))
    }

    pub fn plus(&self, other: &StateDelta) -> Result<Self> {
        if self.shape != other.shape {
            return Err(BctError::InvalidShape(format!(
                "cannot add deltas on {} and {}",
                self.shape, other.shape
            )));
        }
        Self::new(
            self.shape.clone(),
            self.weights
                .iter()
                .chain(other.weights.iter())
                .map(|(x, w)| (x.clone(), w.clone())),
        )
    }

    pub fn scaled(&self, factor: &Q) -> Self {
        let mut weights = BTreeMap::new();
        if !factor.is_zero() {
            for (x, w) in &self.weights {
                weights.insert(x.clone(), w * factor);
            }
        }
        Self {
            shape: self.shape.clone(),
            weights,
        }
    }

    pub fn shape(&self) -> &SystemShape {
        &self.shape
    }

    pub fn weight(&self, x: &PureIndex) -> Q {
        self.weights.get(x).cloned().unwrap_or_else(Q::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PureIndex, &Q)> {
        self.weights.iter()
    }
}

/// Linear functional on states, `0 ≤ a(x) ≤ 1` on every pure index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Effect {
    shape: SystemShape,
    values: BTreeMap<PureIndex, Q>,
}

impl Effect {
    pub fn new<I>(shape: SystemShape, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (PureIndex, Q)>,
    {
        let mut values = BTreeMap::new();
        for (x, v) in entries {
            x.check(&shape)?;
            if v.is_negative() || v > Q::one() {
                return Err(BctError::InvalidParameter(format!(
                    "effect value {} at {x} outside [0, 1]",
                    format_rational(&v)
                )));
            }
            if !v.is_zero() {
                values.insert(x, v);
            }
        }
        Ok(Self { shape, values })
    }

    /// Atomic effect `λ (x|`.
    pub fn atomic(shape: SystemShape, x: PureIndex, scale: Q) -> Result<Self> {
        Self::new(shape, [(x, scale)])
    }

    /// The deterministic effect `e`, equal to one on every pure state.
    pub fn deterministic(shape: SystemShape) -> Self {
        let values = PureIndex::all(&shape).map(|x| (x, Q::one())).collect();
        Self { shape, values }
    }

    pub fn value(&self, x: &PureIndex) -> Q {
        self.values.get(x).cloned().unwrap_or_else(Q::zero)
    }

    /// Supported on at most a single pure index.
    pub fn is_atomic(&self) -> bool {
        self.values.len() <= 1
    }

    pub fn shape(&self) -> &SystemShape {
        &self.shape
    }

    pub fn support(&self) -> impl Iterator<Item = (&PureIndex, &Q)> {
        self.values.iter()
    }

    /// `(a|ρ)`.
    pub fn apply(&self, rho: &State) -> Q {
        rho.iter().map(|(x, w)| self.value(x) * w).sum()
    }

    pub fn apply_delta(&self, delta: &StateDelta) -> Q {
        delta.iter().map(|(x, w)| self.value(x) * w).sum()
    }
}

/// Effects that sum to the deterministic effect.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservationTest {
    effects: Vec<Effect>,
}

impl ObservationTest {
    pub fn new(effects: Vec<Effect>) -> Result<Self> {
        let shape = effects
            .first()
            .map(|e| e.shape.clone())
            .ok_or_else(|| BctError::InvalidParameter("empty observation test".into()))?;
        if effects.iter().any(|e| e.shape != shape) {
            return Err(BctError::InvalidParameter(
                "test elements live on different systems".into(),
            ));
        }
        let mut sums: BTreeMap<&PureIndex, Q> = BTreeMap::new();
        for e in &effects {
            for (x, v) in &e.values {
                *sums.entry(x).or_insert_with(Q::zero) += v;
            }
        }
        let size = shape.size();
        if sums.len() as u128 != size || sums.values().any(|v| !v.is_one()) {
            return Err(BctError::InvalidParameter(
                "test elements do not sum to the deterministic effect".into(),
            ));
        }
        Ok(Self { effects })
    }

    pub fn effects(&self) -> &[Effect] {
        &self.effects
    }

    pub fn is_atomic(&self) -> bool {
        self.effects.iter().all(Effect::is_atomic)
    }

    /// Outcome probabilities `(a_j|ρ)`.
    pub fn probabilities(&self, rho: &State) -> Vec<Q> {
        self.effects.iter().map(|e| e.apply(rho)).collect()
    }
}

/// The perfectly discriminating test: one atomic effect per pure index, in
/// canonical order.
pub fn discrimination_test(shape: &SystemShape) -> ObservationTest {
    let effects = PureIndex::all(shape)
        .map(|x| Effect::atomic(shape.clone(), x, Q::one()).expect("unit atomic effect"))
        .collect();
    ObservationTest { effects }
}
