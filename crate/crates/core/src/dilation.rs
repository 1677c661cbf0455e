//! Dilations, the mother dilation and its steering channel.
//!
//! For `ρ = Σ p_i |i)` the mother dilation is `Π = Σ p_i |(i i)_+)` on
//! `A ⊠ E` with `E ≅ A`. Any dilation `Ψ = Σ q_{ijs} |(i j)_s)` of `ρ` on
//! `A ⊠ F` is reached from `Π` by the channel `λ^{(i)}_{j,s} = q_{ijs} / p_i`
//! acting on `E`.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::channels::{Channel, Entry};
use crate::opt::{bipartition, join, PureIndex, Side, Sign, State, SystemShape};
use crate::rational::format_rational;
use crate::sample;
use crate::{BctError, Result, Q};

/// A joint state whose marginal on the first `cut` factors is `target`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dilation {
    joint: State,
    target: State,
    cut: usize,
}

impl Dilation {
    pub fn new(joint: State, target: State, cut: usize) -> Result<Self> {
        let marginal = marginalize(&joint, Side::Left, cut)?;
        if marginal != target {
            return Err(BctError::InconsistentMarginal(format!(
                "marginal has support {} and total {}, target has support {} and total {}",
                marginal.support_len(),
                format_rational(&marginal.total()),
                target.support_len(),
                format_rational(&target.total())
            )));
        }
        Ok(Self { joint, target, cut })
    }

    pub fn joint(&self) -> &State {
        &self.joint
    }

    pub fn target(&self) -> &State {
        &self.target
    }

    pub fn cut(&self) -> usize {
        self.cut
    }

    pub fn ancilla_shape(&self) -> SystemShape {
        let shape = self.joint.shape();
        shape.slice(self.cut..shape.len())
    }
}

/// Discards one block of a bipartite state with the deterministic effect:
/// weights are summed over the discarded block's index and the relative sign.
pub fn marginalize(psi: &State, keep: Side, cut: usize) -> Result<State> {
    let shape = psi.shape();
    if cut == 0 || cut >= shape.len() {
        return Err(BctError::CutOutOfRange {
            cut,
            factors: shape.len(),
        });
    }
    let kept_shape = match keep {
        Side::Left => shape.slice(0..cut),
        Side::Right => shape.slice(cut..shape.len()),
    };
    let mut out: BTreeMap<PureIndex, Q> = BTreeMap::new();
    for (x, w) in psi.iter() {
        let (l, r, _) = bipartition(x, cut)?;
        let kept = match keep {
            Side::Left => l,
            Side::Right => r,
        };
        *out.entry(kept).or_insert_with(Q::zero) += w;
    }
    State::new(kept_shape, out)
}

/// `Π = Σ_x p_x |(x x)_+)`, the ancilla a fresh single factor of size `D_A`.
pub fn mother_dilation(rho: &State) -> Result<State> {
    if !rho.is_deterministic() {
        return Err(BctError::NotDeterministic(format_rational(&rho.total())));
    }
    let shape = rho.shape();
    let size = usize::try_from(shape.size())
        .map_err(|_| BctError::InvalidParameter(format!("{shape} too large for an ancilla")))?;
    let ancilla = SystemShape::elementary(size)?;
    let joint_shape = shape.compose(&ancilla);
    let mut weights = BTreeMap::new();
    for (x, w) in rho.iter() {
        let copy = PureIndex::single(x.rank(shape) as usize);
        weights.insert(join(x, &copy, Sign::Plus), w.clone());
    }
    Ok(State::from_map_unchecked(joint_shape, weights))
}

/// The channel `E → F` that steers the mother dilation of `rho` into `psi`.
///
/// Rows with `p_i = 0` are the point mass on `(1, +)`.
pub fn steering_channel(rho: &State, psi: &Dilation) -> Result<Channel> {
    if psi.target() != rho {
        return Err(BctError::InconsistentMarginal(
            "dilation was built for a different state".into(),
        ));
    }
    let shape = rho.shape();
    let in_size = usize::try_from(shape.size())
        .map_err(|_| BctError::InvalidParameter(format!("{shape} too large")))?;
    let ancilla = psi.ancilla_shape();
    let out_size = usize::try_from(ancilla.size())
        .map_err(|_| BctError::InvalidParameter(format!("{ancilla} too large")))?;
    let mut rows: Vec<Vec<Entry>> = vec![Vec::new(); in_size];
    for (x, w) in psi.joint().iter() {
        let (a, f, s) = bipartition(x, psi.cut())?;
        let p = rho.weight(&a);
        if p.is_zero() {
            return Err(BctError::InconsistentMarginal(format!(
                "weight on {x} but p = 0 for {a}"
            )));
        }
        rows[a.rank(shape) as usize].push((f.rank(&ancilla) as usize, s, w / &p));
    }
    for row in rows.iter_mut().filter(|r| r.is_empty()) {
        row.push((0, Sign::Plus, Q::one()));
    }
    Channel::new(in_size, out_size, rows)
}

/// `(I_A ⊠ C) Π`.
pub fn steer(rho: &State, channel: &Channel) -> Result<State> {
    let pi = mother_dilation(rho)?;
    channel.apply_with_ancilla(&pi, rho.shape().len(), Side::Right)
}

/// Random dilation of `rho` with a single-factor ancilla of size `f_size`,
/// deterministic in `seed`.
pub fn random_dilation(rho: &State, f_size: usize, seed: u64) -> Result<Dilation> {
    if f_size < 2 {
        return Err(BctError::InvalidParameter(format!(
            "ancilla size must be at least 2, got {f_size}"
        )));
    }
    let mut rng = sample::rng(seed);
    let ancilla = SystemShape::elementary(f_size)?;
    let joint_shape = rho.shape().compose(&ancilla);
    let mut entries = Vec::new();
    for (x, p) in rho.iter() {
        let parts = sample::split(&mut rng, p, 2 * f_size);
        for (k, w) in parts.into_iter().enumerate() {
            let f = PureIndex::single(k / 2);
            let s = if k % 2 == 0 { Sign::Plus } else { Sign::Minus };
            entries.push((join(x, &f, s), w));
        }
    }
    let joint = State::new(joint_shape, entries)?;
    Dilation::new(joint, rho.clone(), rho.shape().len())
}
