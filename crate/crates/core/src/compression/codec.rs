//! The typical-set codec, its figures of merit and the dilation check.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use super::source::{check_memory, message_distribution, message_shape, Source};
use super::typical::TypicalSet;
use crate::channels::{compose_seq, Channel};
use crate::dilation::{mother_dilation, random_dilation};
use crate::opt::{bipartition, compose_states, join, op_norm, PureIndex, Sign, Side, State, SystemShape};
use crate::rational::{format_rational, from_biguint, q};
use crate::{BctError, Result, Q, DEFAULT_MEMORY_BOUND};

pub const DEFAULT_DELTA: f64 = 0.1;

/// `M = ⌈N((H(p) + 1)/2 + δ)⌉`.
pub fn theorem_m(source: &Source, n: usize, delta: f64) -> u32 {
    let m = (n as f64 * (source.information_content() + delta)).ceil();
    (m as u32).max(1)
}

/// Fixed-length codec through the typical set: typical `(i, s)` is sent to
/// codeword `h(i, s) = rank_T(i) 2^{N-1} + rank(s)` with sign `+`.
#[derive(Debug, Clone, PartialEq)]
pub struct TypicalCodec {
    typical: TypicalSet,
    n: usize,
    m: u32,
    input: SystemShape,
    output: SystemShape,
    fallback_string: PureIndex,
}

pub const FALLBACK_CODEWORD: u128 = 0;

impl TypicalCodec {
    pub fn new(typical: TypicalSet, m: u32) -> Result<Self> {
        let n = typical.n();
        let d = typical.source().size();
        if m == 0 {
            return Err(BctError::InvalidParameter("M must be at least 1".into()));
        }
        let used = typical.cardinality() << (n - 1);
        let available = BigUint::one() << (2 * m - 1);
        if used > available {
            return Err(BctError::Infeasible(format!(
                "{used} typical messages do not fit {available} codewords"
            )));
        }
        let input = message_shape(d, n)?;
        let output = SystemShape::repeated(2, m as usize)?;
        let mut codec = Self {
            typical,
            n,
            m,
            input,
            output,
            fallback_string: PureIndex::unit(),
        };
        codec.fallback_string = match codec.decode_codeword(FALLBACK_CODEWORD) {
            Some(x) => x,
            None => PureIndex::unrank(&codec.input, 0)?,
        };
        Ok(codec)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn typical(&self) -> &TypicalSet {
        &self.typical
    }

    pub fn input_shape(&self) -> &SystemShape {
        &self.input
    }

    pub fn output_shape(&self) -> &SystemShape {
        &self.output
    }

    pub fn fallback_string(&self) -> &PureIndex {
        &self.fallback_string
    }

    /// Codewords in the image of `h`.
    pub fn used_codewords(&self) -> BigUint {
        self.typical.cardinality() << (self.n - 1)
    }

    /// `h(i, s)`, or `None` for non-typical messages.
    pub fn h(&self, x: &PureIndex) -> Option<u128> {
        let r = self.typical.rank(x.locals())?;
        let s = x.signs().iter().fold(0u128, |acc, t| (acc << 1) | t.bit());
        Some((r << (self.n - 1)) | s)
    }

    fn decode_codeword(&self, c: u128) -> Option<PureIndex> {
        let r = c >> (self.n - 1);
        let locals = self.typical.unrank(r)?;
        let bits = self.n - 1;
        let signs = (0..bits).map(|k| Sign::from_bit(c >> (bits - 1 - k))).collect();
        PureIndex::new(&self.input, locals, signs).ok()
    }

    pub fn encode(&self, x: &PureIndex) -> u128 {
        self.h(x).unwrap_or(FALLBACK_CODEWORD)
    }

    /// `h^{-1}` on the image, the fallback string elsewhere.
    pub fn decode(&self, c: u128) -> PureIndex {
        self.decode_codeword(c)
            .unwrap_or_else(|| self.fallback_string.clone())
    }

    /// `Σ_x w_x [decode(encode(x)) = x]`, from the class structure: typical
    /// messages are recovered and every other message lands on the fallback
    /// string, which is recovered only when it is itself non-typical.
    pub fn retained_mass(&self) -> Q {
        let mut mass = self.typical.mass().clone();
        let x = &self.fallback_string;
        if !self.typical.contains(x.locals()) && self.decode(self.encode(x)) == *x {
            mass += self.typical.source().string_prob(x.locals()) * crate::rational::inv_pow2((self.n - 1) as u32);
        }
        mass
    }

    /// `D̃ = 2(1 - retained mass)`, exact.
    pub fn fom_tilde(&self) -> Q {
        q(2, 1) * (Q::one() - self.retained_mass())
    }

    fn flat_sizes(&self, bound: u128) -> Result<(usize, usize)> {
        let d = self.typical.source().size();
        let entries = check_memory(d, self.n, bound)?;
        let out = self.output.size();
        if out > bound {
            return Err(BctError::MemoryBound { entries: out, bound });
        }
        Ok((entries as usize, out as usize))
    }

    /// Encoder as an explicit channel `A^{⊠N} → B^{⊠M}` on flat indices.
    pub fn encoder_channel(&self, bound: u128) -> Result<Channel> {
        let (din, dout) = self.flat_sizes(bound)?;
        let input = &self.input;
        let labels: Vec<u128> = PureIndex::all(input).map(|x| self.encode(&x)).collect();
        Channel::point_mass(din, dout, |i| (labels[i] as usize, Sign::Plus))
    }

    /// Decoder as an explicit channel `B^{⊠M} → A^{⊠N}`.
    pub fn decoder_channel(&self, bound: u128) -> Result<Channel> {
        let (din, dout) = self.flat_sizes(bound)?;
        let labels: Vec<usize> = (0..dout as u128)
            .map(|c| self.decode(c).rank(&self.input) as usize)
            .collect();
        Channel::point_mass(dout, din, |c| (labels[c], Sign::Plus))
    }
}

/// Default enumeration bound for the explicit channel cross-check of D̃.
/// Exact rational channels get slow well before the memory bound.
pub const CROSS_CHECK_BOUND: u128 = 1 << 18;

/// The codec of the achievability construction with
/// `M = ⌈N((H+1)/2 + δ)⌉`.
pub fn build_codec(p: &[Q], n: usize, delta: f64) -> Result<TypicalCodec> {
    let source = Source::new(p.to_vec())?;
    let typical = TypicalSet::new(&source, n, delta)?;
    TypicalCodec::new(typical, theorem_m(&source, n, delta))
}

/// `2(1 - Σ_x w_x Σ_{m,τ} λ^{(x)}_{m,τ} μ^{(m)}_{x,τ})`: the retained mass
/// counts the paths that return `x` with overall sign `+`.
pub fn fom_tilde_retained(message: &State, encoder: &Channel, decoder: &Channel) -> Result<Q> {
    check_codec(message, encoder, decoder)?;
    let shape = message.shape();
    let mut retained = Q::zero();
    for (x, w) in message.iter() {
        let r = x.rank(shape) as usize;
        for (m, tau, lambda) in encoder.row(r) {
            retained += w * lambda * decoder.entry(*m, r, *tau);
        }
    }
    Ok(q(2, 1) * (Q::one() - retained))
}

/// `Σ_x w_x ‖((C - I) ⊠ I)(x x)_+‖` with `C = decoder ∘ encoder`.
pub fn fom_tilde_norm(message: &State, encoder: &Channel, decoder: &Channel) -> Result<Q> {
    check_codec(message, encoder, decoder)?;
    let c = compose_seq(decoder, encoder)?;
    let shape = message.shape();
    let d = c.in_size();
    let pair = SystemShape::new(vec![d, d])?;
    let mut total = Q::zero();
    for (x, w) in message.iter() {
        let r = x.rank(shape) as usize;
        let copy = PureIndex::single(r);
        let input = State::pure(pair.clone(), join(&copy, &copy, Sign::Plus))?;
        let output = c.apply_with_ancilla(&input, 1, Side::Left)?;
        total += w * op_norm(&output.minus(&input)?);
    }
    Ok(total)
}

fn check_codec(message: &State, encoder: &Channel, decoder: &Channel) -> Result<()> {
    let size = message.shape().size();
    if encoder.in_size() as u128 != size || decoder.out_size() as u128 != size {
        return Err(BctError::SizeMismatch {
            expected: size,
            found: encoder.in_size() as u128,
        });
    }
    if encoder.out_size() != decoder.in_size() {
        return Err(BctError::SizeMismatch {
            expected: encoder.out_size() as u128,
            found: decoder.in_size() as u128,
        });
    }
    Ok(())
}

/// Whether `fom_tilde` can afford the explicit channel paths under `bound`.
pub fn explicit_check_fits(codec: &TypicalCodec, bound: u128) -> bool {
    let d = codec.typical().source().size();
    check_memory(d, codec.n(), bound).is_ok() && codec.output_shape().size() <= bound
}

/// `D̃` of a typical codec on its own source. The structural value is
/// cross-checked against both explicit paths when the channels fit in
/// `bound`.
pub fn fom_tilde(codec: &TypicalCodec, bound: u128) -> Result<Q> {
    let structural = codec.fom_tilde();
    if !explicit_check_fits(codec, bound) {
        return Ok(structural);
    }
    let message = message_distribution(&codec.typical().source().state(), codec.n())?;
    let enc = codec.encoder_channel(bound)?;
    let dec = codec.decoder_channel(bound)?;
    for (what, value) in [
        ("retained-mass path", fom_tilde_retained(&message, &enc, &dec)?),
        ("norm path", fom_tilde_norm(&message, &enc, &dec)?),
    ] {
        if value != structural {
            return Err(BctError::Disagreement {
                what: format!("D̃ {what}"),
                left: format_rational(&structural),
                right: format_rational(&value),
            });
        }
    }
    Ok(structural)
}

/// Collapses the first `cut` factors into one factor of their total size.
pub fn flatten_left(psi: &State, cut: usize) -> Result<State> {
    let shape = psi.shape();
    let left = shape.slice(0..cut);
    let right = shape.slice(cut..shape.len());
    let size = usize::try_from(left.size())
        .map_err(|_| BctError::InvalidParameter(format!("{left} too large to flatten")))?;
    let flat = SystemShape::elementary(size)?.compose(&right);
    let mut out = BTreeMap::new();
    for (x, w) in psi.iter() {
        let (l, r, s) = bipartition(x, cut)?;
        out.insert(join(&PureIndex::single(l.rank(&left) as usize), &r, s), w.clone());
    }
    State::new(flat, out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DilationCheck {
    pub fom_tilde: Q,
    pub mother_error: Q,
    pub product_error: Q,
    /// Largest error over the random dilations.
    pub sampled_max: Q,
    pub samples: usize,
}

impl DilationCheck {
    /// Every dilation error is at most `D̃`, and the mother dilation attains
    /// it.
    pub fn holds(&self) -> bool {
        self.mother_error == self.fom_tilde
            && self.product_error <= self.fom_tilde
            && self.sampled_max <= self.fom_tilde
    }
}

/// `‖(C ⊠ I)Ψ - Ψ‖` for a dilation `Ψ` of `ρ^{⊠N}` with ancilla after `cut`.
pub fn dilation_error(psi: &State, cut: usize, c: &Channel) -> Result<Q> {
    let out = c.apply_with_ancilla(psi, cut, Side::Left)?;
    Ok(op_norm(&out.minus(&flatten_left(psi, cut)?)?))
}

/// Samples dilations of `ρ^{⊠N}` and compares their recovery errors under
/// `C = decoder ∘ encoder` with `D̃`.
pub fn fom_dil_check(
    rho: &State,
    n: usize,
    encoder: &Channel,
    decoder: &Channel,
    samples: usize,
    seed: u64,
) -> Result<DilationCheck> {
    let message = message_distribution(rho, n)?;
    let c = compose_seq(decoder, encoder)?;
    let fom = fom_tilde_norm(&message, encoder, decoder)?;
    let size = message.shape().size();
    if size * size > DEFAULT_MEMORY_BOUND {
        return Err(BctError::MemoryBound {
            entries: size * size,
            bound: DEFAULT_MEMORY_BOUND,
        });
    }
    let mother = mother_dilation(&message)?;
    let mother_error = dilation_error(&mother, n, &c)?;
    let marker = State::pure(SystemShape::elementary(2)?, PureIndex::single(1))?;
    let product_error = dilation_error(&compose_states(&message, &marker), n, &c)?;
    let mut sampled_max = Q::zero();
    for k in 0..samples {
        let f_size = 2 + (k % 4);
        let psi = random_dilation(&message, f_size, seed.wrapping_add(k as u64))?;
        let e = dilation_error(psi.joint(), n, &c)?;
        if e > sampled_max {
            sampled_max = e;
        }
    }
    Ok(DilationCheck {
        fom_tilde: fom,
        mother_error,
        product_error,
        sampled_max,
        samples,
    })
}

/// `2 P(i ∉ T)`.
pub fn twice_atypical_mass(typical: &TypicalSet) -> Q {
    q(2, 1) * (Q::one() - typical.mass())
}

/// Codeword count as used by the typical codec, for reports.
pub fn used_codewords_u128(codec: &TypicalCodec) -> Option<u128> {
    codec.used_codewords().to_u128()
}

/// `|T| 2^{N-1}` as an exact rational, for reports.
pub fn used_codewords_q(codec: &TypicalCodec) -> Q {
    from_biguint(&codec.used_codewords())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample;

    #[test]
    fn pure_source_codec() {
        let codec = build_codec(&[Q::one(), Q::zero()], 3, 0.1).unwrap();
        assert_eq!(codec.m(), 2);
        assert_eq!(codec.used_codewords(), BigUint::from(4u32));
        let shape = codec.input_shape().clone();
        let mut images = std::collections::BTreeSet::new();
        for x in PureIndex::all(&shape).filter(|x| x.locals() == [0, 0, 0]) {
            let c = codec.h(&x).unwrap();
            assert!(c < 8);
            assert!(images.insert(c));
            assert_eq!(codec.decode(c), x);
        }
        assert_eq!(images.len(), 4);
        assert_eq!(fom_tilde(&codec, DEFAULT_MEMORY_BOUND).unwrap(), Q::zero());
    }

    #[test]
    fn uniform_codec_size() {
        let codec = build_codec(&[q(1, 2), q(1, 2)], 2, 0.05).unwrap();
        assert_eq!(codec.m(), 3);
        assert_eq!(fom_tilde(&codec, DEFAULT_MEMORY_BOUND).unwrap(), Q::zero());
    }

    #[test]
    fn typical_codec_error_is_twice_atypical_mass() {
        for n in [8, 9] {
            let codec = build_codec(&[q(9, 10), q(1, 10)], n, 0.1).unwrap();
            let expected = twice_atypical_mass(codec.typical());
            assert_eq!(fom_tilde(&codec, DEFAULT_MEMORY_BOUND).unwrap(), expected);
        }
    }

    #[test]
    fn round_trip_on_typical_messages() {
        let codec = build_codec(&[q(2, 3), q(1, 3)], 5, 0.2).unwrap();
        for x in PureIndex::all(codec.input_shape()) {
            if codec.typical().contains(x.locals()) {
                assert_eq!(codec.decode(codec.encode(&x)), x);
            } else {
                assert_eq!(codec.encode(&x), FALLBACK_CODEWORD);
            }
        }
    }

    #[test]
    fn empty_typical_set_uses_flat_fallback() {
        // N = 1 with a tiny δ: neither single symbol is typical.
        let codec = build_codec(&[q(9, 10), q(1, 10)], 1, 0.01).unwrap();
        assert!(codec.typical().is_empty());
        assert_eq!(codec.fallback_string(), &PureIndex::single(0));
        assert_eq!(codec.retained_mass(), q(9, 10));
        assert_eq!(fom_tilde(&codec, DEFAULT_MEMORY_BOUND).unwrap(), q(1, 5));
    }

    #[test]
    fn identity_codec_has_zero_error() {
        let rho = State::from_probabilities(&[q(1, 3), q(2, 3)]).unwrap();
        let msg = message_distribution(&rho, 2).unwrap();
        let id = Channel::identity(8).unwrap();
        assert_eq!(fom_tilde_norm(&msg, &id, &id).unwrap(), Q::zero());
        assert_eq!(fom_tilde_retained(&msg, &id, &id).unwrap(), Q::zero());
        let check = fom_dil_check(&rho, 2, &id, &id, 10, 1).unwrap();
        assert!(check.holds());
        assert_eq!(check.sampled_max, Q::zero());
    }

    #[test]
    fn stochastic_codec_paths_agree() {
        let rho = State::from_probabilities(&[q(3, 4), q(1, 4)]).unwrap();
        let msg = message_distribution(&rho, 2).unwrap();
        let mut rng = sample::rng(11);
        for _ in 0..20 {
            let enc = Channel::random(&mut rng, 8, 2).unwrap();
            let dec = Channel::random(&mut rng, 2, 8).unwrap();
            assert_eq!(
                fom_tilde_norm(&msg, &enc, &dec).unwrap(),
                fom_tilde_retained(&msg, &enc, &dec).unwrap()
            );
        }
    }

    #[test]
    fn dilation_errors_bounded_by_fom_tilde() {
        let rho = State::from_probabilities(&[q(3, 4), q(1, 4)]).unwrap();
        let mut rng = sample::rng(5);
        for seed in 0..5 {
            let enc = Channel::random(&mut rng, 8, 2).unwrap();
            let dec = Channel::random(&mut rng, 2, 8).unwrap();
            let check = fom_dil_check(&rho, 2, &enc, &dec, 20, seed).unwrap();
            assert!(check.holds(), "{check:?}");
        }
        let codec = build_codec(&[q(3, 4), q(1, 4)], 3, 0.1).unwrap();
        let enc = codec.encoder_channel(DEFAULT_MEMORY_BOUND).unwrap();
        let dec = codec.decoder_channel(DEFAULT_MEMORY_BOUND).unwrap();
        let check = fom_dil_check(&rho, 3, &enc, &dec, 10, 9).unwrap();
        assert!(check.holds());
        assert_eq!(check.fom_tilde, codec.fom_tilde());
    }

    #[test]
    fn flatten_keeps_weights() {
        let rho = State::from_probabilities(&[q(1, 2), q(1, 2)]).unwrap();
        let msg = message_distribution(&rho, 3).unwrap();
        let mother = mother_dilation(&msg).unwrap();
        let flat = flatten_left(&mother, 3).unwrap();
        assert_eq!(flat.shape().factors(), &[32, 32]);
        assert_eq!(flat.total(), Q::one());
        assert_eq!(flat.support_len(), 32);
    }
}
