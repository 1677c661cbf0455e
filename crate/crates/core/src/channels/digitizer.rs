//! Exact encoding of any system into a register of identical systems.

use num_bigint::BigUint;
use num_traits::One;

use super::Channel;
use crate::opt::{Sign, SystemShape};
use crate::{BctError, Result};

/// Encoder/decoder pair `A → B^{⊠k} → A` with `D ∘ E = I_A`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digitizer {
    pub k: usize,
    pub register: SystemShape,
    pub encoder: Channel,
    pub decoder: Channel,
}

/// Least `k ≥ 1` with `D_{B^{⊠k}} ≥ D_A`, i.e. `(2 D_B)^k ≥ 2 D_A`: the
/// integer form of `⌈log_{2 D_B} 2 D_A⌉`.
pub fn digitizer_register_len(a_size: usize, b_size: usize) -> usize {
    let target = BigUint::from(2 * a_size);
    let base = BigUint::from(2 * b_size);
    let mut k = 1;
    let mut power = base.clone();
    while power < target {
        power *= &base;
        k += 1;
    }
    k
}

/// Builds the digitizer of a size-`a_size` system into bibit-like systems of
/// size `b_size`.
///
/// The injection sends `i` to the `i`-th pure index of `B^{⊠k}` (canonical
/// order) with sign `+`; codewords outside its image decode to `(1, +)`.
pub fn build_digitizer(a_size: usize, b_size: usize) -> Result<Digitizer> {
    if a_size < 2 || b_size < 2 {
        return Err(BctError::InvalidParameter(format!(
            "digitizer sizes must be at least 2, got {a_size} and {b_size}"
        )));
    }
    let k = digitizer_register_len(a_size, b_size);
    let register = SystemShape::repeated(b_size, k)?;
    let reg_size = usize::try_from(register.size()).map_err(|_| {
        BctError::InvalidParameter(format!("register {register} too large to materialize"))
    })?;
    let encoder = Channel::point_mass(a_size, reg_size, |i| (i, Sign::Plus))?;
    let decoder = Channel::point_mass(reg_size, a_size, |j| {
        if j < a_size {
            (j, Sign::Plus)
        } else {
            (0, Sign::Plus)
        }
    })?;
    Ok(Digitizer {
        k,
        register,
        encoder,
        decoder,
    })
}

/// `M_2^min(k_1) = ⌈k_1 log_{2 D_{B2}} 2 D_{B1}⌉`, evaluated exactly as the
/// least `M` with `(2 D_{B2})^M ≥ (2 D_{B1})^{k_1}`.
pub fn asymptotic_rate(b1_size: usize, b2_size: usize, k1: u32) -> Result<u64> {
    if b1_size < 2 || b2_size < 2 || k1 == 0 {
        return Err(BctError::InvalidParameter(format!(
            "need sizes ≥ 2 and k1 ≥ 1, got {b1_size}, {b2_size}, {k1}"
        )));
    }
    let target = num_traits::pow(BigUint::from(2 * b1_size), k1 as usize);
    let base = BigUint::from(2 * b2_size);
    let mut m = 0u64;
    let mut power = BigUint::one();
    while power < target {
        power *= &base;
        m += 1;
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::compose_seq;

    #[test]
    fn register_lengths() {
        assert_eq!(digitizer_register_len(2, 2), 1);
        assert_eq!(digitizer_register_len(5, 2), 2);
        assert_eq!(digitizer_register_len(4, 2), 2);
        assert_eq!(digitizer_register_len(2, 9), 1);
        // least k with 2^{k-1} 2^k ≥ 33: k = 4 (size 128), k = 3 gives 32
        assert_eq!(digitizer_register_len(33, 2), 4);
        assert_eq!(digitizer_register_len(32, 2), 3);
    }

    #[test]
    fn decoder_inverts_encoder() {
        let d = build_digitizer(5, 2).unwrap();
        assert_eq!(d.k, 2);
        assert_eq!(d.register.size(), 8);
        assert_eq!(
            compose_seq(&d.decoder, &d.encoder).unwrap(),
            Channel::identity(5).unwrap()
        );
    }

    #[test]
    fn rates() {
        assert_eq!(asymptotic_rate(3, 3, 17).unwrap(), 17);
        assert_eq!(asymptotic_rate(2, 4, 3).unwrap(), 2);
        assert!(asymptotic_rate(1, 4, 3).is_err());
        assert!(build_digitizer(1, 2).is_err());
    }
}
