//! Exhaustive search over point-mass codecs, independent of the top-K rule.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::opt::State;
use crate::{BctError, Result, Q};

/// Weights over a common denominator, for fast exact sums.
struct Scaled {
    numer: Vec<u128>,
    denom: BigInt,
}

impl Scaled {
    fn new(message: &State) -> Result<Self> {
        let dense = message.dense();
        let denom = dense
            .iter()
            .fold(BigInt::one(), |acc, w| acc.lcm(w.denom()));
        let numer = dense
            .iter()
            .map(|w| (w.numer() * (&denom / w.denom())).to_u128())
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| BctError::InvalidParameter("weights too fine for the oracle".into()))?;
        Ok(Self { numer, denom })
    }

    fn to_q(&self, v: u128) -> Q {
        Q::new(BigInt::from(v), self.denom.clone())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub best_retained: Q,
    pub codecs_evaluated: u128,
}

fn checked_pow(base: u128, exp: usize, limit: u128) -> Result<u128> {
    let mut acc = 1u128;
    for _ in 0..exp {
        acc = acc
            .checked_mul(base)
            .filter(|&a| a <= limit)
            .ok_or(BctError::OracleBound { size: u128::MAX, bound: limit })?;
    }
    Ok(acc)
}

/// Best retained mass over all point-mass codecs with `2^{2M-1}` codewords,
/// enumerating every decoder map `codeword → message`.
///
/// For a fixed decoder the best encoder sends `x` to any codeword decoded to
/// `x`, with the matching sign, so the retained mass is the weight of the
/// decoder's image; signs of the decoder never matter.
pub fn best_point_mass_codec(message: &State, m: u32, limit: u128) -> Result<OracleResult> {
    let scaled = Scaled::new(message)?;
    let n_in = scaled.numer.len();
    if n_in > 128 {
        return Err(BctError::OracleBound { size: n_in as u128, bound: 128 });
    }
    let n_out = 1usize << (2 * m - 1);
    let total = checked_pow(n_in as u128, n_out, limit)?;
    let best = (0..n_in)
        .into_par_iter()
        .map(|first| {
            let mut digits = vec![0usize; n_out];
            digits[0] = first;
            let mut best = 0u128;
            loop {
                let image = digits.iter().fold(0u128, |acc, &d| acc | (1u128 << d));
                let mass: u128 = (0..n_in)
                    .filter(|x| image >> x & 1 == 1)
                    .map(|x| scaled.numer[x])
                    .sum();
                best = best.max(mass);
                let mut k = 1;
                while k < n_out {
                    digits[k] += 1;
                    if digits[k] < n_in {
                        break;
                    }
                    digits[k] = 0;
                    k += 1;
                }
                if k >= n_out {
                    break;
                }
            }
            best
        })
        .max()
        .unwrap_or(0);
    Ok(OracleResult {
        best_retained: scaled.to_q(best),
        codecs_evaluated: total,
    })
}

/// Brute force over every pair of signed point-mass encoder and decoder.
pub fn brute_force_codecs(message: &State, m: u32, limit: u128) -> Result<OracleResult> {
    let scaled = Scaled::new(message)?;
    let n_in = scaled.numer.len();
    let n_out = 1usize << (2 * m - 1);
    let encoders = checked_pow(2 * n_out as u128, n_in, limit)?;
    let decoders = checked_pow(2 * n_in as u128, n_out, limit)?;
    let total = encoders
        .checked_mul(decoders)
        .filter(|&t| t <= limit)
        .ok_or(BctError::OracleBound { size: u128::MAX, bound: limit })?;
    let decode: Vec<Vec<usize>> = (0..decoders)
        .map(|r| digits(r, 2 * n_in, n_out))
        .collect();
    let best = (0..encoders)
        .into_par_iter()
        .map(|e| {
            // Outcome `2c + t` is codeword `c` with sign bit `t`.
            let enc = digits(e, 2 * n_out, n_in);
            decode
                .iter()
                .map(|dec| {
                    (0..n_in)
                        .filter(|&x| {
                            let (c, t) = (enc[x] / 2, enc[x] % 2);
                            let (y, u) = (dec[c] / 2, dec[c] % 2);
                            y == x && t == u
                        })
                        .map(|x| scaled.numer[x])
                        .sum::<u128>()
                })
                .max()
                .unwrap_or(0)
        })
        .max()
        .unwrap_or(0);
    Ok(OracleResult {
        best_retained: scaled.to_q(best),
        codecs_evaluated: total,
    })
}

fn digits(mut r: u128, base: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0usize; len];
    for slot in out.iter_mut() {
        *slot = (r % base as u128) as usize;
        r /= base as u128;
    }
    out
}

/// Least `M` in `1..=m_max` whose best codec retains more than `threshold`.
pub fn oracle_rate(message: &State, m_max: u32, threshold: &Q, limit: u128) -> Result<Option<u32>> {
    for m in 1..=m_max {
        if best_point_mass_codec(message, m, limit)?.best_retained > *threshold {
            return Ok(Some(m));
        }
    }
    Ok(None)
}

/// Zero retained mass never wins; kept for symmetry in reports.
pub fn is_trivial(result: &OracleResult) -> bool {
    result.best_retained.is_zero()
}
