//! Exact rational helpers.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{BctError, Result};

/// Exact rational number used for every probability and weight.
pub type Q = BigRational;

pub fn q(numer: i64, denom: i64) -> Q {
    Q::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn from_int<T: Into<BigInt>>(v: T) -> Q {
    Q::from_integer(v.into())
}

pub fn from_biguint(v: &BigUint) -> Q {
    Q::from_integer(BigInt::from(v.clone()))
}

/// `2^-k`.
pub fn inv_pow2(k: u32) -> Q {
    Q::new(BigInt::one(), BigInt::one() << k)
}

pub fn to_f64(x: &Q) -> f64 {
    if let Some(v) = x.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    // Very large numerators and denominators: scale down to a comparable range.
    let n = x.numer().bits() as i64;
    let d = x.denom().bits() as i64;
    let shift = (n.max(d) - 900).max(0) as u64;
    let num = (x.numer() >> shift).to_f64().unwrap_or(0.0);
    let den = (x.denom() >> shift).to_f64().unwrap_or(0.0);
    if den == 0.0 {
        x.numer().signum().to_f64().unwrap_or(0.0) * f64::INFINITY
    } else {
        num / den
    }
}

/// Canonical `p/q` rendering (the denominator is always written).
pub fn format_rational(x: &Q) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Parses `p/q`, an integer, or a finite decimal such as `0.125` or `1e-3`
/// into an exact rational.
pub fn parse_rational(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = |msg: &str| BctError::InvalidParameter(format!("`{s}`: {msg}"));
    if s.is_empty() {
        return Err(bad("empty number"));
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad("bad numerator"))?;
        let d: BigInt = d.trim().parse().map_err(|_| bad("bad denominator"))?;
        if d.is_zero() {
            return Err(bad("zero denominator"));
        }
        return Ok(Q::new(n, d));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let e: i32 = s[pos + 1..].parse().map_err(|_| bad("bad exponent"))?;
            (&s[..pos], e)
        }
        None => (s, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad("no digits"));
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad("not a number"));
    }
    let digits = format!("{int_part}{frac_part}");
    let mut value = Q::from_integer(digits.parse::<BigInt>().map_err(|_| bad("not a number"))?);
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    if scale >= 0 {
        value *= Q::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= Q::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if negative { -value } else { value })
}

/// Parses a comma-separated list of rationals.
pub fn parse_list(s: &str) -> Result<Vec<Q>> {
    s.split(',').map(parse_rational).collect()
}

pub fn abs(x: &Q) -> Q {
    x.abs()
}

/// Normalizes a list of non-negative integer weights into a distribution.
pub fn normalize_counts(counts: &[u64]) -> Vec<Q> {
    let total: u64 = counts.iter().sum();
    assert!(total > 0, "cannot normalize an all-zero weight vector");
    counts.iter().map(|&c| q(c as i64, total as i64)).collect()
}

pub fn sum<'a, I: IntoIterator<Item = &'a Q>>(items: I) -> Q {
    items.into_iter().fold(Q::zero(), |acc, x| acc + x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimals_and_fractions() {
        assert_eq!(parse_rational("0.9").unwrap(), q(9, 10));
        assert_eq!(parse_rational("3/4").unwrap(), q(3, 4));
        assert_eq!(parse_rational("1").unwrap(), q(1, 1));
        assert_eq!(parse_rational("1e-3").unwrap(), q(1, 1000));
        assert_eq!(parse_rational("-.5").unwrap(), q(-1, 2));
        assert_eq!(parse_rational("2.5E1").unwrap(), q(25, 1));
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn formats_with_denominator() {
        assert_eq!(format_rational(&q(2, 4)), "1/2");
        assert_eq!(format_rational(&q(3, 1)), "3/1");
        assert_eq!(format_rational(&Q::zero()), "0/1");
    }

    #[test]
    fn huge_rationals_convert() {
        let x = inv_pow2(2000) * from_int(BigInt::one() << 1999u32);
        assert!((to_f64(&x) - 0.5).abs() < 1e-15);
    }
}
