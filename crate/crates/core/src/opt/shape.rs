use std::fmt;

use crate::{BctError, Result};

/// Ordered composite of elementary BCT systems, associated left-nested.
///
/// The empty factor list is the trivial system `I`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SystemShape {
    factors: Vec<usize>,
}

impl SystemShape {
    pub fn trivial() -> Self {
        Self { factors: Vec::new() }
    }

    pub fn elementary(size: usize) -> Result<Self> {
        Self::new(vec![size])
    }

    pub fn new(factors: Vec<usize>) -> Result<Self> {
        if let Some(bad) = factors.iter().find(|&&d| d < 2) {
            return Err(BctError::InvalidShape(format!(
                "elementary sizes must be at least 2, got {bad}"
            )));
        }
        Ok(Self { factors })
    }

    /// `A^{⊠n}` for an elementary system of size `size`.
    pub fn repeated(size: usize, n: usize) -> Result<Self> {
        Self::new(vec![size; n])
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn is_trivial(&self) -> bool {
        self.factors.is_empty()
    }

    /// Closed form: `1`, `D_1`, or `2^{n-1} ∏ D_k`.
    ///
    /// Panics if the size does not fit in a `u128`; see [`Self::checked_size`].
    pub fn size(&self) -> u128 {
        self.checked_size().expect("system size overflows u128")
    }

    pub fn checked_size(&self) -> Option<u128> {
        if self.factors.is_empty() {
            return Some(1);
        }
        let mut total: u128 = 1;
        for &d in &self.factors {
            total = total.checked_mul(d as u128)?;
        }
        let shift = (self.factors.len() - 1) as u32;
        if shift >= 128 || total.leading_zeros() < shift {
            return None;
        }
        Some(total << shift)
    }

    /// Evaluates `D_{AB} = 2 D_A D_B` left-nested, with `I` as identity.
    pub fn size_recursive(&self) -> u128 {
        self.factors.iter().fold(1u128, |acc, &d| {
            if acc == 1 {
                d as u128
            } else {
                2 * acc * d as u128
            }
        })
    }

    pub fn compose(&self, other: &SystemShape) -> SystemShape {
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        SystemShape { factors }
    }

    /// Factors `range` as a shape of their own.
    pub fn slice(&self, range: std::ops::Range<usize>) -> SystemShape {
        SystemShape {
            factors: self.factors[range].to_vec(),
        }
    }

    /// Number of distinct local strings, `∏ D_k`.
    pub fn local_count(&self) -> u128 {
        self.factors.iter().map(|&d| d as u128).product()
    }
}

impl fmt::Display for SystemShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "I");
        }
        let parts: Vec<String> = self.factors.iter().map(|d| d.to_string()).collect();
        write!(f, "{}", parts.join("x"))
    }
}

pub fn compose_shapes(a: &SystemShape, b: &SystemShape) -> SystemShape {
    a.compose(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composite_sizes() {
        let two = SystemShape::elementary(2).unwrap();
        let three = SystemShape::elementary(3).unwrap();
        assert_eq!(compose_shapes(&two, &two).size(), 8);
        assert_eq!(compose_shapes(&three, &SystemShape::trivial()).size(), 3);
        assert_eq!(compose_shapes(&SystemShape::trivial(), &three), three);
        // bibit register of three bibits: 2^{2M-1}
        assert_eq!(SystemShape::repeated(2, 3).unwrap().size(), 32);
        assert_eq!(SystemShape::trivial().size(), 1);
    }

    #[test]
    fn rejects_degenerate_factors() {
        assert!(SystemShape::new(vec![2, 1]).is_err());
        assert!(SystemShape::elementary(0).is_err());
    }

    #[test]
    fn overflow_is_detected() {
        let huge = SystemShape::repeated(1 << 20, 8).unwrap();
        assert!(huge.checked_size().is_none());
    }
}
