use std::fmt;
use std::ops::Mul;

use super::SystemShape;
use crate::{BctError, Result};

/// Relative sign carried by every binary composition. `Plus < Minus` in the
/// canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub const ALL: [Sign; 2] = [Sign::Plus, Sign::Minus];

    pub fn bit(self) -> u128 {
        match self {
            Sign::Plus => 0,
            Sign::Minus => 1,
        }
    }

    pub fn from_bit(bit: u128) -> Sign {
        if bit & 1 == 0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }

    pub fn from_char(c: char) -> Option<Sign> {
        match c {
            '+' => Some(Sign::Plus),
            '-' => Some(Sign::Minus),
            _ => None,
        }
    }
}

impl Mul for Sign {
    type Output = Sign;

    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

/// Left-nested pure-state label: local indices (0-based) and the
/// `n - 1` relative signs.
///
/// The derived ordering is the canonical one: locals lexicographically
/// (mixed radix, most significant first), then signs with `+ < -`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PureIndex {
    locals: Vec<usize>,
    signs: Vec<Sign>,
}

impl PureIndex {
    pub fn new(shape: &SystemShape, locals: Vec<usize>, signs: Vec<Sign>) -> Result<Self> {
        let x = Self { locals, signs };
        x.check(shape)?;
        Ok(x)
    }

    /// Label of the single pure state of the trivial system.
    pub fn unit() -> Self {
        Self {
            locals: Vec::new(),
            signs: Vec::new(),
        }
    }

    /// Pure state `i` of an elementary system.
    pub fn single(local: usize) -> Self {
        Self {
            locals: vec![local],
            signs: Vec::new(),
        }
    }

    #[cfg(test)]
    pub(crate) fn from_parts(locals: Vec<usize>, signs: Vec<Sign>) -> Self {
        debug_assert_eq!(signs.len(), locals.len().saturating_sub(1));
        Self { locals, signs }
    }

    pub fn locals(&self) -> &[usize] {
        &self.locals
    }

    pub fn signs(&self) -> &[Sign] {
        &self.signs
    }

    pub fn factors(&self) -> usize {
        self.locals.len()
    }

    pub fn check(&self, shape: &SystemShape) -> Result<()> {
        let n = shape.len();
        if self.locals.len() != n || self.signs.len() != n.saturating_sub(1) {
            return Err(BctError::IndexMismatch(format!(
                "{} locals and {} signs for shape {shape}",
                self.locals.len(),
                self.signs.len()
            )));
        }
        for (k, (&i, &d)) in self.locals.iter().zip(shape.factors()).enumerate() {
            if i >= d {
                return Err(BctError::IndexMismatch(format!(
                    "local index {} at factor {} exceeds size {d}",
                    i + 1,
                    k + 1
                )));
            }
        }
        Ok(())
    }

    /// Position in the canonical linear order of `PureIndex(shape)`.
    pub fn rank(&self, shape: &SystemShape) -> u128 {
        debug_assert!(self.check(shape).is_ok());
        let local = self
            .locals
            .iter()
            .zip(shape.factors())
            .fold(0u128, |acc, (&i, &d)| acc * d as u128 + i as u128);
        let sign = self.signs.iter().fold(0u128, |acc, s| (acc << 1) | s.bit());
        (local << self.signs.len()) | sign
    }

    pub fn unrank(shape: &SystemShape, rank: u128) -> Result<Self> {
        let size = shape.size();
        if rank >= size {
            return Err(BctError::IndexMismatch(format!(
                "rank {rank} out of range for shape {shape} of size {size}"
            )));
        }
        let n = shape.len();
        let sign_bits = n.saturating_sub(1);
        let mut signs = vec![Sign::Plus; sign_bits];
        for (k, s) in signs.iter_mut().enumerate() {
            *s = Sign::from_bit(rank >> (sign_bits - 1 - k));
        }
        let mut local = rank >> sign_bits;
        let mut locals = vec![0usize; n];
        for (slot, &d) in locals.iter_mut().zip(shape.factors()).rev() {
            *slot = (local % d as u128) as usize;
            local /= d as u128;
        }
        Ok(Self { locals, signs })
    }

    /// All pure indices of `shape` in canonical order.
    pub fn all(shape: &SystemShape) -> impl Iterator<Item = PureIndex> + '_ {
        (0..shape.size()).map(move |r| PureIndex::unrank(shape, r).expect("rank in range"))
    }

    /// Parses the `i1,...,in|s1...s(n-1)` label used by the text formats
    /// (locals are 1-based).
    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        let (locals, signs) = text
            .split_once('|')
            .ok_or_else(|| format!("missing `|` in label `{text}`"))?;
        let locals: Vec<usize> = if locals.trim().is_empty() {
            Vec::new()
        } else {
            locals
                .split(',')
                .map(|t| match t.trim().parse::<usize>() {
                    Ok(v) if v >= 1 => Ok(v - 1),
                    _ => Err(format!("bad local index `{t}`")),
                })
                .collect::<std::result::Result<_, _>>()?
        };
        let signs: Vec<Sign> = signs
            .trim()
            .chars()
            .map(|c| Sign::from_char(c).ok_or_else(|| format!("bad sign `{c}`")))
            .collect::<std::result::Result<_, _>>()?;
        if signs.len() != locals.len().saturating_sub(1) {
            return Err(format!(
                "{} signs given for {} locals",
                signs.len(),
                locals.len()
            ));
        }
        Ok(Self { locals, signs })
    }
}

impl fmt::Display for PureIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let locals: Vec<String> = self.locals.iter().map(|i| (i + 1).to_string()).collect();
        let signs: String = self.signs.iter().map(|s| s.as_char()).collect();
        write!(f, "{}|{}", locals.join(","), signs)
    }
}

/// Left-nested label of `(left right)_s`.
///
/// Moving each factor of `right` under the outer composition with the
/// association law gives the signs `s, s·t1, .., s·t(m-1)` after those of
/// `left`. The trivial system is the identity on either side.
pub fn join(left: &PureIndex, right: &PureIndex, s: Sign) -> PureIndex {
    if left.locals.is_empty() {
        return right.clone();
    }
    if right.locals.is_empty() {
        return left.clone();
    }
    let mut locals = Vec::with_capacity(left.locals.len() + right.locals.len());
    locals.extend_from_slice(&left.locals);
    locals.extend_from_slice(&right.locals);
    let mut signs = Vec::with_capacity(locals.len() - 1);
    signs.extend_from_slice(&left.signs);
    signs.push(s);
    signs.extend(right.signs.iter().map(|&t| s * t));
    PureIndex { locals, signs }
}

/// Writes a left-nested label as `(L R)_s` with `L` over the first `cut`
/// factors. Inverse of [`join`].
pub fn bipartition(x: &PureIndex, cut: usize) -> Result<(PureIndex, PureIndex, Sign)> {
    let n = x.locals.len();
    if cut == 0 || cut >= n {
        return Err(BctError::CutOutOfRange { cut, factors: n });
    }
    let s = x.signs[cut - 1];
    let left = PureIndex {
        locals: x.locals[..cut].to_vec(),
        signs: x.signs[..cut - 1].to_vec(),
    };
    let right = PureIndex {
        locals: x.locals[cut..].to_vec(),
        signs: x.signs[cut..].iter().map(|&t| s * t).collect(),
    };
    Ok((left, right, s))
}

/// Binary association tree over an ordered factor list.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AssocTree {
    Leaf,
    Node(Box<AssocTree>, Box<AssocTree>),
}

impl AssocTree {
    pub fn node(left: AssocTree, right: AssocTree) -> Self {
        AssocTree::Node(Box::new(left), Box::new(right))
    }

    pub fn leaves(&self) -> usize {
        match self {
            AssocTree::Leaf => 1,
            AssocTree::Node(l, r) => l.leaves() + r.leaves(),
        }
    }

    /// `(..((A1 A2) A3) ..) An`, the storage convention.
    pub fn left_nested(n: usize) -> Self {
        assert!(n >= 1, "a tree needs at least one leaf");
        (1..n).fold(AssocTree::Leaf, |acc, _| AssocTree::node(acc, AssocTree::Leaf))
    }

    /// `A1 (A2 (.. (A(n-1) An)))`.
    pub fn right_nested(n: usize) -> Self {
        assert!(n >= 1, "a tree needs at least one leaf");
        (1..n).fold(AssocTree::Leaf, |acc, _| AssocTree::node(AssocTree::Leaf, acc))
    }

    /// Every tree with `n` leaves (Catalan many).
    pub fn all(n: usize) -> Vec<AssocTree> {
        if n == 1 {
            return vec![AssocTree::Leaf];
        }
        let mut out = Vec::new();
        for k in 1..n {
            for l in AssocTree::all(k) {
                for r in AssocTree::all(n - k) {
                    out.push(AssocTree::node(l.clone(), r));
                }
            }
        }
        out
    }
}

/// Pure-state label written against an arbitrary association tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TreeIndex {
    Leaf(usize),
    Node(Box<TreeIndex>, Box<TreeIndex>, Sign),
}

impl TreeIndex {
    /// Builds the label from locals and signs listed in in-order: sign `k`
    /// belongs to the node separating leaf `k` from leaf `k + 1`. For the
    /// left-nested tree this is exactly the stored sign vector.
    pub fn from_in_order(tree: &AssocTree, locals: &[usize], signs: &[Sign]) -> Result<Self> {
        let n = tree.leaves();
        if locals.len() != n || signs.len() != n - 1 {
            return Err(BctError::TreeMismatch {
                from: n,
                to: n,
                index: locals.len(),
            });
        }
        Ok(Self::build(tree, locals, signs))
    }

    fn build(tree: &AssocTree, locals: &[usize], signs: &[Sign]) -> Self {
        match tree {
            AssocTree::Leaf => TreeIndex::Leaf(locals[0]),
            AssocTree::Node(l, r) => {
                let k = l.leaves();
                TreeIndex::Node(
                    Box::new(Self::build(l, &locals[..k], &signs[..k - 1])),
                    Box::new(Self::build(r, &locals[k..], &signs[k..])),
                    signs[k - 1],
                )
            }
        }
    }

    /// Splits a left-nested label along `tree`.
    pub fn from_left_nested(x: &PureIndex, tree: &AssocTree) -> Result<Self> {
        if tree.leaves() != x.factors() {
            return Err(BctError::TreeMismatch {
                from: tree.leaves(),
                to: tree.leaves(),
                index: x.factors(),
            });
        }
        Ok(match tree {
            AssocTree::Leaf => TreeIndex::Leaf(x.locals[0]),
            AssocTree::Node(l, r) => {
                let (lx, rx, s) = bipartition(x, l.leaves())?;
                TreeIndex::Node(
                    Box::new(Self::from_left_nested(&lx, l)?),
                    Box::new(Self::from_left_nested(&rx, r)?),
                    s,
                )
            }
        })
    }

    pub fn to_left_nested(&self) -> PureIndex {
        match self {
            TreeIndex::Leaf(i) => PureIndex::single(*i),
            TreeIndex::Node(l, r, s) => join(&l.to_left_nested(), &r.to_left_nested(), *s),
        }
    }

    pub fn tree(&self) -> AssocTree {
        match self {
            TreeIndex::Leaf(_) => AssocTree::Leaf,
            TreeIndex::Node(l, r, _) => AssocTree::node(l.tree(), r.tree()),
        }
    }

    /// Locals and signs in in-order.
    pub fn in_order(&self) -> (Vec<usize>, Vec<Sign>) {
        let mut locals = Vec::new();
        let mut signs = Vec::new();
        self.walk(&mut locals, &mut signs);
        (locals, signs)
    }

    fn walk(&self, locals: &mut Vec<usize>, signs: &mut Vec<Sign>) {
        match self {
            TreeIndex::Leaf(i) => locals.push(*i),
            TreeIndex::Node(l, r, s) => {
                l.walk(locals, signs);
                signs.push(*s);
                r.walk(locals, signs);
            }
        }
    }
}

/// Re-expresses a label given against `from` as a label against `to`.
///
/// Both labels list their signs in in-order (see
/// [`TreeIndex::from_in_order`]); locals are unchanged.
pub fn reassociate(x: &PureIndex, from: &AssocTree, to: &AssocTree) -> Result<PureIndex> {
    if from.leaves() != to.leaves() || from.leaves() != x.factors() {
        return Err(BctError::TreeMismatch {
            from: from.leaves(),
            to: to.leaves(),
            index: x.factors(),
        });
    }
    let canonical = TreeIndex::from_in_order(from, &x.locals, &x.signs)?.to_left_nested();
    let (locals, signs) = TreeIndex::from_left_nested(&canonical, to)?.in_order();
    Ok(PureIndex { locals, signs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;
    use Sign::{Minus, Plus};

    fn shape(f: &[usize]) -> SystemShape {
        SystemShape::new(f.to_vec()).unwrap()
    }

    /// One application of the association law at the root, left to right:
    /// `((a b)_{s1} c)_{s2} -> (a (b c)_{s1 s2})_{s1}`.
    fn rotate(t: &TreeIndex) -> Option<TreeIndex> {
        if let TreeIndex::Node(l, c, s2) = t {
            if let TreeIndex::Node(a, b, s1) = l.as_ref() {
                return Some(TreeIndex::Node(
                    a.clone(),
                    Box::new(TreeIndex::Node(b.clone(), c.clone(), *s1 * *s2)),
                    *s1,
                ));
            }
        }
        None
    }

    /// Applies `rotate` at every subtree position, returning all results.
    fn rotations_anywhere(t: &TreeIndex) -> Vec<TreeIndex> {
        let mut out: Vec<TreeIndex> = rotate(t).into_iter().collect();
        if let TreeIndex::Node(l, r, s) = t {
            for l2 in rotations_anywhere(l) {
                out.push(TreeIndex::Node(Box::new(l2), r.clone(), *s));
            }
            for r2 in rotations_anywhere(r) {
                out.push(TreeIndex::Node(l.clone(), Box::new(r2), *s));
            }
        }
        out
    }

    #[test]
    fn association_law_three_factors() {
        let left = AssocTree::left_nested(3);
        let right = AssocTree::right_nested(3);
        // ((i j)_+ k)_-  ->  (i (j k)_-)_+
        let x = PureIndex::from_parts(vec![0, 1, 2], vec![Plus, Minus]);
        let y = reassociate(&x, &left, &right).unwrap();
        assert_eq!(y.signs(), &[Plus, Minus]);
        // ((i j)_- k)_+  ->  (i (j k)_-)_-
        let x = PureIndex::from_parts(vec![0, 1, 2], vec![Minus, Plus]);
        let y = reassociate(&x, &left, &right).unwrap();
        assert_eq!(y.signs(), &[Minus, Minus]);
        assert_eq!(reassociate(&y, &right, &left).unwrap(), x);
    }

    #[test]
    fn same_tree_is_identity() {
        let sh = shape(&[2, 3, 2]);
        for t in AssocTree::all(3) {
            for x in PureIndex::all(&sh) {
                assert_eq!(reassociate(&x, &t, &t).unwrap(), x);
            }
        }
    }

    #[test]
    fn four_factor_left_to_right_is_a_sign_permutation() {
        let left = AssocTree::left_nested(4);
        let right = AssocTree::right_nested(4);
        let locals = vec![1, 0, 1, 0];
        let mut images = HashSet::new();
        for bits in 0..8u128 {
            let signs: Vec<Sign> = (0..3).map(|k| Sign::from_bit(bits >> (2 - k))).collect();
            let x = PureIndex::from_parts(locals.clone(), signs);
            let y = reassociate(&x, &left, &right).unwrap();
            assert_eq!(y.locals(), &locals[..]);
            assert_eq!(reassociate(&y, &right, &left).unwrap(), x);
            images.insert(y.signs().to_vec());
        }
        assert_eq!(images.len(), 8);
    }

    #[test]
    fn reassociation_is_bijective_for_all_tree_pairs() {
        for sizes in [vec![2, 3], vec![3, 2, 2], vec![2, 3, 2, 3]] {
            let sh = shape(&sizes);
            let trees = AssocTree::all(sizes.len());
            for from in &trees {
                for to in &trees {
                    let mut seen = HashSet::new();
                    for x in PureIndex::all(&sh) {
                        let y = reassociate(&x, from, to).unwrap();
                        assert!(y.check(&sh).is_ok());
                        assert_eq!(reassociate(&y, to, from).unwrap(), x);
                        seen.insert(y);
                    }
                    assert_eq!(seen.len() as u128, sh.size());
                }
            }
        }
    }

    #[test]
    fn canonical_form_is_invariant_under_local_moves() {
        // Coherence: rewriting any subtree with the association law does not
        // change the left-nested label.
        let sh = shape(&[2, 2, 2, 2, 2]);
        for tree in AssocTree::all(5) {
            for x in PureIndex::all(&sh).step_by(7) {
                let t = TreeIndex::from_left_nested(&x, &tree).unwrap();
                for moved in rotations_anywhere(&t) {
                    assert_eq!(moved.to_left_nested(), x);
                }
            }
        }
    }

    #[test]
    fn bipartition_examples_and_round_trip() {
        let x = PureIndex::from_parts(vec![0, 1], vec![Minus]);
        let (l, r, s) = bipartition(&x, 1).unwrap();
        assert_eq!((l.locals(), r.locals(), s), (&[0][..], &[1][..], Minus));

        let x = PureIndex::from_parts(vec![0, 1, 1], vec![Minus, Plus]);
        let (l, r, s) = bipartition(&x, 2).unwrap();
        assert_eq!(l, PureIndex::from_parts(vec![0, 1], vec![Minus]));
        assert_eq!(r, PureIndex::single(1));
        assert_eq!(s, Plus);

        let sh = shape(&[2, 2, 2, 2]);
        for x in PureIndex::all(&sh) {
            for cut in 1..4 {
                let (l, r, s) = bipartition(&x, cut).unwrap();
                assert_eq!(join(&l, &r, s), x);
            }
        }
        assert!(matches!(
            bipartition(&x, 0),
            Err(BctError::CutOutOfRange { .. })
        ));
        assert!(bipartition(&x, 3).is_err());
    }

    #[test]
    fn rank_unrank_and_order_agree() {
        let sh = shape(&[3, 2, 2]);
        let all: Vec<PureIndex> = PureIndex::all(&sh).collect();
        assert_eq!(all.len(), 48);
        for (r, x) in all.iter().enumerate() {
            assert_eq!(x.rank(&sh), r as u128);
        }
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        assert!(PureIndex::unrank(&sh, 48).is_err());
    }

    #[test]
    fn label_text_round_trip() {
        let x = PureIndex::from_parts(vec![0, 2, 1], vec![Plus, Minus]);
        assert_eq!(x.to_string(), "1,3,2|+-");
        assert_eq!(PureIndex::parse("1,3,2|+-").unwrap(), x);
        assert_eq!(PureIndex::parse("2|").unwrap(), PureIndex::single(1));
        assert!(PureIndex::parse("0|").is_err());
        assert!(PureIndex::parse("1,2|").is_err());
    }

    #[test]
    fn mismatched_trees_are_rejected() {
        let x = PureIndex::from_parts(vec![0, 0, 0], vec![Plus, Plus]);
        let err = reassociate(&x, &AssocTree::left_nested(3), &AssocTree::left_nested(4));
        assert!(matches!(err, Err(BctError::TreeMismatch { .. })));
    }
}
