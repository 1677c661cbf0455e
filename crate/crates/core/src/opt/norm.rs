use num_traits::{One, Signed, Zero};

use super::{Effect, ObservationTest, PureIndex, StateDelta};
use crate::{BctError, Result, Q};

/// Operational norm of a state difference.
///
/// Pure states of a simplicial theory are jointly perfectly discriminable, so
/// the optimal binary test is diagonal and the norm is the ℓ1 norm of the
/// simplex coordinates.
pub fn op_norm(delta: &StateDelta) -> Q {
    delta.iter().map(|(_, w)| w.abs()).sum()
}

/// Independent evaluation of `sup (a0 - a1 | δ)` over binary tests with
/// `a0 + a1 = e` and `0 ≤ a_i ≤ e`.
///
/// The objective `Σ_x (2 a0(x) - 1) δ(x)` is separable over pure indices and
/// linear in each `a0(x) ∈ [0, 1]`, so each coordinate is optimized at the
/// better of the two box vertices. Every pure index of the shape is visited,
/// including those where `δ` vanishes.
pub fn op_norm_lp_oracle(delta: &StateDelta, bound: u128) -> Result<Q> {
    let size = delta.shape().size();
    if size > bound {
        return Err(BctError::OracleBound { size, bound });
    }
    let mut value = Q::zero();
    for x in PureIndex::all(delta.shape()) {
        let d = delta.weight(&x);
        let at_one = d.clone();
        let at_zero = -d;
        value += if at_one >= at_zero { at_one } else { at_zero };
    }
    Ok(value)
}

/// The binary test `{a0, a1}` attaining the operational norm of `δ`.
pub fn optimal_binary_test(delta: &StateDelta) -> ObservationTest {
    let shape = delta.shape().clone();
    let (plus, minus): (Vec<_>, Vec<_>) = PureIndex::all(&shape)
        .map(|x| {
            let positive = delta.weight(&x).is_positive();
            (x, positive)
        })
        .partition(|(_, positive)| *positive);
    let a0 = Effect::new(shape.clone(), plus.into_iter().map(|(x, _)| (x, Q::one())))
        .expect("0/1 effect");
    let a1 = Effect::new(shape, minus.into_iter().map(|(x, _)| (x, Q::one()))).expect("0/1 effect");
    ObservationTest::new(vec![a0, a1]).expect("complementary effects")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opt::{State, SystemShape};
    use crate::rational::q;
    use crate::DEFAULT_ORACLE_BOUND;

    fn bit() -> SystemShape {
        SystemShape::elementary(2).unwrap()
    }

    #[test]
    fn norm_examples() {
        let x = State::pure(bit(), PureIndex::single(0)).unwrap();
        let y = State::pure(bit(), PureIndex::single(1)).unwrap();
        let zero = StateDelta::zero(bit());
        assert_eq!(op_norm(&zero), Q::zero());
        assert_eq!(op_norm_lp_oracle(&zero, DEFAULT_ORACLE_BOUND).unwrap(), Q::zero());

        let d = StateDelta::difference(&x, &y).unwrap();
        assert_eq!(op_norm(&d), q(2, 1));
        assert_eq!(op_norm_lp_oracle(&d, DEFAULT_ORACLE_BOUND).unwrap(), q(2, 1));

        let half = d.scaled(&q(1, 2));
        assert_eq!(op_norm(&half), Q::one());
        assert_eq!(op_norm_lp_oracle(&half, DEFAULT_ORACLE_BOUND).unwrap(), Q::one());
    }

    #[test]
    fn equal_positive_weights() {
        let sh = SystemShape::new(vec![2, 2]).unwrap();
        let d = StateDelta::new(sh.clone(), PureIndex::all(&sh).map(|x| (x, q(1, 16)))).unwrap();
        assert_eq!(op_norm_lp_oracle(&d, DEFAULT_ORACLE_BOUND).unwrap(), q(1, 2));
    }

    #[test]
    fn optimal_test_attains_norm() {
        let d = StateDelta::new(
            bit(),
            [(PureIndex::single(0), q(1, 3)), (PureIndex::single(1), q(-1, 5))],
        )
        .unwrap();
        let test = optimal_binary_test(&d);
        let value = test.effects()[0].apply_delta(&d) - test.effects()[1].apply_delta(&d);
        assert_eq!(value, op_norm(&d));
    }

    #[test]
    fn oracle_respects_bound() {
        let sh = SystemShape::repeated(2, 4).unwrap();
        assert_eq!(sh.size(), 128);
        let d = StateDelta::zero(sh);
        assert!(matches!(
            op_norm_lp_oracle(&d, DEFAULT_ORACLE_BOUND),
            Err(BctError::OracleBound { size: 128, .. })
        ));
    }
}
