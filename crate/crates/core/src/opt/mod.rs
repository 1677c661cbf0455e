//! Systems, pure-state labels, states, effects and the operational norm.
//!
//! Every stored [`PureIndex`] is *left-nested*: the label
//! `((..((i1 i2)_{s1} i3)_{s2} ..) in)_{s(n-1)}` is kept as the local vector
//! `(i1, .., in)` plus the sign vector `(s1, .., s(n-1))`. Other association
//! trees only appear transiently through [`reassociate`].

mod index;
mod norm;
mod shape;
mod state;

pub use index::{bipartition, join, reassociate, AssocTree, PureIndex, Sign, TreeIndex};
pub use norm::{op_norm, op_norm_lp_oracle, optimal_binary_test};
pub use shape::{compose_shapes, SystemShape};
pub use state::{compose_states, discrimination_test, Effect, ObservationTest, State, StateDelta};

/// Which side of a bipartition an operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}
