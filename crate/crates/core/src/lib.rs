//! Exact-arithmetic laboratory for Bilocal Classical Theory (BCT).
//!
//! BCT is a classical (simplicial) operational theory in which composing two
//! systems of sizes `D_A` and `D_B` yields a system of size `2 D_A D_B`: every
//! parallel composition of pure states introduces a uniformly random sign
//! bit. This crate implements
//!
//! * the system/state/effect algebra with its sign-reassociation law
//!   ([`opt`]),
//! * deterministic channels, their action next to an ancilla and the
//!   digitizer that makes any system an obit ([`channels`]),
//! * dilations and the mother dilation with its steering channel
//!   ([`dilation`]),
//! * the measurement, hybrid and preparation entropies together with their
//!   regularizations ([`entropy`]),
//! * typical sets, the typical-set codec, the exact minimal compression rate
//!   and the permutation-restricted counterexample ([`compression`]).
//!
//! Probabilities are exact rationals ([`Q`]); entropies are `f64` and are
//! compared through an explicit tolerance ([`TOLERANCE`]).

pub mod channels;
pub mod compression;
pub mod dilation;
pub mod entropy;
mod error;
pub mod opt;
pub mod rational;
pub mod sample;

pub use error::{BctError, Result};
pub use rational::Q;

/// Absolute tolerance used for every floating-point entropy comparison.
pub const TOLERANCE: f64 = 1e-9;

/// Largest number of explicit weight entries any enumeration may allocate.
pub const DEFAULT_MEMORY_BOUND: u128 = 1 << 26;

/// Largest shape size the brute-force norm oracle accepts by default.
pub const DEFAULT_ORACLE_BOUND: u128 = 64;
