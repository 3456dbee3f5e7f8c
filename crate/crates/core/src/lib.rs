//! Permutations as products of adjacent transpositions, and their quantum
//! circuit counterparts.
//!
//! The crate covers:
//!
//! - [`perm`]: permutation arrays, transposition words, the tree-ordered
//!   (Steinhaus–Johnson–Trotter) enumeration of `S_N`, decomposition,
//!   ranking digits and uniform sampling.
//! - [`circuit`]: compilation of adjacent transpositions on `2^n` symbols
//!   into X / CNOT / multi-controlled-X gates, lowering of pattern-controlled
//!   gates, gate counts and OpenQASM 3 emission.
//! - [`sim`]: a dense statevector simulator used both as backend and oracle.
//! - [`sampling`]: the ancilla-register sampling circuit and its restricted
//!   variants.
//! - [`corona`]: corona products and the labeled graph of `S_N`.
//! - [`randtest`]: the two-sample randomization test, simulated and classical.

pub mod circuit;
pub mod corona;
pub mod error;
pub mod perm;
pub mod randtest;
pub mod rng;
pub mod sampling;
pub mod sim;

pub use error::{Error, Result};
