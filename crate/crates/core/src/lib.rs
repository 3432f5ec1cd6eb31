//! Monte Carlo toolkit for mutual percolation on two fully interdependent
//! networks whose one-to-one dependency map has tunable randomness.
//!
//! The crate covers the full pipeline: topology generation ([`graphs`]),
//! dependency-map construction and permutation combinatorics ([`depmap`]),
//! approximate-entropy scoring of map randomness ([`entropy`]), the cascading
//! failure process itself ([`cascade`]), and sweep/bisection machinery for
//! locating critical points and classifying transition order ([`analysis`]).
//!
//! Everything is deterministic given a master seed: per-realization seeds are
//! derived by hashing, so results are identical whether work runs on one
//! thread or many (see [`exec`]).

pub mod analysis;
pub mod cascade;
pub mod depmap;
pub mod entropy;
pub mod error;
pub mod exec;
pub mod graphs;
pub mod seed;

pub use error::{Error, Result};
