//! Capacity bounds, symmetrizability tests, and Monte-Carlo coding
//! simulations for two-user discrete memoryless broadcast channels whose
//! statistics are governed by a state that varies arbitrarily over time,
//! with the encoder observing the state causally.
//!
//! The crate is organized around a pipeline:
//!
//! * [`prob`] — pmfs, entropy, empirical types, letter typicality;
//! * [`channel`] — state-dependent broadcast channels, encoding strategies,
//!   and the joints they induce;
//! * [`regions`] — rate-region arithmetic and the inner/outer bound engine
//!   for compound, arbitrarily varying, and random-parameter models;
//! * [`symmetrizability`] — the linear-feasibility test that separates
//!   deterministic-code from random-code capacity;
//! * [`sim`] — finite-blocklength superposition codes, typicality decoders,
//!   jammers, permutation robustification, code elimination, and prefixing;
//! * [`bsbc`] — closed-form regions and figure data for the binary
//!   symmetric broadcast-channel families used throughout the test suite.

pub mod error;
pub mod prob;
pub(crate) mod lp;
pub mod channel;
pub mod regions;
pub mod symmetrizability;
pub mod sim;
pub mod bsbc;

pub use error::{Error, Result};
