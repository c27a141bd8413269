//! Finite-blocklength Monte Carlo machinery: random strategy codebooks,
//! type-based joint-typicality decoders, oblivious state selectors,
//! permuted codes and their reduction to small uniform families, and
//! index-prefixed two-stage codes.
//!
//! Everything is driven by explicit seeds: a trial's verdict depends only on
//! `(seed, trial index)`, never on thread count or iteration order, so runs
//! are reproducible and parallelism cannot change totals.

mod codebook;
mod jammer;
mod permute;
mod prefix;
mod rng;
mod run;
mod typicality;
mod words;

pub use codebook::{rate_to_count, Codebook, Encoder};
pub use jammer::JammerSpec;
pub use permute::{eliminate, Permutation, ReducedFamily};
pub use prefix::{RepetitionIndexCode, TwoStageCode};
pub use run::{wilson_interval, RunStats, Simulation, TrialResult};
