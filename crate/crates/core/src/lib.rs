//! Difficulty-aware group-relative policy optimization (GRPO) on a synthetic
//! verifiable-reward task bank.
//!
//! This crate holds the algorithmic core and is `no_std` (alloc required):
//! everything here is a pure function of its inputs and a seed, so whole
//! experiments replay bit-for-bit. IO, file formats and the command-line
//! surface live in the companion `dgrpo` crate.
//!
//! Module map:
//!
//! - [`reweight`]: accuracy-to-weight curves that scale advantages by
//!   difficulty.
//! - [`advantage`]: group-relative advantage schemes over binary reward
//!   groups (std-normalized, reweighted, or both).
//! - [`taskbank`]: the synthetic task environment with a controlled
//!   difficulty knob, exact-match rewards and difficulty-hint injection.
//! - [`policy`]: a linear-softmax sequence policy with rollout sampling, the
//!   clipped surrogate objective, a k3 KL estimator and analytic gradients.
//! - [`curation`]: offline multi-k accuracy estimation, accuracy histograms
//!   and band-based stage filtering.
//! - [`trainer`]: the two-stage curriculum loop with per-step metrics and
//!   greedy evaluation.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod advantage;
pub mod curation;
pub mod error;
pub mod matrix;
pub mod policy;
pub mod reweight;
pub mod rng;
pub mod taskbank;
pub mod trainer;

pub use error::{CoreError, Result};
