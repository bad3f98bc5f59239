//! Recursive two-agent Bradley–Terry curation dynamics.
//!
//! An Owner curates model outputs for training, a Public curates what the
//! retrained model emits, and the curated outputs flow back into the data.
//! This crate simulates that loop two ways:
//!
//! - [`exact`]: the idealized measure recursion on a finite state space, where
//!   each iteration multiplies the current distribution by the Owner's and then
//!   the Public's BT weight.
//! - [`particle`]: the sampled loop with BT tournaments, a Gaussian mixture
//!   generator ([`gmm`]) and an accumulating dataset.
//!
//! [`diagnostics`] measures trajectories and [`checks`] turns the expected
//! limiting behaviour (consensus collapse, intersection survival, owner
//! dominance, coverage/initialization trade-offs, strategyproofness, order
//! dependence) into pass/fail verdicts.
//!
//! The crate is `no_std` and only needs `alloc`; file formats and the command
//! line live in the companion `curation-cli` crate.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bt;
pub mod checks;
pub mod diagnostics;
mod error;
pub mod exact;
pub mod gmm;
pub mod particle;
pub mod reward;
pub mod scenario;
pub mod seed;
pub mod space;

pub use error::{Error, Result};
pub use exact::{DiscreteDistribution, ExactRunConfig, Order};
pub use reward::{RegimeLabel, RewardField};
pub use space::{Region, StatePoint, StateSpace};
