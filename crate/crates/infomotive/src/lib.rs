//! Episodic reinforcement learning with information-theoretic intrinsic
//! rewards.
//!
//! The crate combines four pieces:
//!
//! - [`infotheory`]: binning plus plug-in entropy and one-step predictive
//!   information (the mutual information of consecutive sensor symbols),
//!   including a random-pairing approximation for high-dimensional traces.
//! - [`pgpe`]: a parameter-exploring policy-gradient optimizer that
//!   searches directly in controller parameter space via symmetric
//!   Gaussian perturbations.
//! - [`policy`] and [`envs`]: fixed-topology tanh controllers and two
//!   desk-scale environments (cart-pole swing-up and an abstract six-leg
//!   crawler with locomotion and self-rescue tasks).
//! - [`reward`] and [`harness`]: the scaled combination of extrinsic and
//!   intrinsic rewards, and a declarative gamma-sweep experiment runner
//!   with seeded, byte-reproducible outputs.

pub mod envs;
pub mod error;
pub mod harness;
pub mod infotheory;
pub mod pgpe;
pub mod policy;
pub mod reward;

pub use error::{Error, Result};
