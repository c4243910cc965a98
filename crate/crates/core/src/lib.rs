//! Simulation and verification toolkit for layered quantum key distribution
//! and secret sharing over three-party qudit networks.
//!
//! The crate is organised bottom-up:
//!
//! * [`qudit`] holds pure-state linear algebra: state construction, bases,
//!   exact and sampled measurement, and tensor-factorization tests.
//! * [`adversary`] models intercept-resend eavesdropping and decoy pulses.
//! * [`protocol`] runs the round-by-round state machines for the six
//!   protocols and extracts keys and secrets from sifted rounds.
//! * [`analysis`] checks correlation tables against the exact oracle,
//!   computes rates and error fractions, and decides whether to abort.
//! * [`cli`] backs the `lqkd` binary.

pub mod adversary;
pub mod analysis;
pub mod cli;
pub mod protocol;
pub mod qudit;

pub use num_complex::Complex64;
