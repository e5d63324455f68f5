//! Simulator and analysis toolkit for a two-way quantum number distribution
//! protocol built on shared entanglement and Bell-state measurements.
//!
//! Two parties each hold a secret qubit preparation and perform Bell-state
//! measurements against the halves of a stream of entangled pairs. The joint
//! outcome statistics let each party solve for the other's preparation, so
//! both sides simultaneously send and receive a pair of real numbers; the
//! decimal digits of those numbers form a shared key. Eavesdropping flattens
//! the outcome statistics and corrupts the recovered digits, which is what
//! the protocol's security checks look for.
//!
//! The crate is organized in layers:
//!
//! - [`qmath`] — dense state vectors and generalized Bell bases for
//!   d-dimensional systems, including the brute-force Bell-basis expansion
//!   that every closed form is checked against.
//! - [`analytic`] — closed-form amplitude and probability tables for the
//!   honest setup and for the entangle-measure attack.
//! - [`channel`] — fiber loss and a depolarizing error mixture.
//! - [`adversary`] — intercept-resend and entangle-measure attack models,
//!   plus the eavesdropper's own parameter estimates.
//! - [`sampling`] — seeded Monte Carlo generation of measurement records.
//! - [`estimator`] — probability estimation, inversion back to preparation
//!   parameters, the count-fluctuation bound, and digit extraction.
//! - [`protocol`] — the five-step two-party session as a deterministic state
//!   machine over an announcement transcript.

pub mod adversary;
pub mod analytic;
pub mod channel;
pub mod estimator;
pub mod protocol;
pub mod qmath;
pub mod sampling;
pub mod tables;

mod error;

pub use error::{Error, Result};
