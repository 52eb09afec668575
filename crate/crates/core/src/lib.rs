//! Exact desk-scale simulator and analysis toolkit for linear-optical GHZ
//! generation between nearby nodes.
//!
//! Each of N nodes entangles a spin qubit with a photonic dual-rail qubit;
//! the photons interfere pairwise on a ring of beam splitters and are watched
//! by non-photon-number-resolving detectors. The crate provides:
//!
//! - [`hilbert`]: sparse hybrid spin ⊗ photon states, the beam-splitter ring
//!   rewrite, and photon trace-out against diagonal detector operators;
//! - [`analytic`]: the closed-form bound on F·p_succ, the optimal success
//!   element with its probability and fidelity, and a generic evaluator;
//! - [`optics`]: click-pattern enumeration, per-pattern probabilities and
//!   conditional states under detector efficiency η, GHZ-like phase
//!   classification, and success totals;
//! - [`povm_opt`]: projected-gradient re-derivation of the optimum under a
//!   fixed success probability, a brute-force grid oracle, and a Choi-state
//!   cross-check of both objective forms;
//! - [`rates`]: fiber transmission, protocol timing, and generation-rate
//!   sweeps versus distance.

pub mod analytic;
pub mod error;
pub mod hilbert;
mod linalg;
pub mod optics;
pub mod povm_opt;
pub mod rates;

pub use error::{Error, Result};
