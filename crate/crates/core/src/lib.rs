//! Simulation and verification laboratory for an n-player weight-transfer
//! ("bankruptcy") game and the 1-D random walks it reduces to.
//!
//! The crate has five public modules:
//!
//! * [`game`] — the coupled n-player game with local (unbounded) and
//!   semi-local (total-capped) rules.
//! * [`walk`] — exact analysis of integer random walks: hitting
//!   probabilities, expected absorption times and the first-passage
//!   recurrence, all by direct linear solves.
//! * [`bounds`] — closed-form bound calculators paired with the quantities
//!   they bound.
//! * [`tail`] — exact binomial lower-tail probabilities and the
//!   anti-concentration check built on them.
//! * [`mc`] — a seed-deterministic Monte Carlo harness producing estimates
//!   with normal-approximation confidence intervals.
//!
//! [`verify`] wires the exact solvers and bound calculators into grid
//! checks used by the command-line front end and the acceptance suite.

pub mod bounds;
pub mod game;
pub mod mc;
mod solve;
pub mod tail;
pub mod verify;
pub mod walk;
