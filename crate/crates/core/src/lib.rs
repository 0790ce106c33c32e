//! Geometric integration of periodic, non-autonomous linear systems
//! `ẋ = A(t)x + f(t)`.
//!
//! The crate is organised bottom-up:
//!
//! * [`dense`]: small dense matrices, `expm`, symplectic utilities.
//! * [`trig`]: exact algebra of trigonometric polynomials with base frequency Ω.
//! * [`lie`]: the Lie algebra of affine time-periodic vector fields `(A, f, α)`,
//!   its bracket, sub-algebra checks and the truncated BCH modified field.
//! * [`integrators`]: one-step methods on the extended phase space.
//! * [`rotor`]: the unbalanced rotor benchmark and its closed-form solution.
//! * [`cli`]: the `geomint` command-line front end.

pub mod cli;
pub mod dense;
pub mod error;
pub mod integrators;
pub mod lie;
pub mod rotor;
pub mod trig;

pub use error::{Error, Result};
