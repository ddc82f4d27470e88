//! Lindblad models of qutrit synthetic baths and their steady-state thermodynamics.
//!
//! Module layout:
//! - [`operator`]: dense complex operators, tensor products, partial traces, spectral tools.
//! - [`lindblad`]: jump channels, Liouvillian construction, RK4 evolution and steady states.
//! - [`thermo`]: heat and entropy fluxes, power, entropy production, efficiencies.
//! - [`scenarios`]: the single-qutrit, two-qutrit, engine and driven-qutrit configurations.
//! - [`config`], [`sweep`], [`verify`]: configuration files, grid sweeps and the check suite
//!   behind the command-line tool.

// `!(x > 0.0)` is used deliberately so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod lindblad;
pub mod operator;
pub mod scenarios;
pub mod sweep;
pub mod thermo;
pub mod tolerance;
pub mod verify;

pub use error::{Error, Result};
