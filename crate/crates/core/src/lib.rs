//! Travelling waves of bistable reaction-diffusion equations and their
//! stability constants.
//!
//! The crate builds the wave profile of `v_t = nu v_xx + b f(v)`, computes the
//! functional-inequality constant `kappa` and everything derived from it
//! (`kappa_*`, `C_*`, `c_*`), checks the weighted Hardy and Poincare
//! inequalities on a truncated grid, and simulates the perturbation equation
//! with phase adaptation, both deterministically and with multiplicative
//! Q-Wiener noise.

pub mod cli;
pub mod config;
pub mod constants;
pub mod det;
pub mod error;
pub mod grid;
pub mod noise;
pub mod reaction;
pub mod report;
pub mod spde;
pub mod suite;
pub mod testfns;
pub mod wave;

pub use error::{Error, Result};
pub use grid::{Boundary, Field, GridSpec, Norms};
pub use reaction::ReactionSpec;
pub use report::{Check, ValidationReport};
pub use wave::{WaveIntegrals, WaveParams, WaveProfile};
