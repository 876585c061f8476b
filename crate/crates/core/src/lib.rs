//! Simulation and estimation toolkit for matrix multiplicative cascades and
//! the bindweed random walk in random environment on trees.
//!
//! The library is organized around a few building blocks:
//!
//! * [`tree`] — rooted trees described by branching functions, with growth
//!   rates and branching-number estimates computed without materializing the
//!   tree;
//! * [`law`] / [`env`] — probability laws on positive matrices and on jump
//!   rates, and the seed-deterministic quenched environment that assigns an
//!   i.i.d. sample to every tree edge;
//! * [`lyap`] — Monte Carlo estimation of the moment growth rate `k(s)` of
//!   random matrix products and of the classification parameter
//!   `λ = inf_{s in [0,1]} k(s)`;
//! * [`cascade`] — exact level-by-level streaming of the matrix
//!   multiplicative cascade `ψ_n` and its integrated series `Z_n`;
//! * [`walk`] — the bindweed continuous-time walk itself, plus exact
//!   stationary measures on finite truncations;
//! * [`chaos`] — particle iteration of the matrix chaos fixed-point equation.
//!
//! Everything that consumes randomness derives its streams from explicit
//! 64-bit seeds, so any experiment is replayable bit for bit regardless of
//! thread count or query order.

pub mod cascade;
pub mod chaos;
pub mod env;
pub mod error;
pub mod law;
pub mod lyap;
pub mod matrix;
pub mod numeric;
pub mod seed;
pub mod tree;
pub mod walk;

pub use error::{Error, Result};
pub use matrix::Matrix;
