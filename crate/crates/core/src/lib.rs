//! Excess-risk laboratory.
//!
//! Conjugate Gaussian linear regression, information-theoretic excess-risk
//! bounds, finite minimax games between learners and worlds, and exact
//! enumeration for the threshold class on a finite grid.

pub mod bounds;
pub mod config;
pub mod error;
pub mod experiments;
pub mod game;
pub mod linear;
pub mod prob;
pub mod rates;
pub mod risk;
pub mod vc;

pub use error::{Error, Result};
