//! Ising-type models on the Cayley tree of order two.
//!
//! The crate covers vertex arithmetic on the tree ([`tree`]), spin
//! configurations and Hamiltonians ([`model`]), ground states and the Peierls
//! condition ([`ground`]), contour decompositions ([`contour`]), exact
//! finite-volume Gibbs measures ([`gibbs`]) and a seeded Metropolis sampler
//! ([`mcmc`]).

pub mod config;
pub mod contour;
pub mod error;
pub mod gibbs;
pub mod ground;
pub mod mcmc;
pub mod model;
mod numerics;
pub mod tree;
pub mod validation;

pub use error::{Error, Result};
