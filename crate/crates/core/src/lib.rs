//! Unbiased black-box optimizers for OneMax and LeadingOnes.
//!
//! The crate provides the variation operators of the unbiased black-box
//! model, an engine that only lets optimizers see fitness values and
//! enforces operator arity, optimizers for binary, k-ary and unrestricted
//! arity, an exact certifier for operator unbiasedness, a log-space checker
//! for the sampling bound behind the unrestricted-arity optimizer, and a
//! reproducible parallel experiment harness.

pub mod algorithms;
pub mod bitcore;
pub mod bounds;
pub mod consistency;
pub mod error;
pub mod harness;
pub mod operators;
pub mod problems;
pub mod unbiasedness;

pub use bitcore::{BitString, HammingAutomorphism, Permutation};
pub use error::{Error, Result};
