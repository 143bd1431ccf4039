//! Confound-invariant text classification.
//!
//! Latent topical confounds are represented as per-document distributions
//! (derived from log-odds statistics or LDA) and demoted by alternating
//! adversarial optimization against a growing pool of adversary heads.
//!
//! The crate is `no_std` + `alloc`. Enable `std` for standard-library
//! floating point and `parallel` for multi-threaded minibatch gradients.
#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod analyze;
pub mod confounds;
pub mod corpus;
pub mod error;
pub mod evaluate;
pub mod math;
pub mod model;
pub mod training;

pub use error::{Error, Result};
