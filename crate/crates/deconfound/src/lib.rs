//! Standard-library companion to `deconfound-core`: file formats,
//! checkpoints, run manifests, the synthetic benchmark and the CLI.

pub mod bench;
pub mod checkpoint;
pub mod cli;
pub mod error;
pub mod io;
pub mod manifest;
pub mod pipeline;
pub mod settings;

pub use error::{Error, Result};
