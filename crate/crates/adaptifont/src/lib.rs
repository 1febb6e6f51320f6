//! File formats, session persistence, the HTTP service and the command line
//! for adaptive font generation. The algorithms live in [`adaptifont_core`],
//! re-exported here as [`core`].

pub use adaptifont_core as core;

pub mod cli;
pub mod error;
pub mod formats;
pub mod service;
pub mod store;

pub use error::{Error, Result};
