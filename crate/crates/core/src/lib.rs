//! Core algorithms for adaptive font generation: a nonnegative font space
//! learned from glyph atlases, font synthesis and outline tracing, Gaussian
//! process Bayesian optimization of reading speed, the trial session state
//! machine, and offline clustering of trial logs.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, persistence,
//! the HTTP service and the CLI live in the `adaptifont` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod fontgen;
pub mod fontspace;
pub mod linalg;
pub mod optimizer;
pub mod session;
pub mod synthetic;
