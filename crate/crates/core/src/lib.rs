//! Qubit spin substitutions on `Z^m` and their per-character spectral
//! classification.

pub mod classify;
pub mod config;
pub mod cyclotomic;
pub mod diffraction;
pub mod digits;
pub mod error;
pub mod fixtures;
pub mod fourier;
pub mod group;
pub mod odometer;
pub mod render;
pub mod substitution;
pub mod tile;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book;
