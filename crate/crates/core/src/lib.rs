//! Discretized zero-order pseudodifferential calculus on model stratified
//! geometries: the circle, the cone over a point or a circle, and the edge
//! `S^1 x K_Omega`.
//!
//! The crate is `no_std` and only needs `alloc`. Operators are dense complex
//! matrices acting on grid coefficients in flat (log-substituted) coordinates.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod calculus;
pub mod dsl;
pub mod error;
pub mod fredholm;
pub mod geometry;
pub mod linalg;
pub mod localization;
pub mod quantize;
pub mod stock;
pub mod symbols;

pub use error::{Error, Result};
pub use linalg::{CMat, CVec, C64};
