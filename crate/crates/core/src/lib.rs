//! Casimir–Lifshitz forces between layered bodies across a fluid gap,
//! gravity-balanced suspension landscapes and their thermal statistics.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod brownian;
pub mod cache;
pub mod cli;
pub mod constants;
pub mod error;
pub mod landscape;
pub mod lifshitz;
pub mod material;
pub mod quadrature;
pub mod special;
pub mod stratified;

pub use error::{Error, Result};
