//! Simulation and synthesis for 1-bit reconfigurable intelligent surfaces.
//!
//! The crate is organised by concern:
//!
//! * [`types`]: layouts, phase patterns, the unit-cell state table, field maps
//!   and far-field patterns.
//! * [`field`]: reflected fields on planes, direct far fields, the planar
//!   near-to-far-field transform and directivity.
//! * [`synthesis`]: mask targets, the mean-squared-error objective, greedy
//!   random-flip descent and quantized steering codes.
//! * [`circuit`]: the varactor equivalent circuit and (C_d, R_d) extraction.
//! * [`control`]: the addressed infrared control plane for 2x2-patch blocks.
//! * [`link`]: the radar-range link budget for RIS-assisted paths.

// `!(x > 0.0)` also rejects NaN, which is the point
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circuit;
pub mod control;
pub mod error;
pub mod field;
pub mod link;
pub mod synthesis;
pub mod types;

pub use error::{Error, Result};
pub use types::*;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
