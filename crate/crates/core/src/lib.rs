//! Numerical laboratory for attractors of polycycle flows and their products.
//!
//! The crate models the return maps of three planar polycycles (separatrix
//! loop, hyperbolic biangle, modified Bowen example), turns them into event
//! timelines, integrates a skew cylinder flow with an oscillating measure,
//! and estimates Milnor, statistical and minimal attractors from occupancy.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cylinder;
pub mod error;
pub mod fmtnum;
pub mod lab;
pub mod maps;
pub mod measures;
pub mod numeric;
pub mod partition;
pub mod timelines;

pub use error::{LabError, Result};
