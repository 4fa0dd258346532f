//! Local iterated function systems and local fractal functions.
//!
//! The crate covers set iteration for local IFS attractors on pixel grids,
//! Read–Bajraktarević operators with their fixed points, interpolation
//! constructions, contractivity conditions for several function spaces and
//! tensor-product fractal surfaces.

// negated comparisons reject NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod exec;
pub mod export;
pub mod geometry;
pub mod local_ifs;
pub mod piecewise;
pub mod rb;
pub mod tensor;

pub use error::{Error, Result};
pub use exec::Execution;
