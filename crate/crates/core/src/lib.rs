//! Numerical convex geometry for norm bodies induced by orthonormal systems.
//!
//! The crate estimates volumes of sections and projections of convex
//! origin-symmetric bodies, lower-bounds radii of their sections, and
//! computes Gelfand and Kolmogorov widths at desk scale. Every Monte-Carlo
//! loop is split into fixed-size chunks with independent seeded streams, so
//! results are bit-identical with or without the `parallel` feature and for
//! any thread count.

// `!(x > 0.0)` rejects NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bodies;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod manifolds;
pub mod optim;
pub mod ortho;
pub mod parallel;
pub mod stochastic;
pub mod widths;

pub use error::{Error, Result};
