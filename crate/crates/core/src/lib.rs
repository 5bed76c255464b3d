//! Finite-scale computational tools for intrinsic isometries.
//!
//! The crate works with finite samples of length spaces: dense distance
//! matrices ([`FiniteMetricSpace`]), weighted graphs ([`MetricGraph`]) and
//! maps into `ℝ^d` or into other samples. On top of these it computes
//! ε-chain pull-back pre-metrics and packing numbers ([`pullback`]),
//! folds metric graphs into the line ([`folding`]), handles towers of short
//! maps and their thread spaces ([`inverselimit`]), assembles glued cube
//! complexes from a sample mapped into `ℝ^d` ([`cubecomplex`]) and builds
//! crooked interval maps together with the graph `Γ` whose distance-to-
//! frontier function is a path isometry but not an intrinsic one
//! ([`crooked`]).
//!
//! Everything here is `no_std` with `alloc`; file formats, the command line
//! and the experiment drivers live in the `intriso` crate.

#![no_std]
#![forbid(unsafe_code)]
// Index loops mirror the matrix formulas; `!(x > 0.0)` also rejects NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod crooked;
pub mod cubecomplex;
mod error;
pub mod folding;
pub mod graph;
pub mod inverselimit;
pub mod metric;
pub mod pack;
pub mod pullback;

pub use error::{Error, Result};
pub use metric::{
    EuclideanMap, FiniteMetricSpace, IndexMap, MetricGraph, MetricSource, PointMap, SpaceMap, TOL_METRIC,
};
pub use pullback::PullValue;
