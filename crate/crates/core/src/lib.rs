// Negated comparisons like `!(x >= 0.0)` are deliberate: they reject NaN
// along with out-of-range values, which `x < 0.0` would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Minimal aerodynamic resistance of axisymmetric bodies.
//!
//! The crate has four pillars:
//! - [`kernels`]: resistance kernels and their convex envelopes;
//! - [`solver`]: optimal convex profiles and minimal resistance;
//! - [`billiard`]: generator-curve bodies, elastic ray tracing, and the
//!   resistance functionals;
//! - [`zigzag`]: bodies whose true resistance approaches the tangential-exit
//!   bound, and single-impact parabolic chains for small heights.

pub mod billiard;
pub mod error;
pub mod export;
pub mod geometry;
pub mod kernels;
pub mod parallel;
pub mod quad;
pub mod roots;
pub mod solver;
pub mod zigzag;

pub use billiard::{Body2D, GeneratorCurve, ResistanceSpec, TraceResult, TraceStatus};
pub use error::{Error, Result};
pub use kernels::{ConvexEnvelope, Kernel};
pub use solver::ProfileSolution;
