//! Expected facet counts of the convex hull of i.i.d. samples from a
//! spherically symmetric law in `R^d`.
//!
//! The crate evaluates the kernels `G`, `K`, `H`, `F0`, the master integral
//! for `E[F_N]`, closed-form tail asymptotics, a brute-force Monte Carlo
//! oracle, and the sample-complexity conditions built on them.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod complexity;
pub mod distributions;
pub mod error;
pub mod expectation;
pub mod kernels;
pub mod montecarlo;
pub mod numerics;
pub mod parallel;
pub mod special;

pub use distributions::{
    builtin_models, sample_point, sample_radius, BuiltinFamily, CustomLaw, ModelSpec, RadialModel, SlowlyVaryingFn,
    TailFamily, TailKind,
};
pub use error::{Error, Result};
pub use kernels::{KernelKind, KernelValue};
pub use montecarlo::{FacetEstimate, MembershipEstimate, PointCloud};
pub use numerics::{Integral, QuadratureConfig};
pub use parallel::Parallelism;
