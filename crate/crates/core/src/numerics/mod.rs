//! Numerical building blocks: quadrature, root finding, interpolation.

pub mod interp;
pub mod quadrature;
pub mod roots;

pub use interp::MonotoneCubic;
pub use quadrature::{integrate, Integral, QuadratureConfig};
pub use roots::brent;
