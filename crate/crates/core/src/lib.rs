//! Weighted cumulative residual entropy (WCRE), weighted cumulative entropy (WCE),
//! their relative, conditional and mutual forms, and a harness that checks the
//! inequalities relating them numerically.

pub mod empirical;
pub mod error;
pub mod harness;
pub mod joint;
pub mod kernel;
pub mod model;
pub mod multivariate;
pub mod quadrature;
pub mod rng;
pub mod special;
pub mod univariate;
pub mod weight;

pub use error::{Error, Result};
pub use joint::MultivariateModel;
pub use model::{expectation, Lifetime, Sample, UnivariateModel};
pub use quadrature::{integrate_1d, integrate_nd, Axis, IntegralResult, QuadratureSpec, Upper};
pub use weight::WeightFunction;
