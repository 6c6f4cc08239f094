//! Chebyshev (ℓ∞) regression under bounded noise: estimators, random
//! designs, ball-in-hull geometry, theoretical bound calculators, and a
//! reproducible Monte-Carlo experiment harness.

pub mod designs;
pub mod error;
pub mod estimators;
pub mod geometry;
pub mod linalg;
mod linf;
pub mod lp;
pub mod model;
pub mod qp;
pub mod rng;
pub mod theory;

pub use error::{Error, Result};
pub use linalg::Matrix;
pub use lp::{solve_lp, LpConfig, LpProblem, LpSolution, LpStatus};
