//! Shared numerical machinery.

mod diff;
mod dogleg;
mod nelder_mead;
mod quadrature;
mod roots;

pub use diff::{central_difference, forward_jacobian};
pub use dogleg::{dogleg_solve, DoglegOptions};
pub use nelder_mead::{nelder_mead, NelderMeadOptions};
pub use quadrature::{log_trapezoid, log_trapezoid_nodes, QuadResult};
pub use roots::poly_roots;

use serde::{Deserialize, Serialize};

/// Outcome of an iterative solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimResult {
    pub x: Vec<f64>,
    /// Objective value (Nelder-Mead) or residual infinity-norm (dogleg).
    pub f: f64,
    pub evals: usize,
    pub converged: bool,
    /// Best value after each iteration, when tracing was requested.
    pub trace: Option<Vec<f64>>,
}
