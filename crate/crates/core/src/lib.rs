//! Fractional-order linear models, model reduction and robust PI^λD^μ tuning.
//!
//! The crate is organised bottom-up:
//!
//! - [`numerics`]: Nelder-Mead, Powell dogleg, polynomial roots, quadrature.
//! - [`lti`]: rational and fractional transfer functions, Oustaloup and Padé
//!   rationalization, H2 norm, Tustin conversion, simulation and closed loops.
//! - [`sysid`]: least-squares and prediction-error identification with AIC.
//! - [`modred`]: H2-optimal reduction to FOPTD/SOPTD/NIOPTD templates.
//! - [`tuner`]: five-specification frequency-domain controller tuning.
//! - [`io`] and [`fixtures`]: JSON/CSV formats and the bundled reference models.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fixtures;
pub mod io;
pub mod lti;
pub mod modred;
pub mod numerics;
pub mod sysid;
pub mod tuner;

pub use error::{Error, Result};
pub use num_complex::Complex64;
