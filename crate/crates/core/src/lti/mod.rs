//! Linear time-invariant systems: rational and fractional transfer functions,
//! approximation, norms, conversion and simulation.

mod approx;
mod closed_loop;
mod fractional;
mod freq;
mod h2;
mod minreal;
mod polynomial;
mod rational;
mod state_space;
mod tustin;

pub use approx::{oustaloup, pade_delay, rationalize, split_order, RationalizeSettings};
pub use closed_loop::{ClosedLoop, LoopEvaluator, LoopMap, RationalizedLoop};
pub use fractional::{FractionalTf, Term};
pub use freq::{delay_factor, freq_response, jw_pow, logspace, FrequencyEval, FrequencyResponse};
pub use h2::{h2_from_samples, h2_grid, h2_norm, h2_norm_lyapunov, H2_BAND, H2_POINTS};
pub use minreal::{minreal, DEFAULT_MINREAL_TOL};
pub use polynomial::Polynomial;
pub use rational::{RationalTf, STABILITY_MARGIN};
pub use state_space::{simulate, StateSpace};
pub use tustin::{tustin_c2d, tustin_d2c};
