//! Discrete-time identification from sampled data: least squares (ARX),
//! prediction error (ARMAX, BJ, OE), AIC ranking and synthetic step-back data.

mod arx;
mod data;
mod model;
mod pem;
mod sweep;

pub use arx::estimate_arx;
pub use data::{
    generate_data, generate_stepback_data, lfilter, DataRecord, NoiseSpec, RandomBinaryInput,
    Sampling, StepbackScenario,
};
pub use model::{aic, EstimatorSpec, IdentifiedModel, ModelCoefficients, Orders, Structure};
pub use pem::{estimate, estimate_pem, PEM_MAX_ITERATIONS, PEM_REL_TOL};
pub use sweep::{order_sweep, rank_specs, sweep_specs, SweepEntry};
