//! Frequency-domain tuning of PI^λD^μ and PID controllers against a
//! fractional plant, and verification of the resulting loop.

mod params;
mod solve;
mod spec;
mod verify;

pub use params::FopidParams;
pub use solve::{
    achieved_spec, default_initial, loop_margins, tune_fopid, tune_pid, tune_with, Margins,
    TuneMask, TuneReport, MAX_RESTARTS, TUNE_TOL,
};
pub use spec::{scaled_residuals, spec_residuals, TuningSpec, SLOPE_STEP};
pub use verify::{
    phase_flatness, step_metrics, verify_isodamping, Flatness, IsoDampingReport, ScaleMetrics,
    SimulationSettings, FLAT_BAND_DEG,
};
