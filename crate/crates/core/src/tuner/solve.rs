use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::params::FopidParams;
use super::spec::{open_loop, phase_slope, scaled_residuals, spec_residuals, TuningSpec};
use crate::error::{Error, Result};
use crate::lti::{FractionalTf, FrequencyEval};
use crate::numerics::{dogleg_solve, DoglegOptions};

/// Scaled-residual threshold for a converged tune.
pub const TUNE_TOL: f64 = 1e-6;
pub const MAX_RESTARTS: usize = 10;

/// Which parameters move and which specifications are enforced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TuneMask {
    /// Free parameters in `[Kp, Ki, Kd, λ, μ]` order.
    pub free: [bool; 5],
    /// Active residuals in `spec_residuals` order.
    pub active: [bool; 5],
}

impl TuneMask {
    pub const FOPID: TuneMask = TuneMask {
        free: [true; 5],
        active: [true; 5],
    };
    pub const PID: TuneMask = TuneMask {
        free: [true, true, true, false, false],
        active: [true, true, true, false, false],
    };

    fn validate(&self) -> Result<()> {
        let nf = self.free.iter().filter(|b| **b).count();
        let na = self.active.iter().filter(|b| **b).count();
        if nf == 0 || nf != na {
            return Err(Error::invalid(format!(
                "need as many free parameters as active specifications, got {nf} and {na}"
            )));
        }
        Ok(())
    }
}

/// Achieved loop quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Margins {
    pub phase_margin_deg: f64,
    pub crossover_magnitude: f64,
    pub t_db_at_omega_t: f64,
    pub s_db_at_omega_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneReport {
    pub params: FopidParams,
    /// All five residuals in natural units (rad, 1, rad·s, dB, dB).
    pub residuals: [f64; 5],
    pub active: [bool; 5],
    pub converged: bool,
    /// Largest active residual in solver units.
    pub max_scaled_residual: f64,
    /// Phase slope at the crossover target, rad per rad/s.
    pub flatness: f64,
    pub margins: Margins,
    pub restarts: usize,
    pub evals: usize,
}

/// Magnitude-matched starting point at the crossover target.
pub fn default_initial(plant: &FractionalTf, spec: &TuningSpec) -> Result<FopidParams> {
    let p = plant
        .response_at(spec.omega_gc)
        .ok_or_else(|| Error::Numerical("plant undefined at omega_gc".into()))?;
    let kp = 1.0 / p.norm();
    Ok(FopidParams {
        kp,
        ki: kp * spec.omega_gc / 10.0,
        kd: kp / (10.0 * spec.omega_gc),
        lambda: 1.0,
        mu: 1.0,
    })
}

/// Phase margin, |T|, |S| and slope achieved by a loop at the given anchors.
pub fn loop_margins(
    plant: &FractionalTf,
    params: &FopidParams,
    spec: &TuningSpec,
) -> Result<(Margins, f64)> {
    let c = params.to_fractional_tf()?;
    let g = open_loop(plant, &c, spec.omega_gc)?;
    let gt = open_loop(plant, &c, spec.omega_t)?;
    let gs = open_loop(plant, &c, spec.omega_s)?;
    let mut pm = g.arg() + PI;
    if pm > PI {
        pm -= 2.0 * PI;
    }
    let margins = Margins {
        phase_margin_deg: pm.to_degrees(),
        crossover_magnitude: g.norm(),
        t_db_at_omega_t: 20.0 * (gt / (1.0 + gt)).norm().log10(),
        s_db_at_omega_s: 20.0 * (1.0 / (1.0 + gs)).norm().log10(),
    };
    Ok((margins, phase_slope(plant, &c, spec.omega_gc)?))
}

/// The specification a given loop satisfies exactly at the anchor frequencies.
pub fn achieved_spec(
    plant: &FractionalTf,
    params: &FopidParams,
    omega_gc: f64,
    omega_t: f64,
    omega_s: f64,
) -> Result<TuningSpec> {
    let probe = TuningSpec {
        omega_gc,
        phi_m: PI / 2.0,
        a_db: 0.0,
        omega_t,
        b_db: 0.0,
        omega_s,
    };
    let (m, _) = loop_margins(plant, params, &probe)?;
    let spec = TuningSpec {
        phi_m: m.phase_margin_deg.to_radians(),
        a_db: m.t_db_at_omega_t,
        b_db: m.s_db_at_omega_s,
        ..probe
    };
    spec.validate()?;
    Ok(spec)
}

fn build_report(
    plant: &FractionalTf,
    params: FopidParams,
    spec: &TuningSpec,
    mask: &TuneMask,
    restarts: usize,
    evals: usize,
) -> Result<TuneReport> {
    let residuals = spec_residuals(plant, &params, spec)?;
    let scaled = scaled_residuals(plant, &params, spec)?;
    let max_scaled_residual = scaled
        .iter()
        .zip(mask.active)
        .filter(|(_, a)| *a)
        .fold(0.0f64, |m, (r, _)| m.max(r.abs()));
    let (margins, flatness) = loop_margins(plant, &params, spec)?;
    Ok(TuneReport {
        params,
        residuals,
        active: mask.active,
        converged: max_scaled_residual < TUNE_TOL,
        max_scaled_residual,
        flatness,
        margins,
        restarts,
        evals,
    })
}

/// Solve the active specifications for the free parameters with the dogleg
/// method, restarting from perturbed starts when a solve stalls.
pub fn tune_with(
    plant: &FractionalTf,
    spec: &TuningSpec,
    initial: &FopidParams,
    mask: &TuneMask,
    seed: u64,
) -> Result<TuneReport> {
    spec.validate()?;
    mask.validate()?;
    initial.validate()?;
    let free_idx: Vec<usize> = (0..5).filter(|&i| mask.free[i]).collect();
    let base = initial.to_vec();
    let assemble = |x: &[f64]| {
        let mut full = base.clone();
        for (k, &i) in free_idx.iter().enumerate() {
            full[i] = x[k];
        }
        FopidParams::from_slice(&full)
    };
    let residual_map = |x: &[f64]| -> Vec<f64> {
        match scaled_residuals(plant, &assemble(x), spec) {
            Ok(r) => r
                .iter()
                .zip(mask.active)
                .filter(|(_, a)| *a)
                .map(|(v, _)| *v)
                .collect(),
            // outside the valid parameter region: a large finite residual
            // makes the trust region shrink back
            Err(_) => vec![1e6; free_idx.len()],
        }
    };
    let opts = DoglegOptions::default();
    let x0: Vec<f64> = free_idx.iter().map(|&i| base[i]).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut evals = 0;
    let mut restarts = 0;
    for attempt in 0..=MAX_RESTARTS {
        let start: Vec<f64> = if attempt == 0 {
            x0.clone()
        } else {
            restarts += 1;
            let ln2 = std::f64::consts::LN_2;
            x0.iter()
                .map(|v| v * rng.random_range(-ln2..ln2).exp())
                .collect()
        };
        if residual_map(&start).iter().any(|v| *v >= 1e6) {
            continue;
        }
        let r = match dogleg_solve(residual_map, &start, &opts) {
            Ok(r) => r,
            Err(_) => continue,
        };
        evals += r.evals;
        if best.as_ref().is_none_or(|b| r.f < b.0) {
            best = Some((r.f, r.x));
        }
        if best.as_ref().is_some_and(|b| b.0 < TUNE_TOL) {
            break;
        }
    }
    let Some((_, x)) = best else {
        return Err(Error::Numerical(
            "no start produced an evaluable loop".into(),
        ));
    };
    build_report(plant, assemble(&x), spec, mask, restarts, evals)
}

/// All five parameters against all five specifications.
pub fn tune_fopid(
    plant: &FractionalTf,
    spec: &TuningSpec,
    initial: &FopidParams,
) -> Result<TuneReport> {
    tune_with(plant, spec, initial, &TuneMask::FOPID, 0)
}

/// `Kp`, `Ki`, `Kd` against phase margin, crossover and flatness; λ = μ = 1.
pub fn tune_pid(
    plant: &FractionalTf,
    spec: &TuningSpec,
    initial: &FopidParams,
) -> Result<TuneReport> {
    let start = FopidParams::pid(initial.kp, initial.ki, initial.kd);
    tune_with(plant, spec, &start, &TuneMask::PID, 0)
}
