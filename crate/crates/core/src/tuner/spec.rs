use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::params::FopidParams;
use crate::error::{Error, Result};
use crate::lti::{FractionalTf, FrequencyEval};
use crate::Complex64;

/// Relative step of the symmetric phase derivative.
pub const SLOPE_STEP: f64 = 1e-4;

/// The five frequency-domain targets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuningSpec {
    pub omega_gc: f64,
    /// Phase margin in radians.
    pub phi_m: f64,
    /// `|T(jω_t)|` target in dB.
    pub a_db: f64,
    pub omega_t: f64,
    /// `|S(jω_s)|` target in dB.
    pub b_db: f64,
    pub omega_s: f64,
}

impl TuningSpec {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.omega_gc,
            self.phi_m,
            self.a_db,
            self.omega_t,
            self.b_db,
            self.omega_s,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("tuning spec values must be finite"));
        }
        if !(self.omega_s > 0.0 && self.omega_s < self.omega_gc && self.omega_gc < self.omega_t) {
            return Err(Error::invalid(format!(
                "need 0 < omega_s < omega_gc < omega_t, got omega_s={}, omega_gc={}, omega_t={}",
                self.omega_s, self.omega_gc, self.omega_t
            )));
        }
        if !(self.phi_m > 0.0 && self.phi_m < PI) {
            return Err(Error::invalid(format!(
                "phase margin must lie in (0, pi) rad, got {}",
                self.phi_m
            )));
        }
        Ok(())
    }
}

/// Exact open loop `C(jω) P(jω)`.
pub(crate) fn open_loop(
    plant: &FractionalTf,
    controller: &FractionalTf,
    omega: f64,
) -> Result<Complex64> {
    let p = plant
        .response_at(omega)
        .ok_or_else(|| Error::Numerical(format!("plant undefined at omega = {omega}")))?;
    let c = controller
        .response_at(omega)
        .ok_or_else(|| Error::Numerical(format!("controller undefined at omega = {omega}")))?;
    let g = c * p;
    if !g.is_finite() {
        return Err(Error::Numerical(format!(
            "open loop is not finite at omega = {omega}"
        )));
    }
    Ok(g)
}

/// `d Arg G / dω` by a symmetric difference of step `SLOPE_STEP * ω`.
pub(crate) fn phase_slope(
    plant: &FractionalTf,
    controller: &FractionalTf,
    omega: f64,
) -> Result<f64> {
    let h = SLOPE_STEP * omega;
    let hi = open_loop(plant, controller, omega + h)?;
    let lo = open_loop(plant, controller, omega - h)?;
    Ok((hi / lo).arg() / (2.0 * h))
}

fn db(x: f64) -> f64 {
    20.0 * x.log10()
}

/// The five specification residuals, each in its natural unit:
/// `[Arg G(jω_gc) + π − φ_m (rad), |G(jω_gc)| − 1, dArg G/dω (rad·s),
///   |T(jω_t)| dB − A, |S(jω_s)| dB − B]`.
pub fn spec_residuals(
    plant: &FractionalTf,
    params: &FopidParams,
    spec: &TuningSpec,
) -> Result<[f64; 5]> {
    let c = params.to_fractional_tf()?;
    let g = open_loop(plant, &c, spec.omega_gc)?;
    // rotate so the target phase sits at 0 and the branch cut is far away
    let phase = (g * Complex64::from_polar(1.0, PI - spec.phi_m)).arg();
    let slope = phase_slope(plant, &c, spec.omega_gc)?;
    let gt = open_loop(plant, &c, spec.omega_t)?;
    let gs = open_loop(plant, &c, spec.omega_s)?;
    let t = (gt / (1.0 + gt)).norm();
    let s = (1.0 / (1.0 + gs)).norm();
    Ok([
        phase,
        g.norm() - 1.0,
        slope,
        db(t) - spec.a_db,
        db(s) - spec.b_db,
    ])
}

/// Residuals in solver units: the dB entries are divided by 20.
pub fn scaled_residuals(
    plant: &FractionalTf,
    params: &FopidParams,
    spec: &TuningSpec,
) -> Result<[f64; 5]> {
    let mut r = spec_residuals(plant, params, spec)?;
    r[3] /= 20.0;
    r[4] /= 20.0;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> TuningSpec {
        TuningSpec {
            omega_gc: 1.0,
            phi_m: PI / 2.0,
            a_db: -20.0,
            omega_t: 100.0,
            b_db: -20.0,
            omega_s: 0.01,
        }
    }

    #[test]
    fn unit_plant_proportional() {
        let plant = FractionalTf::from_pairs(&[(1.0, 0.0)], &[(1.0, 0.0)], 0.0).unwrap();
        let r = spec_residuals(&plant, &FopidParams::pid(1.0, 0.0, 0.0), &spec()).unwrap();
        assert!(r[1].abs() < 1e-15);
        assert!(r[2].abs() < 1e-12);
    }

    #[test]
    fn phase_residuals_are_gain_invariant() {
        let plant =
            FractionalTf::from_pairs(&[(2.0, 0.0)], &[(1.0, 2.1), (3.0, 1.0), (2.0, 0.0)], 0.05)
                .unwrap();
        let p = FopidParams {
            kp: 0.3,
            ki: 0.5,
            kd: 0.1,
            lambda: 1.1,
            mu: 0.4,
        };
        let a = spec_residuals(&plant, &p, &spec()).unwrap();
        let b = spec_residuals(&plant, &p.scaled(2.0), &spec()).unwrap();
        assert!((a[0] - b[0]).abs() < 1e-12);
        assert!((a[2] - b[2]).abs() < 1e-9);
        assert!((a[1] - b[1]).abs() > 0.1);
    }

    #[test]
    fn spec_validation() {
        assert!(spec().validate().is_ok());
        assert!(TuningSpec {
            omega_s: 2.0,
            ..spec()
        }
        .validate()
        .is_err());
        assert!(TuningSpec {
            phi_m: 3.2,
            ..spec()
        }
        .validate()
        .is_err());
    }
}
