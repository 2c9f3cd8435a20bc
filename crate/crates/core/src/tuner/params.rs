use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lti::FractionalTf;

/// `Kp + Ki / s^λ + Kd s^μ`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FopidParams {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    pub lambda: f64,
    pub mu: f64,
}

impl FopidParams {
    pub fn pid(kp: f64, ki: f64, kd: f64) -> Self {
        Self {
            kp,
            ki,
            kd,
            lambda: 1.0,
            mu: 1.0,
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        vec![self.kp, self.ki, self.kd, self.lambda, self.mu]
    }

    pub fn from_slice(x: &[f64]) -> Self {
        Self {
            kp: x[0],
            ki: x[1],
            kd: x[2],
            lambda: x[3],
            mu: x[4],
        }
    }

    pub fn is_pid(&self) -> bool {
        self.lambda == 1.0 && self.mu == 1.0
    }

    pub fn validate(&self) -> Result<()> {
        if self.to_vec().iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("controller parameters must be finite"));
        }
        if !(self.lambda > 0.0) || !(self.mu >= 0.0) {
            return Err(Error::invalid(format!(
                "controller orders need lambda > 0 and mu >= 0, got lambda={} mu={}",
                self.lambda, self.mu
            )));
        }
        Ok(())
    }

    /// `(Kd s^{λ+μ} + Kp s^λ + Ki) / s^λ`
    pub fn to_fractional_tf(&self) -> Result<FractionalTf> {
        self.validate()?;
        FractionalTf::from_pairs(
            &[
                (self.kd, self.lambda + self.mu),
                (self.kp, self.lambda),
                (self.ki, 0.0),
            ],
            &[(1.0, self.lambda)],
            0.0,
        )
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            kp: self.kp * k,
            ki: self.ki * k,
            kd: self.kd * k,
            ..*self
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lti::FrequencyEval;
    use crate::Complex64;

    #[test]
    fn matches_direct_formula() {
        let p = FopidParams {
            kp: 0.0006,
            ki: 0.0052,
            kd: 0.0049,
            lambda: 1.0137,
            mu: 0.1067,
        };
        let c = p.to_fractional_tf().unwrap();
        for w in [0.01, 1.0, 30.0] {
            let s = Complex64::new(0.0, w);
            let direct = p.kp + p.ki / s.powf(p.lambda) + p.kd * s.powf(p.mu);
            assert!((c.response_at(w).unwrap() - direct).norm() < 1e-12 * direct.norm());
        }
    }

    #[test]
    fn pid_degenerates() {
        let c = FopidParams::pid(1.0, 2.0, 3.0).to_fractional_tf().unwrap();
        let r = c.to_rational().unwrap();
        assert_eq!(r.num().coeffs(), &[2.0, 1.0, 3.0]);
        assert!(FopidParams {
            lambda: 0.0,
            ..FopidParams::pid(1.0, 1.0, 1.0)
        }
        .validate()
        .is_err());
    }
}
