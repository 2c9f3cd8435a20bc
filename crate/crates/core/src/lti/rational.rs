use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::freq::{delay_factor, FrequencyEval};
use super::polynomial::Polynomial;
use crate::error::{Error, Result};

/// Poles with real part below this count as stable.
pub const STABILITY_MARGIN: f64 = -1e-9;

/// `num(s) / den(s) * exp(-delay * s)` with a monic denominator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalTf {
    num: Polynomial,
    den: Polynomial,
    delay: f64,
}

impl RationalTf {
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self> {
        Self::with_delay(num, den, 0.0)
    }

    pub fn with_delay(num: Polynomial, den: Polynomial, delay: f64) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::invalid("denominator is identically zero"));
        }
        if !(delay >= 0.0) || !delay.is_finite() {
            return Err(Error::invalid(format!(
                "delay must be finite and >= 0, got {delay}"
            )));
        }
        if num
            .coeffs()
            .iter()
            .chain(den.coeffs())
            .any(|c| !c.is_finite())
        {
            return Err(Error::invalid(
                "transfer function has non-finite coefficients",
            ));
        }
        let lead = den.leading();
        Ok(Self {
            num: num.scale(1.0 / lead),
            den: den.scale(1.0 / lead),
            delay,
        })
    }

    /// Convenience constructor from descending coefficient lists.
    pub fn from_descending(num: &[f64], den: &[f64]) -> Result<Self> {
        Self::new(
            Polynomial::from_descending(num),
            Polynomial::from_descending(den),
        )
    }

    pub fn unity() -> Self {
        Self::gain(1.0)
    }

    pub fn gain(k: f64) -> Self {
        Self {
            num: Polynomial::constant(k),
            den: Polynomial::one(),
            delay: 0.0,
        }
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    pub fn delay(&self) -> f64 {
        self.delay
    }

    pub fn without_delay(&self) -> Self {
        Self {
            delay: 0.0,
            ..self.clone()
        }
    }

    pub fn is_proper(&self) -> bool {
        self.num.is_zero() || self.num.degree() <= self.den.degree()
    }

    pub fn is_strictly_proper(&self) -> bool {
        self.num.is_zero() || self.num.degree() < self.den.degree()
    }

    /// High-frequency gain of a proper system (`D` of a state-space realization).
    pub fn feedthrough(&self) -> f64 {
        if self.num.degree() == self.den.degree() && !self.num.is_zero() {
            self.num.leading()
        } else {
            0.0
        }
    }

    /// The system minus its feedthrough; strictly proper when `self` is proper.
    pub fn strictly_proper_part(&self) -> Result<Self> {
        if !self.is_proper() {
            return Err(Error::Improper {
                num: self.num.degree(),
                den: self.den.degree(),
            });
        }
        let d = self.feedthrough();
        let mut num = &self.num - &self.den.scale(d);
        if num.degree() >= self.den.degree() && !num.is_zero() {
            // cancellation left a rounding-level leading term
            let mut c = num.coeffs().to_vec();
            c.truncate(self.den.degree());
            num = Polynomial::new(c);
        }
        Self::with_delay(num, self.den.clone(), self.delay)
    }

    pub fn poles(&self) -> Result<Vec<Complex64>> {
        if self.den.degree() == 0 {
            return Ok(Vec::new());
        }
        self.den.roots()
    }

    pub fn zeros(&self) -> Result<Vec<Complex64>> {
        if self.num.is_zero() || self.num.degree() == 0 {
            return Ok(Vec::new());
        }
        self.num.roots()
    }

    /// Largest pole real part, `-inf` for a static gain.
    pub fn max_pole_real(&self) -> Result<f64> {
        Ok(self
            .poles()?
            .iter()
            .fold(f64::NEG_INFINITY, |m, p| m.max(p.re)))
    }

    /// True iff every pole has real part below [`STABILITY_MARGIN`].
    pub fn is_stable(&self) -> bool {
        self.max_pole_real()
            .map(|m| m < STABILITY_MARGIN)
            .unwrap_or(false)
    }

    pub fn dc_gain(&self) -> Result<f64> {
        let d0 = self.den.coeff(0);
        if d0 == 0.0 {
            return Err(Error::IntegratingSystem);
        }
        Ok(self.num.coeff(0) / d0)
    }

    pub fn eval(&self, s: Complex64) -> Option<Complex64> {
        let d = self.den.eval_complex(s);
        if d.norm() == 0.0 {
            return None;
        }
        let v = self.num.eval_complex(s) / d;
        Some(if self.delay > 0.0 {
            v * (-s * self.delay).exp()
        } else {
            v
        })
    }

    pub fn scale(&self, k: f64) -> Self {
        Self {
            num: self.num.scale(k),
            ..self.clone()
        }
    }

    /// Cascade; delays add.
    pub fn series(&self, other: &Self) -> Self {
        Self {
            num: &self.num * &other.num,
            den: &self.den * &other.den,
            delay: self.delay + other.delay,
        }
    }

    /// Sum of two systems with equal delays.
    pub fn parallel(&self, other: &Self) -> Result<Self> {
        if self.delay != other.delay {
            return Err(Error::invalid(
                "cannot add systems with different delays; rationalize the delays first",
            ));
        }
        let num = if self.den == other.den {
            &self.num + &other.num
        } else {
            &(&self.num * &other.den) + &(&other.num * &self.den)
        };
        let den = if self.den == other.den {
            self.den.clone()
        } else {
            &self.den * &other.den
        };
        Self::with_delay(num, den, self.delay)
    }

    pub fn difference(&self, other: &Self) -> Result<Self> {
        self.parallel(&other.scale(-1.0))
    }

    /// Unity negative feedback around `self` as the open loop: `L / (1 + L)`.
    pub fn feedback_unity(&self) -> Result<Self> {
        if self.delay != 0.0 {
            return Err(Error::invalid(
                "rationalize the loop delay before closing the loop",
            ));
        }
        Self::new(self.num.clone(), &self.den + &self.num)
    }
}

impl FrequencyEval for RationalTf {
    fn response_at(&self, omega: f64) -> Option<Complex64> {
        let s = Complex64::new(0.0, omega);
        let d = self.den.eval_complex(s);
        if d.norm() == 0.0 {
            return None;
        }
        Some(self.num.eval_complex(s) / d * delay_factor(self.delay, omega))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizes_denominator() {
        let g = RationalTf::from_descending(&[3.0], &[2.0, 1.0]).unwrap();
        assert_eq!(g.den().coeffs(), &[0.5, 1.0]);
        assert_eq!(g.num().coeffs(), &[1.5]);
        assert!((g.dc_gain().unwrap() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(RationalTf::from_descending(&[1.0], &[0.0]).is_err());
        assert!(RationalTf::with_delay(Polynomial::one(), Polynomial::one(), -1.0).is_err());
        assert!(RationalTf::from_descending(&[f64::NAN], &[1.0]).is_err());
    }

    #[test]
    fn stability() {
        assert!(RationalTf::from_descending(&[1.0], &[1.0, 1.0])
            .unwrap()
            .is_stable());
        assert!(!RationalTf::from_descending(&[1.0], &[1.0, -1.0])
            .unwrap()
            .is_stable());
        // marginal: integrator
        assert!(!RationalTf::from_descending(&[1.0], &[1.0, 0.0])
            .unwrap()
            .is_stable());
        let eq12_den = RationalTf::from_descending(&[1.0], &[1.0, 11.33, 55.15, 48.31]).unwrap();
        assert!(eq12_den.is_stable());
    }

    #[test]
    fn integrating_dc_gain_is_an_error() {
        let g = RationalTf::from_descending(&[1.0], &[1.0, 0.0]).unwrap();
        assert_eq!(g.dc_gain(), Err(Error::IntegratingSystem));
    }

    #[test]
    fn strictly_proper_part_removes_feedthrough() {
        // (2s + 3)/(s + 1) = 2 + 1/(s + 1)
        let g = RationalTf::from_descending(&[2.0, 3.0], &[1.0, 1.0]).unwrap();
        assert_eq!(g.feedthrough(), 2.0);
        let sp = g.strictly_proper_part().unwrap();
        assert!(sp.is_strictly_proper());
        assert_eq!(sp.num().coeffs(), &[1.0]);
    }

    #[test]
    fn feedback_of_integrator() {
        let l = RationalTf::from_descending(&[2.0], &[1.0, 0.0]).unwrap();
        let t = l.feedback_unity().unwrap();
        assert_eq!(t.den().coeffs(), &[2.0, 1.0]);
        assert!((t.dc_gain().unwrap() - 1.0).abs() < 1e-15);
    }
}
