use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Anything that can be evaluated exactly on the imaginary axis.
///
/// `None` marks a frequency where the denominator vanishes.
pub trait FrequencyEval {
    fn response_at(&self, omega: f64) -> Option<Complex64>;
}

impl<T: FrequencyEval + ?Sized> FrequencyEval for &T {
    fn response_at(&self, omega: f64) -> Option<Complex64> {
        (**self).response_at(omega)
    }
}

impl<T: FrequencyEval + ?Sized> FrequencyEval for Box<T> {
    fn response_at(&self, omega: f64) -> Option<Complex64> {
        (**self).response_at(omega)
    }
}

/// `(j omega)^e` on the principal branch, exact for integer `e`.
pub fn jw_pow(omega: f64, e: f64) -> Complex64 {
    if e == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let mag = omega.powf(e);
    if e.fract() == 0.0 && e.abs() < 1e9 {
        let k = (e as i64).rem_euclid(4);
        return match k {
            0 => Complex64::new(mag, 0.0),
            1 => Complex64::new(0.0, mag),
            2 => Complex64::new(-mag, 0.0),
            _ => Complex64::new(0.0, -mag),
        };
    }
    Complex64::from_polar(mag, e * std::f64::consts::FRAC_PI_2)
}

/// `exp(-j omega L)`
pub fn delay_factor(delay: f64, omega: f64) -> Complex64 {
    if delay == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::from_polar(1.0, -omega * delay)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyResponse {
    pub omegas: Vec<f64>,
    pub values: Vec<Option<Complex64>>,
}

impl FrequencyResponse {
    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    pub fn magnitude_db(&self) -> Vec<Option<f64>> {
        self.values
            .iter()
            .map(|v| v.map(|z| 20.0 * z.norm().log10()))
            .collect()
    }

    /// Phase in degrees, unwrapped along the frequency axis.
    pub fn phase_deg_unwrapped(&self) -> Vec<Option<f64>> {
        let mut out = Vec::with_capacity(self.values.len());
        let mut prev: Option<f64> = None;
        for v in &self.values {
            match v {
                Some(z) => {
                    let mut ph = z.arg().to_degrees();
                    if let Some(p) = prev {
                        ph += 360.0 * ((p - ph) / 360.0).round();
                    }
                    prev = Some(ph);
                    out.push(Some(ph));
                }
                None => out.push(None),
            }
        }
        out
    }
}

/// Exact evaluation on the given grid; frequencies must be positive and increasing.
pub fn freq_response<S: FrequencyEval + ?Sized>(
    sys: &S,
    omegas: &[f64],
) -> Result<FrequencyResponse> {
    if omegas.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
        return Err(Error::invalid("frequencies must be finite and > 0"));
    }
    if omegas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("frequencies must be strictly increasing"));
    }
    Ok(FrequencyResponse {
        omegas: omegas.to_vec(),
        values: omegas.iter().map(|&w| sys.response_at(w)).collect(),
    })
}

/// `n` log-spaced frequencies from `10^lo` to `10^hi`.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![10f64.powf(lo)];
    }
    (0..n)
        .map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / (n - 1) as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_powers_are_exact() {
        assert_eq!(jw_pow(2.0, 1.0), Complex64::new(0.0, 2.0));
        assert_eq!(jw_pow(2.0, 2.0), Complex64::new(-4.0, 0.0));
        assert_eq!(jw_pow(2.0, -1.0), Complex64::new(0.0, -0.5));
    }

    #[test]
    fn half_power_principal_branch() {
        let z = jw_pow(1.0, 0.5);
        let e = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        assert!((z - e).norm() < 1e-15);
    }

    #[test]
    fn rejects_bad_grids() {
        struct One;
        impl FrequencyEval for One {
            fn response_at(&self, _: f64) -> Option<Complex64> {
                Some(Complex64::new(1.0, 0.0))
            }
        }
        assert!(freq_response(&One, &[0.0, 1.0]).is_err());
        assert!(freq_response(&One, &[2.0, 1.0]).is_err());
        assert_eq!(freq_response(&One, &[1.0, 2.0]).unwrap().len(), 2);
    }

    #[test]
    fn unwrapping_follows_continuous_phase() {
        let fr = FrequencyResponse {
            omegas: vec![1.0, 2.0, 3.0],
            values: vec![
                Some(Complex64::from_polar(1.0, 3.0)),
                Some(Complex64::from_polar(1.0, -3.0)),
                None,
            ],
        };
        let ph = fr.phase_deg_unwrapped();
        assert!((ph[1].unwrap() - (2.0 * std::f64::consts::PI - 3.0).to_degrees()).abs() < 1e-9);
        assert!(ph[2].is_none());
    }
}
