//! Pole-zero cancellation.

use num_complex::Complex64;

use super::polynomial::Polynomial;
use super::rational::RationalTf;
use crate::error::{Error, Result};

pub const DEFAULT_MINREAL_TOL: f64 = 1e-6;

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(b.norm())
}

/// Cancel pole-zero pairs closer than `tol` relative to the larger magnitude.
/// Gain and delay are preserved.
pub fn minreal(sys: &RationalTf, tol: f64) -> Result<RationalTf> {
    if !(tol > 0.0) {
        return Err(Error::invalid("minreal tolerance must be > 0"));
    }
    let mut zeros = sys.zeros()?;
    let mut poles = sys.poles()?;
    let mut cancelled = false;
    let mut i = 0;
    while i < zeros.len() {
        let z = zeros[i];
        let best = poles
            .iter()
            .enumerate()
            .filter(|(_, p)| close(z, **p, tol))
            .min_by(|a, b| (z - *a.1).norm().total_cmp(&(z - *b.1).norm()))
            .map(|(j, _)| j);
        match best {
            Some(j) => {
                poles.remove(j);
                zeros.remove(i);
                cancelled = true;
            }
            None => i += 1,
        }
    }
    if !cancelled {
        return Ok(sys.clone());
    }
    let lead = sys.num().leading();
    let num = Polynomial::from_roots(&zeros).scale(lead);
    let den = Polynomial::from_roots(&poles);
    RationalTf::with_delay(num, den, sys.delay())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lti::freq::{logspace, FrequencyEval};

    fn tf(num: &[f64], den: &[f64]) -> RationalTf {
        RationalTf::from_descending(num, den).unwrap()
    }

    #[test]
    fn exact_cancellation() {
        let g = minreal(&tf(&[1.0, 1.0], &[1.0, 3.0, 2.0]), 1e-6).unwrap();
        let want = tf(&[1.0], &[1.0, 2.0]);
        assert!((g.num().coeff(0) - 1.0).abs() < 1e-9);
        assert_eq!(g.den().degree(), 1);
        assert!((g.den().coeff(0) - want.den().coeff(0)).abs() < 1e-9);
    }

    #[test]
    fn near_cancellation() {
        let g = tf(&[1.0, 1.0000001], &[1.0, 3.0, 2.0]);
        let r = minreal(&g, 1e-3).unwrap();
        assert_eq!(r.den().degree(), 1);
        assert_eq!(r.num().degree(), 0);
        for w in logspace(-2.0, 2.0, 20) {
            let a = g.response_at(w).unwrap();
            let b = r.response_at(w).unwrap();
            assert!((a - b).norm() / a.norm() < 1e-2);
        }
    }

    #[test]
    fn nothing_to_cancel() {
        let g = tf(&[1.0, 1.0], &[1.0, 5.0, 6.0]);
        assert_eq!(minreal(&g, 1e-3).unwrap(), g);
        assert!(minreal(&g, 0.0).is_err());
    }
}
