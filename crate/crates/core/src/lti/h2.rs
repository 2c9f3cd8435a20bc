//! H2 norm by frequency-grid quadrature, with a Lyapunov cross-check.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::freq::FrequencyEval;
use super::rational::RationalTf;
use super::state_space::StateSpace;
use crate::error::{Error, Result};
use crate::numerics::{log_trapezoid, log_trapezoid_nodes};

/// Integration grid used for every H2 computation.
pub const H2_BAND: (f64, f64) = (1e-6, 1e6);
pub const H2_POINTS: usize = 4096;

/// Nodes of the shared H2 grid, for callers that precompute responses.
pub fn h2_grid() -> Vec<f64> {
    log_trapezoid_nodes(H2_BAND.0, H2_BAND.1, H2_POINTS)
}

/// `sqrt(2 / 2π ∫ |values|^2 dω)` over [`h2_grid`], given values sampled on it.
pub fn h2_from_samples(values: &[Complex64]) -> f64 {
    let nodes = h2_grid();
    assert_eq!(nodes.len(), values.len(), "samples must lie on the H2 grid");
    let integral: f64 = nodes
        .windows(2)
        .zip(values.windows(2))
        .map(|(w, v)| 0.5 * (w[1] - w[0]) * (v[0].norm_sqr() + v[1].norm_sqr()))
        .sum();
    (integral / PI).sqrt()
}

fn check_h2_defined(sys: &RationalTf) -> Result<()> {
    if sys.delay() > 0.0 {
        return Err(Error::invalid(
            "H2 norm needs a delay-free system; rationalize the delay first",
        ));
    }
    if !sys.is_strictly_proper() {
        return Err(Error::NotStrictlyProper(format!(
            "numerator degree {} >= denominator degree {}, H2 norm is infinite",
            sys.num().degree(),
            sys.den().degree()
        )));
    }
    let max_real = sys.max_pole_real()?;
    if !(max_real < super::rational::STABILITY_MARGIN) {
        return Err(Error::Unstable { max_real });
    }
    Ok(())
}

/// H2 norm of a stable, strictly proper, delay-free system.
pub fn h2_norm(sys: &RationalTf) -> Result<f64> {
    check_h2_defined(sys)?;
    if sys.num().is_zero() {
        return Ok(0.0);
    }
    let q = log_trapezoid(
        |w| sys.response_at(w).map_or(f64::INFINITY, |v| v.norm_sqr()),
        H2_BAND.0,
        H2_BAND.1,
        H2_POINTS,
    );
    Ok((q.value / PI).sqrt())
}

/// H2 norm from the controllability Gramian: `A P + P Aᵀ + B Bᵀ = 0`, `‖G‖² = C P Cᵀ`.
pub fn h2_norm_lyapunov(sys: &RationalTf) -> Result<f64> {
    check_h2_defined(sys)?;
    if sys.num().is_zero() {
        return Ok(0.0);
    }
    let ss = StateSpace::from_tf(sys)?;
    let n = ss.order();
    let a = ss.a();
    let eye = DMatrix::<f64>::identity(n, n);
    // vec(A P + P Aᵀ) = (I ⊗ A + A ⊗ I) vec(P)
    let op = eye.kronecker(a) + a.kronecker(&eye);
    let bb = ss.b() * ss.b().transpose();
    let rhs = -DVector::from_column_slice(bb.as_slice());
    let p = op
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Numerical("singular Lyapunov operator".into()))?;
    let p = DMatrix::from_column_slice(n, n, p.as_slice());
    let c = ss.c();
    let v = (c.transpose() * p * c)[(0, 0)];
    Ok(v.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn first(k: f64, t: f64) -> RationalTf {
        RationalTf::from_descending(&[k], &[t, 1.0]).unwrap()
    }

    #[test]
    fn first_order_law() {
        let h = h2_norm(&first(1.0, 1.0)).unwrap();
        assert!((h / 0.5f64.sqrt() - 1.0).abs() < 5e-3, "{h}");
        let h = h2_norm(&first(3.0, 2.0)).unwrap();
        assert!((h / 1.5 - 1.0).abs() < 5e-3, "{h}");
    }

    #[test]
    fn lyapunov_agrees() {
        let g = RationalTf::from_descending(&[1.0, 3.0], &[1.0, 2.0, 5.0, 4.0]).unwrap();
        let q = h2_norm(&g).unwrap();
        let l = h2_norm_lyapunov(&g).unwrap();
        assert!((q / l - 1.0).abs() < 5e-3, "{q} vs {l}");
        assert!((h2_norm_lyapunov(&first(1.0, 1.0)).unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn self_difference_is_zero() {
        let g = first(2.0, 0.5);
        assert_eq!(h2_norm(&g.difference(&g).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn undefined_cases() {
        assert!(matches!(
            h2_norm(&RationalTf::from_descending(&[1.0], &[1.0, -1.0]).unwrap()),
            Err(Error::Unstable { .. })
        ));
        assert!(matches!(
            h2_norm(&RationalTf::from_descending(&[1.0, 0.0], &[1.0, 1.0]).unwrap()),
            Err(Error::NotStrictlyProper(_))
        ));
        assert!(h2_norm(
            &first(1.0, 1.0).series(
                &RationalTf::with_delay(
                    crate::lti::Polynomial::one(),
                    crate::lti::Polynomial::one(),
                    0.1
                )
                .unwrap()
            )
        )
        .is_err());
    }

    #[test]
    fn samples_match_direct() {
        let g = first(1.0, 1.0);
        let v: Vec<Complex64> = h2_grid()
            .iter()
            .map(|&w| g.response_at(w).unwrap())
            .collect();
        assert!((h2_from_samples(&v) - h2_norm(&g).unwrap()).abs() < 1e-15);
    }
}
