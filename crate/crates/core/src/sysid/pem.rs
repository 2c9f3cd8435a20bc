use nalgebra::{DMatrix, DVector};

use super::arx::arx_theta;
use super::data::DataRecord;
use super::model::{check_data, EstimatorSpec, IdentifiedModel, ModelCoefficients, Structure};
use crate::error::{Error, Result};
use crate::lti::Polynomial;
use crate::numerics::forward_jacobian;
use crate::Complex64;

pub const PEM_MAX_ITERATIONS: usize = 200;
pub const PEM_REL_TOL: f64 = 1e-9;

/// Reflect roots of a monic `q⁻¹` polynomial that lie outside the unit circle.
fn project_inside_unit_circle(p: &[f64]) -> Vec<f64> {
    if p.len() < 2 {
        return p.to_vec();
    }
    // 1 + p1 q⁻¹ + ... + pn q⁻ⁿ has the roots (in z) of z^n + p1 z^(n-1) + ... + pn
    let zpoly = Polynomial::new(p.iter().rev().copied().collect());
    let Ok(roots) = zpoly.roots() else {
        return p.to_vec();
    };
    if roots.iter().all(|r| r.norm() < 1.0) {
        return p.to_vec();
    }
    let reflected: Vec<Complex64> = roots
        .iter()
        .map(|r| {
            let m = r.norm();
            if m >= 1.0 {
                // strictly inside so the predictor filter stays stable
                r / (m * m) * (1.0 - 1e-6)
            } else {
                *r
            }
        })
        .collect();
    let rebuilt = Polynomial::from_roots(&reflected);
    let mut out: Vec<f64> = rebuilt.coeffs().iter().rev().copied().collect();
    out.resize(p.len(), 0.0);
    out
}

fn project(spec: &EstimatorSpec, theta: &[f64]) -> Vec<f64> {
    let mut c = ModelCoefficients::from_theta(spec, theta);
    c.c = project_inside_unit_circle(&c.c);
    c.f = project_inside_unit_circle(&c.f);
    c.to_theta(spec)
}

fn initial_theta(data: &DataRecord, spec: &EstimatorSpec) -> Result<Vec<f64>> {
    let o = spec.orders;
    let mut coeffs = ModelCoefficients::from_theta(spec, &vec![0.0; spec.param_count()]);
    match spec.structure {
        Structure::Armax => {
            let t = arx_theta(data, o.na, o.nb, spec.nk)?;
            coeffs.a[1..].copy_from_slice(&t[..o.na]);
            coeffs.b[spec.nk..].copy_from_slice(&t[o.na..]);
        }
        Structure::Oe | Structure::Bj => {
            let t = arx_theta(data, o.nf, o.nb, spec.nk)?;
            coeffs.f[1..].copy_from_slice(&t[..o.nf]);
            coeffs.b[spec.nk..].copy_from_slice(&t[o.nf..]);
        }
        Structure::Arx => unreachable!(),
    }
    Ok(project(spec, &coeffs.to_theta(spec)))
}

/// Prediction-error fit of ARMAX, BJ or OE structures by Levenberg-damped
/// Gauss-Newton, started from the ARX solution.
pub fn estimate_pem(data: &DataRecord, spec: &EstimatorSpec) -> Result<IdentifiedModel> {
    if spec.structure == Structure::Arx {
        return Err(Error::invalid("use estimate_arx for the ARX structure"));
    }
    check_data(data, spec)?;
    let n0 = spec.first_sample();
    let mut residuals = |theta: &[f64]| -> Vec<f64> {
        ModelCoefficients::from_theta(spec, theta).prediction_errors(data)[n0..].to_vec()
    };
    let loss_of = |e: &[f64]| {
        let v = e.iter().map(|x| x * x).sum::<f64>() / e.len() as f64;
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };

    let mut theta = initial_theta(data, spec)?;
    let mut e = residuals(&theta);
    let mut loss = loss_of(&e);
    if !loss.is_finite() {
        return Err(Error::Numerical("initial predictor is not finite".into()));
    }
    let mut trace = vec![loss];
    let d = theta.len();
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < PEM_MAX_ITERATIONS {
        iterations += 1;
        if loss == 0.0 {
            converged = true;
            break;
        }
        let jac = forward_jacobian(&mut residuals, &theta, &e);
        let j = DMatrix::from_row_slice(e.len(), d, &jac);
        let h = j.transpose() * &j;
        let g = j.transpose() * DVector::from_column_slice(&e);
        let mut accepted = None;
        while lambda <= 1e12 {
            let mut damped = h.clone();
            for i in 0..d {
                damped[(i, i)] += lambda * h[(i, i)].max(1e-12);
            }
            let step = damped.clone().cholesky().map(|c| c.solve(&(-&g)));
            if let Some(step) = step {
                let cand: Vec<f64> = theta.iter().zip(step.iter()).map(|(t, s)| t + s).collect();
                let cand = project(spec, &cand);
                let ec = residuals(&cand);
                let lc = loss_of(&ec);
                if lc < loss {
                    accepted = Some((cand, ec, lc));
                    lambda = (lambda / 10.0).max(1e-12);
                    break;
                }
            }
            lambda *= 10.0;
        }
        match accepted {
            Some((cand, ec, lc)) => {
                let rel = (loss - lc) / loss;
                theta = cand;
                e = ec;
                loss = lc;
                trace.push(loss);
                if rel < PEM_REL_TOL {
                    converged = true;
                    break;
                }
            }
            None => {
                // no descent direction left at any damping: local minimum
                converged = true;
                break;
            }
        }
    }
    let coeffs = ModelCoefficients::from_theta(spec, &theta);
    Ok(IdentifiedModel::from_coefficients(
        *spec, data, coeffs, converged, iterations, trace,
    ))
}

/// Dispatch on the structure.
pub fn estimate(data: &DataRecord, spec: &EstimatorSpec) -> Result<IdentifiedModel> {
    match spec.structure {
        Structure::Arx => super::arx::estimate_arx(data, spec),
        _ => estimate_pem(data, spec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sysid::arx::estimate_arx;
    use crate::sysid::data::lfilter;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn noise(seed: u64, n: usize, sd: f64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| sd * rng.sample::<f64, _>(StandardNormal))
            .collect()
    }

    #[test]
    fn reflection() {
        let p = project_inside_unit_circle(&[1.0, -2.0]);
        assert!((p[1] + 0.5).abs() < 1e-5);
        assert_eq!(project_inside_unit_circle(&[1.0, -0.5]), vec![1.0, -0.5]);
    }

    #[test]
    fn oe_recovers_pole() {
        let u = noise(1, 300, 1.0);
        let clean = lfilter(&[0.0, 1.0], &[1.0, -0.5], &u);
        let y: Vec<f64> = clean
            .iter()
            .zip(noise(2, 300, 0.01))
            .map(|(a, b)| a + b)
            .collect();
        let data = DataRecord::new(1.0, u, y).unwrap();
        let m = estimate_pem(&data, &EstimatorSpec::oe(1, 1, 1)).unwrap();
        assert!((m.coeffs.f[1] + 0.5).abs() < 0.02);
        assert!(m.converged);
        assert!(m.loss_trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn armax_without_c_is_arx() {
        let u = noise(3, 100, 1.0);
        let y = lfilter(&[0.0, 0.8, 0.3], &[1.0, -1.1, 0.3], &u);
        let data = DataRecord::new(0.1, u, y).unwrap();
        let a = estimate_arx(&data, &EstimatorSpec::arx(2, 2, 1)).unwrap();
        let p = estimate_pem(&data, &EstimatorSpec::armax(2, 2, 0, 1)).unwrap();
        for (x, y) in a
            .coeffs
            .to_theta(&a.spec)
            .iter()
            .zip(p.coeffs.to_theta(&a.spec))
        {
            assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn arx_structure_rejected() {
        let data = DataRecord::new(0.1, vec![1.0; 10], vec![1.0; 10]).unwrap();
        assert!(estimate_pem(&data, &EstimatorSpec::arx(1, 1, 1)).is_err());
    }
}
