use nalgebra::{DMatrix, DVector};

use super::{forward_jacobian, OptimResult};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoglegOptions {
    /// Converged when the residual infinity-norm falls below this.
    pub ftol: f64,
    /// Converged when a step is shorter than `xtol * (|x| + xtol)`.
    pub xtol: f64,
    pub max_iterations: usize,
    /// Initial trust radius in Jacobian-scaled variables.
    pub initial_radius: f64,
    pub trace: bool,
}

impl Default for DoglegOptions {
    fn default() -> Self {
        Self {
            ftol: 1e-9,
            xtol: 1e-12,
            max_iterations: 200,
            initial_radius: 1.0,
            trace: false,
        }
    }
}

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn sq_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Powell's hybrid (trust-region dogleg) method for square systems `F(x) = 0`.
///
/// The Jacobian is rebuilt by forward differences at every accepted iterate and
/// the variables are scaled by the Jacobian column norms, as in MINPACK's
/// `hybrd`. A singular Jacobian is regularized with a Levenberg term.
pub fn dogleg_solve<F>(mut f: F, x0: &[f64], opts: &DoglegOptions) -> Result<OptimResult>
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    let mut evals = 1usize;
    if fx.len() != n {
        return Err(Error::invalid(format!(
            "dogleg_solve needs a square system, got {} residuals for {} unknowns",
            fx.len(),
            n
        )));
    }
    if fx.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid(
            "residuals are not finite at the initial point",
        ));
    }

    let mut trace = opts.trace.then(Vec::new);
    let mut scale = vec![0.0f64; n];
    let mut radius = opts.initial_radius;
    let mut converged = norm_inf(&fx) < opts.ftol;
    let mut iterations = 0usize;

    while !converged && iterations < opts.max_iterations {
        iterations += 1;
        let jac = forward_jacobian(&mut f, &x, &fx);
        evals += n;
        let jac = DMatrix::from_row_slice(n, n, &jac);
        if jac.iter().any(|v| !v.is_finite()) {
            break;
        }
        for (s, col) in scale.iter_mut().zip(jac.column_iter()) {
            let c = col.norm();
            *s = s.max(if c > 0.0 { c } else { 1.0 });
        }
        let d = DVector::from_vec(scale.clone());
        let fvec = DVector::from_vec(fx.clone());
        // Jacobian in scaled variables y = D p
        let js = DMatrix::from_fn(n, n, |i, j| jac[(i, j)] / d[j]);

        let newton = solve_regularized(&js, &(-&fvec));
        let grad = js.transpose() * &fvec;
        let jg = &js * &grad;
        let cauchy = if jg.norm_squared() > 0.0 {
            -(grad.norm_squared() / jg.norm_squared()) * &grad
        } else {
            DVector::zeros(n)
        };

        let mut accepted = false;
        for _ in 0..30 {
            let y = dogleg_step(&newton, &cauchy, &grad, radius);
            let ynorm = y.norm();
            let p: Vec<f64> = (0..n).map(|j| y[j] / d[j]).collect();
            let xnew: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a + b).collect();
            let fnew = f(&xnew);
            evals += 1;

            let predicted = sq_norm(&fx) - (&fvec + &js * &y).norm_squared();
            let actual = if fnew.iter().all(|v| v.is_finite()) {
                sq_norm(&fx) - sq_norm(&fnew)
            } else {
                f64::NEG_INFINITY
            };
            let ratio = if predicted > 0.0 {
                actual / predicted
            } else {
                -1.0
            };

            if ratio < 0.25 {
                radius = 0.5 * radius.min(ynorm);
            } else if ratio > 0.75 {
                radius = radius.max(2.0 * ynorm);
            }

            let xscale = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let pnorm = sq_norm(&p).sqrt();
            if ratio > 1e-4 {
                x = xnew;
                fx = fnew;
                accepted = true;
                if norm_inf(&fx) < opts.ftol || pnorm < opts.xtol * (xscale + opts.xtol) {
                    converged = true;
                }
                break;
            }
            if pnorm < opts.xtol * (xscale + opts.xtol) || radius < 1e-300 {
                break;
            }
        }
        if let Some(t) = trace.as_mut() {
            t.push(norm_inf(&fx));
        }
        if !accepted {
            break;
        }
    }

    Ok(OptimResult {
        f: norm_inf(&fx),
        x,
        evals,
        converged,
        trace,
    })
}

fn solve_regularized(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = a.nrows();
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smax > 0.0 && smin > 1e-12 * smax {
        if let Some(x) = a.clone().lu().solve(b) {
            if x.iter().all(|v| v.is_finite()) {
                return x;
            }
        }
    }
    // Levenberg-regularized normal equations
    let lambda = (1e-10 * smax * smax).max(1e-300);
    let ata = a.transpose() * a + DMatrix::identity(n, n) * lambda;
    ata.cholesky()
        .map(|c| c.solve(&(a.transpose() * b)))
        .unwrap_or_else(|| DVector::zeros(n))
}

fn dogleg_step(
    newton: &DVector<f64>,
    cauchy: &DVector<f64>,
    grad: &DVector<f64>,
    radius: f64,
) -> DVector<f64> {
    if newton.norm() <= radius {
        return newton.clone();
    }
    let cn = cauchy.norm();
    if cn >= radius || cn == 0.0 {
        let gn = grad.norm();
        if gn == 0.0 {
            return newton * (radius / newton.norm());
        }
        return -grad * (radius / gn);
    }
    // point on the segment cauchy -> newton at distance `radius`
    let diff = newton - cauchy;
    let a = diff.norm_squared();
    let b = 2.0 * cauchy.dot(&diff);
    let c = cn * cn - radius * radius;
    let tau = (-b + (b * b - 4.0 * a * c).max(0.0).sqrt()) / (2.0 * a);
    cauchy + diff * tau
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_square_root() {
        let r = dogleg_solve(|x| vec![x[0] * x[0] - 4.0], &[1.0], &Default::default()).unwrap();
        assert!(r.converged);
        assert!((r.x[0] - 2.0).abs() < 1e-9, "{:?}", r.x);
    }

    #[test]
    fn two_by_two_from_origin() {
        let r = dogleg_solve(
            |x| vec![x[0] + x[1] - 3.0, x[0] * x[1] - 2.0],
            &[0.0, 0.0],
            &Default::default(),
        )
        .unwrap();
        assert!(r.converged, "{r:?}");
        let (a, b) = (r.x[0], r.x[1]);
        let ok = ((a - 1.0).abs() < 1e-8 && (b - 2.0).abs() < 1e-8)
            || ((a - 2.0).abs() < 1e-8 && (b - 1.0).abs() < 1e-8);
        assert!(ok, "{:?}", r.x);
    }

    #[test]
    fn zero_map_returns_start() {
        let r = dogleg_solve(|_| vec![0.0, 0.0], &[0.3, -1.0], &Default::default()).unwrap();
        assert!(r.converged);
        assert_eq!(r.x, vec![0.3, -1.0]);
        assert_eq!(r.evals, 1);
    }

    #[test]
    fn badly_scaled_unknowns() {
        // roots at x0 = 1e-3, x1 = 50
        let r = dogleg_solve(
            |x| {
                vec![
                    1e3 * x[0] - 1.0 + 0.01 * (x[1] - 50.0),
                    (x[1] - 50.0) / 50.0 + x[0] * x[0],
                ]
            },
            &[5e-3, 10.0],
            &Default::default(),
        )
        .unwrap();
        assert!(r.converged, "{r:?}");
        assert!(r.f < 1e-9);
    }

    #[test]
    fn no_real_root_fails_gracefully() {
        let r = dogleg_solve(|x| vec![x[0] * x[0] + 1.0], &[0.5], &Default::default()).unwrap();
        assert!(r.f >= 1.0 - 1e-9);
        assert!(r.f <= 0.5f64.powi(2) + 1.0);
    }

    #[test]
    fn singular_jacobian_at_start() {
        // J = 0 at x = 0 for x^3 - 8
        let r = dogleg_solve(|x| vec![x[0].powi(3) - 8.0], &[0.0], &Default::default()).unwrap();
        assert!(r.f <= 8.0);
    }

    #[test]
    fn rejects_non_square() {
        assert!(dogleg_solve(|_| vec![1.0], &[0.0, 0.0], &Default::default()).is_err());
    }
}
