use super::OptimResult;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    /// Simplex size tolerance, relative to `max(1, |x_best|)`.
    pub xtol: f64,
    /// Spread of objective values across the simplex.
    pub ftol: f64,
    pub max_evals: usize,
    /// Relative size of the initial simplex edges (fminsearch uses 5%).
    pub initial_step: f64,
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
    pub trace: bool,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            xtol: 1e-8,
            ftol: 1e-10,
            max_evals: 2000,
            initial_step: 0.05,
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
            trace: false,
        }
    }
}

/// Unconstrained Nelder-Mead simplex minimization.
///
/// Non-finite objective values away from `x0` are treated as `+inf`, so a
/// penalty or an undefined region simply repels the simplex.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], opts: &NelderMeadOptions) -> Result<OptimResult>
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    if n == 0 {
        return Err(Error::invalid("nelder_mead needs at least one variable"));
    }
    let f0 = f(x0);
    if !f0.is_finite() {
        return Err(Error::invalid(
            "objective is not finite at the initial point",
        ));
    }
    let mut evals = 1usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    let mut values: Vec<f64> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    values.push(f0);
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] = if x[i] != 0.0 {
            x[i] * (1.0 + opts.initial_step)
        } else {
            0.00025
        };
        values.push(eval(&x, &mut evals));
        simplex.push(x);
    }

    let mut trace = opts.trace.then(Vec::new);
    let mut converged = false;
    let mut order: Vec<usize> = (0..=n).collect();

    loop {
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let best = order[0];
        let worst = order[n];
        let second_worst = order[n - 1];
        if let Some(t) = trace.as_mut() {
            t.push(values[best]);
        }

        let scale = simplex[best].iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let size = simplex
            .iter()
            .flat_map(|x| x.iter().zip(&simplex[best]).map(|(a, b)| (a - b).abs()))
            .fold(0.0f64, f64::max);
        let spread = values[worst] - values[best];
        if size <= opts.xtol * scale && (spread <= opts.ftol || !spread.is_finite() && size == 0.0)
        {
            converged = true;
            break;
        }
        // an iteration costs at most n + 2 evaluations (reflect, contract, shrink)
        if evals + n + 2 > opts.max_evals {
            break;
        }

        let mut centroid = vec![0.0; n];
        for &i in order.iter().take(n) {
            for (c, v) in centroid.iter_mut().zip(&simplex[i]) {
                *c += v / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[worst])
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let xr = along(opts.reflection);
        let fr = eval(&xr, &mut evals);
        if fr < values[best] {
            let xe = along(opts.reflection * opts.expansion);
            let fe = eval(&xe, &mut evals);
            if fe < fr {
                simplex[worst] = xe;
                values[worst] = fe;
            } else {
                simplex[worst] = xr;
                values[worst] = fr;
            }
            continue;
        }
        if fr < values[second_worst] {
            simplex[worst] = xr;
            values[worst] = fr;
            continue;
        }
        let (xc, fc) = if fr < values[worst] {
            let xc = along(opts.reflection * opts.contraction);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        } else {
            let xc = along(-opts.contraction);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        };
        if fc < fr.min(values[worst]) {
            simplex[worst] = xc;
            values[worst] = fc;
            continue;
        }
        // shrink toward the best vertex
        let xb = simplex[best].clone();
        for &i in order.iter().skip(1) {
            let x: Vec<f64> = simplex[i]
                .iter()
                .zip(&xb)
                .map(|(v, b)| b + opts.shrink * (v - b))
                .collect();
            values[i] = eval(&x, &mut evals);
            simplex[i] = x;
        }
    }

    let best = (0..=n)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .expect("simplex is nonempty");
    Ok(OptimResult {
        x: simplex[best].clone(),
        f: values[best],
        evals,
        converged,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_1d() {
        let r = nelder_mead(|x| (x[0] - 2.0).powi(2), &[0.0], &Default::default()).unwrap();
        assert!(r.converged);
        assert!((r.x[0] - 2.0).abs() < 1e-6, "{:?}", r.x);
    }

    #[test]
    fn rosenbrock() {
        let rosen = |x: &[f64]| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2);
        let opts = NelderMeadOptions {
            max_evals: 5000,
            ..Default::default()
        };
        let r = nelder_mead(rosen, &[-1.2, 1.0], &opts).unwrap();
        assert!(r.converged);
        assert!(
            (r.x[0] - 1.0).abs() < 1e-4 && (r.x[1] - 1.0).abs() < 1e-4,
            "{:?}",
            r.x
        );
    }

    #[test]
    fn infinite_plateau_next_to_basin() {
        // basin at x = 1, infinite wall for x < 0.5
        let f = |x: &[f64]| {
            if x[0] < 0.5 {
                f64::INFINITY
            } else {
                (x[0] - 1.0).powi(2) + x[1].powi(2)
            }
        };
        let r = nelder_mead(f, &[0.6, 0.3], &Default::default()).unwrap();
        assert!(r.f.is_finite());
        assert!((r.x[0] - 1.0).abs() < 1e-5 && r.x[1].abs() < 1e-5);
    }

    #[test]
    fn nan_objective_is_repelled() {
        let f = |x: &[f64]| {
            if x[0] > 3.0 {
                f64::NAN
            } else {
                (x[0] - 2.9).powi(2)
            }
        };
        let r = nelder_mead(f, &[0.0], &Default::default()).unwrap();
        assert!((r.x[0] - 2.9).abs() < 1e-6);
    }

    #[test]
    fn non_finite_start_is_an_error() {
        assert!(nelder_mead(|_| f64::NAN, &[1.0], &Default::default()).is_err());
    }

    #[test]
    fn budget_is_respected() {
        let opts = NelderMeadOptions {
            max_evals: 30,
            ..Default::default()
        };
        let rosen = |x: &[f64]| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2);
        let r = nelder_mead(rosen, &[-1.2, 1.0], &opts).unwrap();
        assert!(!r.converged);
        assert!(r.evals <= 30);
    }
}
