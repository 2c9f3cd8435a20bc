use nalgebra::{DMatrix, DVector};

use super::data::DataRecord;
use super::model::{check_data, EstimatorSpec, IdentifiedModel, ModelCoefficients, Structure};
use crate::error::{Error, Result};

/// Relative singular-value floor below which the Gram matrix counts as singular.
const RANK_TOL: f64 = 1e-13;

/// Least-squares fit of `A(q) y = B(q) u + e` by the normal equations.
pub fn estimate_arx(data: &DataRecord, spec: &EstimatorSpec) -> Result<IdentifiedModel> {
    if spec.structure != Structure::Arx {
        return Err(Error::invalid(format!("estimate_arx called with {spec}")));
    }
    check_data(data, spec)?;
    let theta = arx_theta(data, spec.orders.na, spec.orders.nb, spec.nk)?;
    let coeffs = ModelCoefficients::from_theta(spec, &theta);
    Ok(IdentifiedModel::from_coefficients(
        *spec,
        data,
        coeffs,
        true,
        1,
        Vec::new(),
    ))
}

/// Normal-equation solution `[a_1..a_na, b_1..b_nb]`.
pub(crate) fn arx_theta(data: &DataRecord, na: usize, nb: usize, nk: usize) -> Result<Vec<f64>> {
    let (u, y) = (data.u(), data.y());
    let n0 = na.max(nk + nb - 1);
    let rows = data.len().saturating_sub(n0);
    let d = na + nb;
    if rows < d {
        return Err(Error::invalid(format!(
            "{} samples are too few for {d} ARX parameters",
            data.len()
        )));
    }
    let phi = DMatrix::from_fn(rows, d, |r, j| {
        let t = r + n0;
        if j < na {
            -y[t - j - 1]
        } else {
            u[t - nk - (j - na)]
        }
    });
    let target = DVector::from_fn(rows, |r, _| y[r + n0]);
    let gram = phi.transpose() * &phi;
    let sv = gram.singular_values();
    let smax = sv.max();
    let smin = sv.min();
    if !(smax > 0.0) || smin <= RANK_TOL * smax {
        let what = if u.iter().all(|v| *v == 0.0) {
            "the input is identically zero (no excitation)".to_string()
        } else {
            format!("Gram matrix is singular (condition estimate {:.1e}); the input does not excite all {d} parameters", smax / smin.max(f64::MIN_POSITIVE))
        };
        return Err(Error::RankDeficient(what));
    }
    let rhs = phi.transpose() * target;
    let theta = gram
        .cholesky()
        .map(|c| c.solve(&rhs))
        .ok_or_else(|| Error::RankDeficient("Gram matrix is not positive definite".into()))?;
    Ok(theta.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sysid::data::lfilter;

    fn excitation(n: usize) -> Vec<f64> {
        // deterministic, persistently exciting
        (0..n)
            .map(|k| ((k * 7919) % 13) as f64 / 6.0 - 1.0)
            .collect()
    }

    #[test]
    fn exact_recovery() {
        let u = excitation(60);
        let y = lfilter(&[0.0, 1.0], &[1.0, -0.5], &u);
        let data = DataRecord::new(0.1, u, y).unwrap();
        let m = estimate_arx(&data, &EstimatorSpec::arx(1, 1, 1)).unwrap();
        assert!((m.coeffs.a[1] + 0.5).abs() < 1e-10);
        assert!((m.coeffs.b[1] - 1.0).abs() < 1e-10);
        assert!(m.loss < 1e-20);
    }

    #[test]
    fn matches_grid_search() {
        let data =
            DataRecord::new(1.0, vec![1.0, 0.5, -1.0, 2.0], vec![0.2, 1.1, 0.9, -0.4]).unwrap();
        let spec = EstimatorSpec::arx(1, 1, 1);
        let m = estimate_arx(&data, &spec).unwrap();
        let loss = |a: f64, b: f64| {
            (1..4)
                .map(|t| (data.y()[t] + a * data.y()[t - 1] - b * data.u()[t - 1]).powi(2))
                .sum::<f64>()
        };
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for i in -400..=400 {
            for j in -400..=400 {
                let (a, b) = (i as f64 * 0.005, j as f64 * 0.005);
                let v = loss(a, b);
                if v < best.0 {
                    best = (v, a, b);
                }
            }
        }
        assert!((m.coeffs.a[1] - best.1).abs() <= 0.005);
        assert!((m.coeffs.b[1] - best.2).abs() <= 0.005);
        assert!(loss(m.coeffs.a[1], m.coeffs.b[1]) <= best.0 + 1e-12);
    }

    #[test]
    fn zero_input_is_rank_deficient() {
        let data = DataRecord::new(0.1, vec![0.0; 20], vec![0.0; 20]).unwrap();
        assert!(matches!(
            estimate_arx(&data, &EstimatorSpec::arx(1, 1, 1)),
            Err(Error::RankDeficient(_))
        ));
    }
}
