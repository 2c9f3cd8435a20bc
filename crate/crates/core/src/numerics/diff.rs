/// Symmetric difference quotient `(f(x + h) - f(x - h)) / 2h`.
pub fn central_difference<F: FnMut(f64) -> f64>(mut f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Forward-difference Jacobian of `f` at `x`, row-major `m x n`, reusing `fx = f(x)`.
pub fn forward_jacobian<F>(f: &mut F, x: &[f64], fx: &[f64]) -> Vec<f64>
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    let n = x.len();
    let m = fx.len();
    let mut jac = vec![0.0; m * n];
    let mut xp = x.to_vec();
    for j in 0..n {
        let h = f64::EPSILON.sqrt() * if x[j] == 0.0 { 1.0 } else { x[j].abs() };
        xp[j] = x[j] + h;
        let step = xp[j] - x[j];
        let fp = f(&xp);
        for i in 0..m {
            jac[i * n + j] = (fp[i] - fx[i]) / step;
        }
        xp[j] = x[j];
    }
    jac
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn central_difference_of_cubic() {
        let d = central_difference(|x| x.powi(3), 2.0, 1e-4);
        assert!((d - 12.0).abs() < 1e-7);
    }

    #[test]
    fn jacobian_of_linear_map() {
        let mut f = |x: &[f64]| vec![2.0 * x[0] - x[1], 3.0 * x[1]];
        let x = [1.0, 4.0];
        let fx = f(&x);
        let j = forward_jacobian(&mut f, &x, &fx);
        for (a, b) in j.iter().zip([2.0, -1.0, 0.0, 3.0]) {
            assert!((a - b).abs() < 1e-6);
        }
    }
}
