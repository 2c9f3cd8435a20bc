#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    /// |I(n) - I(n/2)|, the change seen when halving the node count.
    pub error_estimate: f64,
}

/// `n` logarithmically spaced nodes on `[a, b]`, endpoints included.
pub fn log_trapezoid_nodes(a: f64, b: f64, n: usize) -> Vec<f64> {
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|i| {
            if i == 0 {
                a
            } else if i + 1 == n {
                b
            } else {
                (la + (lb - la) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

fn trapezoid(nodes: &[f64], values: &[f64]) -> f64 {
    nodes
        .windows(2)
        .zip(values.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}

/// Trapezoid rule in `x` (not `ln x`) on log-spaced nodes.
pub fn log_trapezoid<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, n: usize) -> QuadResult {
    assert!(a > 0.0 && b > a, "log_trapezoid needs 0 < a < b");
    assert!(n >= 2, "log_trapezoid needs at least two nodes");
    let nodes = log_trapezoid_nodes(a, b, n);
    let values: Vec<f64> = nodes.iter().map(|&x| f(x)).collect();
    let value = trapezoid(&nodes, &values);
    let error_estimate = if n >= 3 && (n - 1).is_multiple_of(2) {
        let coarse_x: Vec<f64> = nodes.iter().step_by(2).copied().collect();
        let coarse_y: Vec<f64> = values.iter().step_by(2).copied().collect();
        (value - trapezoid(&coarse_x, &coarse_y)).abs()
    } else {
        let coarse = log_trapezoid_nodes(a, b, (n / 2).max(2));
        let coarse_y: Vec<f64> = coarse.iter().map(|&x| f(x)).collect();
        (value - trapezoid(&coarse, &coarse_y)).abs()
    };
    QuadResult {
        value,
        error_estimate,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn inverse_square() {
        let q = log_trapezoid(|w| 1.0 / (w * w), 1.0, 10.0, 4096);
        assert!((q.value - 0.9).abs() < 1e-3);
        assert!(q.error_estimate < 1e-3);
    }

    #[test]
    fn constant_is_exact() {
        let q = log_trapezoid(|_| 2.5, 0.3, 7.0, 17);
        assert!((q.value - 2.5 * 6.7).abs() < 1e-12);
        assert!(q.error_estimate < 1e-12);
    }

    #[test]
    fn first_order_h2_squared() {
        let q = log_trapezoid(|w| 1.0 / (1.0 + w * w), 1e-6, 1e6, 4096);
        let h2sq = 2.0 * q.value / (2.0 * PI);
        assert!((h2sq - 0.5).abs() / 0.5 < 5e-3, "{h2sq}");
    }

    #[test]
    fn nodes_hit_endpoints() {
        let x = log_trapezoid_nodes(1e-6, 1e6, 4096);
        assert_eq!(x[0], 1e-6);
        assert_eq!(x[4095], 1e6);
        assert!(x.windows(2).all(|w| w[1] > w[0]));
    }
}
