use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Roots of a real polynomial given by ascending coefficients.
///
/// Eigenvalues of the balanced companion matrix, each polished by a few
/// guarded Newton steps on the original coefficients.
pub fn poly_roots(coeffs: &[f64]) -> Result<Vec<Complex64>> {
    let end = coeffs
        .iter()
        .rposition(|c| *c != 0.0)
        .ok_or_else(|| Error::invalid("roots of the zero polynomial are undefined"))?;
    if coeffs[..=end].iter().any(|c| !c.is_finite()) {
        return Err(Error::invalid("polynomial has non-finite coefficients"));
    }
    let trimmed = &coeffs[..=end];
    if end == 0 {
        return Err(Error::invalid("a constant polynomial has no roots"));
    }
    let zeros_at_origin = trimmed.iter().position(|c| *c != 0.0).unwrap_or(0);
    let reduced = &trimmed[zeros_at_origin..];
    let mut roots = vec![Complex64::new(0.0, 0.0); zeros_at_origin];
    let n = reduced.len() - 1;
    if n == 0 {
        return Ok(roots);
    }
    let lead = reduced[n];
    if n == 1 {
        roots.push(Complex64::new(-reduced[0] / lead, 0.0));
        return Ok(roots);
    }

    let mut companion = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        companion[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        companion[(i, n - 1)] = -reduced[i] / lead;
    }
    balance(&mut companion);
    let eig = companion.complex_eigenvalues();
    for mut z in eig.iter().copied() {
        polish(reduced, &mut z);
        roots.push(z);
    }
    if roots.iter().any(|r| !r.re.is_finite() || !r.im.is_finite()) {
        return Err(Error::Numerical(
            "root finder produced non-finite roots".into(),
        ));
    }
    Ok(roots)
}

fn horner(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

fn polish(coeffs: &[f64], z: &mut Complex64) {
    let (mut p, _) = horner(coeffs, *z);
    for _ in 0..4 {
        let (_, dp) = horner(coeffs, *z);
        if dp.norm() == 0.0 {
            return;
        }
        let candidate = *z - p / dp;
        let (pc, _) = horner(coeffs, candidate);
        if pc.norm() < p.norm() {
            *z = candidate;
            p = pc;
        } else {
            return;
        }
    }
}

/// Parlett-Reinsch diagonal similarity balancing with radix 2.
fn balance(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    let radix = 2.0f64;
    let sqrdx = radix * radix;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c != 0.0 && r != 0.0 {
                let mut g = r / radix;
                let mut f = 1.0;
                let s = c + r;
                while c < g {
                    f *= radix;
                    c *= sqrdx;
                }
                g = r * radix;
                while c > g {
                    f /= radix;
                    c /= sqrdx;
                }
                if (c + r) / f < 0.95 * s {
                    done = false;
                    let g = 1.0 / f;
                    for j in 0..n {
                        a[(i, j)] *= g;
                    }
                    for j in 0..n {
                        a[(j, i)] *= f;
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted_re(mut r: Vec<Complex64>) -> Vec<Complex64> {
        r.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        r
    }

    #[test]
    fn difference_of_squares() {
        let r = sorted_re(poly_roots(&[-1.0, 0.0, 1.0]).unwrap());
        assert!((r[0].re + 1.0).abs() < 1e-12 && (r[1].re - 1.0).abs() < 1e-12);
        assert!(r.iter().all(|z| z.im.abs() < 1e-12));
    }

    #[test]
    fn triple_root() {
        let r = poly_roots(&[1.0, 3.0, 3.0, 1.0]).unwrap();
        assert_eq!(r.len(), 3);
        for z in r {
            assert!((z - Complex64::new(-1.0, 0.0)).norm() < 1e-4, "{z}");
        }
    }

    #[test]
    fn zero_polynomial_is_an_error() {
        assert!(poly_roots(&[0.0, 0.0]).is_err());
        assert!(poly_roots(&[]).is_err());
        assert!(poly_roots(&[3.0]).is_err());
    }

    #[test]
    fn roots_at_origin_are_exact() {
        // s^2 (s + 2)
        let r = sorted_re(poly_roots(&[0.0, 0.0, 2.0, 1.0]).unwrap());
        assert_eq!(r.len(), 3);
        assert!((r[0].re + 2.0).abs() < 1e-12);
        assert_eq!(r[1], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn widely_spread_real_roots() {
        // roots at -1e-4 .. -1e4, one per decade
        let roots: Vec<f64> = (-4..=4).map(|k| 10f64.powi(k)).collect();
        let mut c = vec![1.0];
        for p in &roots {
            let mut next = vec![0.0; c.len() + 1];
            for (i, v) in c.iter().enumerate() {
                next[i] += v * p;
                next[i + 1] += v;
            }
            c = next;
        }
        let found = sorted_re(poly_roots(&c).unwrap());
        let mut want: Vec<f64> = roots.iter().map(|p| -p).collect();
        want.sort_by(f64::total_cmp);
        for (z, w) in found.iter().zip(want) {
            assert!((z.re - w).abs() < 1e-8 * w.abs().max(1.0), "{z} vs {w}");
        }
    }
}
