//! Bilinear (Tustin) conversion between `z⁻¹` polynomials and continuous time.

use super::polynomial::Polynomial;
use super::rational::RationalTf;
use crate::error::{Error, Result};

fn check_ts(ts: f64) -> Result<()> {
    if !(ts > 0.0) || !ts.is_finite() {
        return Err(Error::invalid(format!(
            "sampling period must be > 0, got {ts}"
        )));
    }
    Ok(())
}

/// `Σ p_k z^{-k}` with `z^{-1} = (1 - sTs/2)/(1 + sTs/2)`, multiplied through by `(1 + sTs/2)^n`.
fn substitute(p: &[f64], n: usize, ts: f64) -> Polynomial {
    let h = 0.5 * ts;
    let minus = Polynomial::new(vec![1.0, -h]);
    let plus = Polynomial::new(vec![1.0, h]);
    let mut acc = Polynomial::zero();
    for (k, &c) in p.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let term = &minus.powi(k) * &plus.powi(n - k);
        acc = &acc + &term.scale(c);
    }
    acc
}

/// Continuous equivalent of `num(z⁻¹)/den(z⁻¹)` sampled at `ts`.
pub fn tustin_d2c(num: &Polynomial, den: &Polynomial, ts: f64) -> Result<RationalTf> {
    check_ts(ts)?;
    if den.is_zero() {
        return Err(Error::invalid("discrete denominator is identically zero"));
    }
    // A pole at z = -1 makes den(z⁻¹ = -1) vanish.
    let at_nyquist = den.eval(-1.0);
    let scale = den.coeffs().iter().map(|c| c.abs()).sum::<f64>();
    if at_nyquist.abs() <= 1e-13 * scale {
        return Err(Error::PoleAtNyquist);
    }
    let n = num.coeffs().len().max(den.coeffs().len()) - 1;
    let snum = substitute(num.coeffs(), n, ts);
    let sden = substitute(den.coeffs(), n, ts);
    RationalTf::new(snum, sden)
}

/// Discrete `z⁻¹` polynomials of a delay-free proper system, normalized so the
/// denominator's constant coefficient is 1.
pub fn tustin_c2d(sys: &RationalTf, ts: f64) -> Result<(Polynomial, Polynomial)> {
    check_ts(ts)?;
    if sys.delay() > 0.0 {
        return Err(Error::invalid(
            "Tustin conversion needs a delay-free system",
        ));
    }
    if !sys.is_proper() {
        return Err(Error::Improper {
            num: sys.num().degree(),
            den: sys.den().degree(),
        });
    }
    // s = (2/Ts)(1 - z⁻¹)/(1 + z⁻¹); multiply through by (1 + z⁻¹)^n.
    let n = sys.den().degree();
    let g = 2.0 / ts;
    let minus = Polynomial::new(vec![g, -g]);
    let plus = Polynomial::new(vec![1.0, 1.0]);
    let map = |p: &Polynomial| {
        let mut acc = Polynomial::zero();
        for (k, &c) in p.coeffs().iter().enumerate() {
            if c != 0.0 {
                acc = &acc + &(&minus.powi(k) * &plus.powi(n - k)).scale(c);
            }
        }
        acc
    };
    let dnum = map(sys.num());
    let dden = map(sys.den());
    let lead = dden.coeff(0);
    if lead == 0.0 {
        return Err(Error::Numerical(
            "Tustin map produced a non-causal denominator".into(),
        ));
    }
    Ok((dnum.scale(1.0 / lead), dden.scale(1.0 / lead)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity() {
        let g = tustin_d2c(&Polynomial::one(), &Polynomial::one(), 0.1).unwrap();
        assert_eq!(g, RationalTf::unity());
    }

    #[test]
    fn unit_delay() {
        let g = tustin_d2c(&Polynomial::new(vec![0.0, 1.0]), &Polynomial::one(), 0.1).unwrap();
        let want = RationalTf::from_descending(&[-0.05, 1.0], &[0.05, 1.0]).unwrap();
        for (a, b) in g.num().coeffs().iter().zip(want.num().coeffs()) {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in g.den().coeffs().iter().zip(want.den().coeffs()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn dc_preserved_and_round_trip() {
        let num = Polynomial::new(vec![0.0, 0.3, 0.1]);
        let den = Polynomial::new(vec![1.0, -1.2, 0.35]);
        let g = tustin_d2c(&num, &den, 0.1).unwrap();
        let h1 = num.eval(1.0) / den.eval(1.0);
        assert!((g.dc_gain().unwrap() - h1).abs() < 1e-12 * h1.abs());
        let (n2, d2) = tustin_c2d(&g, 0.1).unwrap();
        for (a, b) in n2.coeffs().iter().zip(num.coeffs()) {
            assert!((a - b).abs() < 1e-9);
        }
        for (a, b) in d2.coeffs().iter().zip(den.coeffs()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn nyquist_pole_rejected() {
        let den = Polynomial::new(vec![1.0, 1.0]);
        assert_eq!(
            tustin_d2c(&Polynomial::one(), &den, 0.1),
            Err(Error::PoleAtNyquist)
        );
        assert!(tustin_d2c(&Polynomial::one(), &Polynomial::one(), 0.0).is_err());
    }
}
