use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::freq::{delay_factor, jw_pow, FrequencyEval};
use super::polynomial::Polynomial;
use super::rational::RationalTf;
use crate::error::{Error, Result};

/// `coeff * s^exponent`, serialized as `[coeff, exponent]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "(f64, f64)", into = "(f64, f64)")]
pub struct Term {
    pub coeff: f64,
    pub exponent: f64,
}

impl Term {
    pub fn new(coeff: f64, exponent: f64) -> Self {
        Self { coeff, exponent }
    }
}

impl From<(f64, f64)> for Term {
    fn from((coeff, exponent): (f64, f64)) -> Self {
        Self { coeff, exponent }
    }
}

impl From<Term> for (f64, f64) {
    fn from(t: Term) -> Self {
        (t.coeff, t.exponent)
    }
}

/// Pseudo-rational transfer function `sum a_i s^p_i / sum b_k s^q_k * exp(-L s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionalTf {
    num: Vec<Term>,
    den: Vec<Term>,
    delay: f64,
}

/// Sort by decreasing exponent, merge equal exponents, drop zero coefficients.
fn canonical_terms(mut terms: Vec<Term>) -> Result<Vec<Term>> {
    for t in &terms {
        if !t.coeff.is_finite() || !t.exponent.is_finite() {
            return Err(Error::invalid(
                "terms must have finite coefficients and exponents",
            ));
        }
        if t.exponent < 0.0 {
            return Err(Error::invalid(format!(
                "exponents must be >= 0, got {}",
                t.exponent
            )));
        }
    }
    terms.sort_by(|a, b| b.exponent.total_cmp(&a.exponent));
    let mut out: Vec<Term> = Vec::with_capacity(terms.len());
    for t in terms {
        match out.last_mut() {
            Some(last) if last.exponent == t.exponent => last.coeff += t.coeff,
            _ => out.push(t),
        }
    }
    out.retain(|t| t.coeff != 0.0);
    Ok(out)
}

impl FractionalTf {
    pub fn new(num: Vec<Term>, den: Vec<Term>, delay: f64) -> Result<Self> {
        let num = canonical_terms(num)?;
        let den = canonical_terms(den)?;
        if den.is_empty() {
            return Err(Error::invalid(
                "denominator needs at least one nonzero term",
            ));
        }
        if !(delay >= 0.0) || !delay.is_finite() {
            return Err(Error::invalid(format!(
                "delay must be finite and >= 0, got {delay}"
            )));
        }
        Ok(Self { num, den, delay })
    }

    /// Build from `(coeff, exponent)` pairs.
    pub fn from_pairs(num: &[(f64, f64)], den: &[(f64, f64)], delay: f64) -> Result<Self> {
        Self::new(
            num.iter().map(|&p| p.into()).collect(),
            den.iter().map(|&p| p.into()).collect(),
            delay,
        )
    }

    pub fn from_rational(g: &RationalTf) -> Self {
        let terms = |p: &Polynomial| {
            p.coeffs()
                .iter()
                .enumerate()
                .rev()
                .filter(|(_, c)| **c != 0.0)
                .map(|(k, c)| Term::new(*c, k as f64))
                .collect::<Vec<_>>()
        };
        Self {
            num: terms(g.num()),
            den: terms(g.den()),
            delay: g.delay(),
        }
    }

    pub fn num_terms(&self) -> &[Term] {
        &self.num
    }

    pub fn den_terms(&self) -> &[Term] {
        &self.den
    }

    pub fn delay(&self) -> f64 {
        self.delay
    }

    pub fn is_integer_order(&self) -> bool {
        self.num
            .iter()
            .chain(&self.den)
            .all(|t| t.exponent.fract() == 0.0)
    }

    /// Exact conversion when every exponent is an integer.
    pub fn to_rational(&self) -> Option<RationalTf> {
        if !self.is_integer_order() {
            return None;
        }
        let poly = |terms: &[Term]| {
            let deg = terms.first().map(|t| t.exponent as usize).unwrap_or(0);
            let mut c = vec![0.0; deg + 1];
            for t in terms {
                c[t.exponent as usize] += t.coeff;
            }
            Polynomial::new(c)
        };
        RationalTf::with_delay(poly(&self.num), poly(&self.den), self.delay).ok()
    }

    /// Ratio of the zero-exponent terms.
    pub fn dc_gain(&self) -> Result<f64> {
        let constant = |terms: &[Term]| {
            terms
                .iter()
                .filter(|t| t.exponent == 0.0)
                .map(|t| t.coeff)
                .sum::<f64>()
        };
        let d0 = constant(&self.den);
        if d0 == 0.0 {
            return Err(Error::IntegratingSystem);
        }
        Ok(constant(&self.num) / d0)
    }

    pub fn scale(&self, k: f64) -> Self {
        let mut out = self.clone();
        for t in &mut out.num {
            t.coeff *= k;
        }
        out.num.retain(|t| t.coeff != 0.0);
        out
    }

    fn product(a: &[Term], b: &[Term]) -> Vec<Term> {
        a.iter()
            .flat_map(|x| {
                b.iter()
                    .map(move |y| Term::new(x.coeff * y.coeff, x.exponent + y.exponent))
            })
            .collect()
    }

    /// Cascade of two fractional systems; delays add.
    pub fn series(&self, other: &Self) -> Self {
        Self::new(
            Self::product(&self.num, &other.num),
            Self::product(&self.den, &other.den),
            self.delay + other.delay,
        )
        .expect("product of valid systems is valid")
    }

    pub fn highest_den_exponent(&self) -> f64 {
        self.den[0].exponent
    }

    fn sum_at(terms: &[Term], omega: f64) -> Complex64 {
        terms
            .iter()
            .map(|t| t.coeff * jw_pow(omega, t.exponent))
            .sum()
    }
}

impl FrequencyEval for FractionalTf {
    fn response_at(&self, omega: f64) -> Option<Complex64> {
        let d = Self::sum_at(&self.den, omega);
        if d.norm() == 0.0 {
            return None;
        }
        Some(Self::sum_at(&self.num, omega) / d * delay_factor(self.delay, omega))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lti::freq::FrequencyEval;

    #[test]
    fn canonical_ordering_and_merging() {
        let g = FractionalTf::from_pairs(
            &[(1.0, 0.0), (2.0, 0.5), (3.0, 0.0)],
            &[(1.0, 0.3), (0.0, 2.0), (1.0, 1.2)],
            0.0,
        )
        .unwrap();
        assert_eq!(g.num_terms(), &[Term::new(2.0, 0.5), Term::new(4.0, 0.0)]);
        assert_eq!(g.den_terms(), &[Term::new(1.0, 1.2), Term::new(1.0, 0.3)]);
    }

    #[test]
    fn rejects_invalid() {
        assert!(FractionalTf::from_pairs(&[(1.0, 0.0)], &[], 0.0).is_err());
        assert!(FractionalTf::from_pairs(&[(1.0, 0.0)], &[(0.0, 1.0)], 0.0).is_err());
        assert!(FractionalTf::from_pairs(&[(1.0, -0.5)], &[(1.0, 0.0)], 0.0).is_err());
        assert!(FractionalTf::from_pairs(&[(1.0, 0.0)], &[(1.0, 0.0)], -1.0).is_err());
    }

    #[test]
    fn nioptd_i_example_response() {
        // 2 / (s^0.5 + 1) at omega = 1
        let g = FractionalTf::from_pairs(&[(2.0, 0.0)], &[(1.0, 0.5), (1.0, 0.0)], 0.0).unwrap();
        let v = g.response_at(1.0).unwrap();
        let want = Complex64::new(2.0, 0.0)
            / (Complex64::new(1.0, 0.0) + Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4));
        assert!((v - want).norm() < 1e-15);
        assert_eq!(g.dc_gain().unwrap(), 2.0);
    }

    #[test]
    fn rational_round_trip() {
        let r = RationalTf::from_descending(&[1.0, 2.0], &[1.0, 3.0, 2.0]).unwrap();
        let f = FractionalTf::from_rational(&r);
        assert!(f.is_integer_order());
        assert_eq!(f.to_rational().unwrap(), r);
        for w in [0.1, 1.0, 10.0] {
            let a = f.response_at(w).unwrap();
            let b = r.response_at(w).unwrap();
            assert!((a - b).norm() < 1e-14 * b.norm());
        }
    }

    #[test]
    fn integrating_denominator() {
        let g = FractionalTf::from_pairs(&[(1.0, 0.0)], &[(1.0, 1.1)], 0.0).unwrap();
        assert_eq!(g.dc_gain(), Err(Error::IntegratingSystem));
    }

    #[test]
    fn series_adds_exponents_and_delays() {
        let a = FractionalTf::from_pairs(&[(2.0, 0.5)], &[(1.0, 0.0)], 0.1).unwrap();
        let b = FractionalTf::from_pairs(&[(3.0, 0.25)], &[(1.0, 1.0), (1.0, 0.0)], 0.2).unwrap();
        let c = a.series(&b);
        assert_eq!(c.num_terms(), &[Term::new(6.0, 0.75)]);
        assert!((c.delay() - 0.3).abs() < 1e-15);
        for w in [0.3, 3.0] {
            let lhs = c.response_at(w).unwrap();
            let rhs = a.response_at(w).unwrap() * b.response_at(w).unwrap();
            assert!((lhs - rhs).norm() < 1e-13 * rhs.norm());
        }
    }
}
