//! Band-limited rational approximation of fractional powers and delays.

use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fractional::{FractionalTf, Term};
use super::polynomial::Polynomial;
use super::rational::RationalTf;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RationalizeSettings {
    pub oustaloup_order: usize,
    pub band: (f64, f64),
    pub pade_order: usize,
}

impl Default for RationalizeSettings {
    fn default() -> Self {
        Self {
            oustaloup_order: 4,
            band: (1e-4, 1e4),
            pade_order: 3,
        }
    }
}

impl RationalizeSettings {
    pub fn center(&self) -> f64 {
        (self.band.0 * self.band.1).sqrt()
    }

    fn validate(&self) -> Result<()> {
        check_band(self.band)?;
        if self.oustaloup_order == 0 {
            return Err(Error::invalid("Oustaloup order must be >= 1"));
        }
        if self.pade_order == 0 {
            return Err(Error::invalid("Pade order must be >= 1"));
        }
        Ok(())
    }
}

fn check_band((lo, hi): (f64, f64)) -> Result<()> {
    if !(lo > 0.0) || !(hi > lo) || !hi.is_finite() {
        return Err(Error::invalid(format!(
            "degenerate band [{lo}, {hi}]: need 0 < low < high"
        )));
    }
    Ok(())
}

/// Oustaloup's recursive filter for `s^gamma`, `gamma` in (-1, 1): 2N+1
/// zero/pole pairs spread over the band, gain fixed so the magnitude is exact at
/// the band's geometric center. Returned as (numerator, denominator).
fn oustaloup_fraction(gamma: f64, order: usize, (lo, hi): (f64, f64)) -> (Polynomial, Polynomial) {
    if gamma == 0.0 {
        return (Polynomial::one(), Polynomial::one());
    }
    let n = order as f64;
    let ratio = hi / lo;
    let m = 2.0 * n + 1.0;
    let ks = (0..=2 * order).map(|i| i as f64 - n);
    let zeros: Vec<f64> = ks
        .clone()
        .map(|k| -lo * ratio.powf((k + n + 0.5 * (1.0 - gamma)) / m))
        .collect();
    let poles: Vec<f64> = ks
        .map(|k| -lo * ratio.powf((k + n + 0.5 * (1.0 + gamma)) / m))
        .collect();
    let num = Polynomial::from_real_roots(&zeros);
    let den = Polynomial::from_real_roots(&poles);
    let wc = (lo * hi).sqrt();
    let s = Complex64::new(0.0, wc);
    let at_center = (num.eval_complex(s) / den.eval_complex(s)).norm();
    (num.scale(wc.powf(gamma) / at_center), den)
}

/// Split `alpha = n + gamma` with `n` rounded toward zero and `gamma` in (-1, 1).
pub fn split_order(alpha: f64) -> (i64, f64) {
    let n = alpha.trunc();
    (n as i64, alpha - n)
}

/// Rational approximant of `s^alpha` over `band`.
pub fn oustaloup(alpha: f64, order: usize, band: (f64, f64)) -> Result<RationalTf> {
    check_band(band)?;
    if order == 0 {
        return Err(Error::invalid("Oustaloup order must be >= 1"));
    }
    if !alpha.is_finite() {
        return Err(Error::invalid("fractional order must be finite"));
    }
    let (n, gamma) = split_order(alpha);
    let (mut num, mut den) = oustaloup_fraction(gamma, order, band);
    if n > 0 {
        num = num.shift(n as usize);
    } else if n < 0 {
        den = den.shift((-n) as usize);
    }
    RationalTf::new(num, den)
}

/// Diagonal Padé approximant of `exp(-delay * s)`.
pub fn pade_delay(delay: f64, order: usize) -> Result<RationalTf> {
    if !(delay >= 0.0) || !delay.is_finite() {
        return Err(Error::invalid(format!(
            "delay must be finite and >= 0, got {delay}"
        )));
    }
    if order == 0 {
        return Err(Error::invalid("Pade order must be >= 1"));
    }
    if delay == 0.0 {
        return Ok(RationalTf::unity());
    }
    let n = order;
    let mut c = vec![1.0f64; n + 1];
    for k in 0..n {
        c[k + 1] = c[k] * (n - k) as f64 / ((2 * n - k) as f64 * (k + 1) as f64);
    }
    let den: Vec<f64> = (0..=n).map(|k| c[k] * delay.powi(k as i32)).collect();
    let num: Vec<f64> = den
        .iter()
        .enumerate()
        .map(|(k, v)| if k % 2 == 1 { -v } else { *v })
        .collect();
    RationalTf::new(Polynomial::new(num), Polynomial::new(den))
}

struct SideSum {
    /// Sum of terms over the common denominator of its Oustaloup factors.
    numerator: Polynomial,
    gammas: Vec<u64>,
}

fn side_sum(
    terms: &[Term],
    cache: &mut HashMap<u64, (Polynomial, Polynomial)>,
    settings: &RationalizeSettings,
) -> SideSum {
    let mut gammas: Vec<u64> = Vec::new();
    let mut parts: Vec<(f64, usize, u64)> = Vec::with_capacity(terms.len());
    for t in terms {
        let n = t.exponent.floor();
        let gamma = t.exponent - n;
        let key = gamma.to_bits();
        if gamma != 0.0 {
            cache.entry(key).or_insert_with(|| {
                oustaloup_fraction(gamma, settings.oustaloup_order, settings.band)
            });
            if !gammas.contains(&key) {
                gammas.push(key);
            }
        }
        parts.push((t.coeff, n as usize, key));
    }
    let mut numerator = Polynomial::zero();
    for (coeff, n, key) in parts {
        let mut p = Polynomial::monomial(coeff, n);
        for g in &gammas {
            let (fnum, fden) = &cache[g];
            p = if *g == key { &p * fnum } else { &p * fden };
        }
        numerator = &numerator + &p;
    }
    SideSum { numerator, gammas }
}

/// Replace every fractional power by its Oustaloup approximant and the delay
/// by its Padé approximant. Integer-order, delay-free systems come back exact.
pub fn rationalize(sys: &FractionalTf, settings: &RationalizeSettings) -> Result<RationalTf> {
    settings.validate()?;
    let mut cache = HashMap::new();
    let top = side_sum(sys.num_terms(), &mut cache, settings);
    let bottom = side_sum(sys.den_terms(), &mut cache, settings);
    let mut num = top.numerator;
    let mut den = bottom.numerator;
    // Oustaloup denominators shared by both sides cancel.
    for g in bottom.gammas.iter().filter(|g| !top.gammas.contains(g)) {
        num = &num * &cache[g].1;
    }
    for g in top.gammas.iter().filter(|g| !bottom.gammas.contains(g)) {
        den = &den * &cache[g].1;
    }
    let body = RationalTf::new(num, den)?;
    if sys.delay() > 0.0 {
        Ok(body.series(&pade_delay(sys.delay(), settings.pade_order)?))
    } else {
        Ok(body)
    }
}
