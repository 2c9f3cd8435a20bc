use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lti::FractionalTf;

/// `K e^{-Ls} / (T s^α + 1)`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NioptdI {
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub alpha: f64,
}

/// `K e^{-Ls} / (s^α + 2ζω_n s^β + ω_n²)`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NioptdII {
    #[serde(rename = "K")]
    pub k: f64,
    pub zeta: f64,
    pub omega_n: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl NioptdI {
    pub fn foptd(k: f64, t: f64, l: f64) -> Self {
        Self {
            k,
            t,
            l,
            alpha: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t > 0.0)
            || !(self.l >= 0.0)
            || !(self.alpha > 0.0)
            || !self.k.is_finite()
            || !self.t.is_finite()
            || !self.l.is_finite()
            || !self.alpha.is_finite()
        {
            return Err(Error::invalid(format!(
                "invalid NIOPTD-I parameters {self:?}"
            )));
        }
        Ok(())
    }

    pub fn to_fractional_tf(&self) -> Result<FractionalTf> {
        self.validate()?;
        FractionalTf::from_pairs(
            &[(self.k, 0.0)],
            &[(self.t, self.alpha), (1.0, 0.0)],
            self.l,
        )
    }

    pub fn dc_gain(&self) -> f64 {
        self.k
    }
}

impl NioptdII {
    pub fn soptd(k: f64, zeta: f64, omega_n: f64, l: f64) -> Self {
        Self {
            k,
            zeta,
            omega_n,
            l,
            alpha: 2.0,
            beta: 1.0,
        }
    }

    /// From the expanded denominator `s^α + c1 s^β + c0`.
    pub fn from_expanded(k: f64, alpha: f64, c1: f64, beta: f64, c0: f64, l: f64) -> Result<Self> {
        if !(c0 > 0.0) {
            return Err(Error::invalid("constant denominator term must be > 0"));
        }
        let omega_n = c0.sqrt();
        let p = Self {
            k,
            zeta: c1 / (2.0 * omega_n),
            omega_n,
            l,
            alpha,
            beta,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.k,
            self.zeta,
            self.omega_n,
            self.l,
            self.alpha,
            self.beta,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite
            || !(self.zeta > 0.0)
            || !(self.omega_n > 0.0)
            || !(self.l >= 0.0)
            || !(self.alpha > 0.0)
            || !(self.beta >= 0.0)
        {
            return Err(Error::invalid(format!(
                "invalid NIOPTD-II parameters {self:?}"
            )));
        }
        Ok(())
    }

    pub fn to_fractional_tf(&self) -> Result<FractionalTf> {
        self.validate()?;
        let wn = self.omega_n;
        FractionalTf::from_pairs(
            &[(self.k, 0.0)],
            &[
                (1.0, self.alpha),
                (2.0 * self.zeta * wn, self.beta),
                (wn * wn, 0.0),
            ],
            self.l,
        )
    }

    pub fn dc_gain(&self) -> f64 {
        self.k / (self.omega_n * self.omega_n)
    }
}

/// Reduction template family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Template {
    Foptd,
    Soptd,
    Nioptd1,
    Nioptd2,
}

impl Template {
    pub const ALL: [Template; 4] = [
        Template::Foptd,
        Template::Soptd,
        Template::Nioptd1,
        Template::Nioptd2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Template::Foptd => "foptd",
            Template::Soptd => "soptd",
            Template::Nioptd1 => "nioptd1",
            Template::Nioptd2 => "nioptd2",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Template::Foptd => "FOPTD",
            Template::Soptd => "SOPTD",
            Template::Nioptd1 => "NIOPTD-I",
            Template::Nioptd2 => "NIOPTD-II",
        }
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Template {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "foptd" => Ok(Template::Foptd),
            "soptd" => Ok(Template::Soptd),
            "nioptd1" | "nioptdi" => Ok(Template::Nioptd1),
            "nioptd2" | "nioptdii" => Ok(Template::Nioptd2),
            other => Err(Error::invalid(format!(
                "unknown template '{other}' (expected foptd, soptd, nioptd1 or nioptd2)"
            ))),
        }
    }
}

/// A reduced model from either template family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum ReducedModel {
    Nioptd1(NioptdI),
    Nioptd2(NioptdII),
}

impl ReducedModel {
    pub fn to_fractional_tf(&self) -> Result<FractionalTf> {
        match self {
            ReducedModel::Nioptd1(p) => p.to_fractional_tf(),
            ReducedModel::Nioptd2(p) => p.to_fractional_tf(),
        }
    }

    pub fn dc_gain(&self) -> f64 {
        match self {
            ReducedModel::Nioptd1(p) => p.dc_gain(),
            ReducedModel::Nioptd2(p) => p.dc_gain(),
        }
    }

    pub fn delay(&self) -> f64 {
        match self {
            ReducedModel::Nioptd1(p) => p.l,
            ReducedModel::Nioptd2(p) => p.l,
        }
    }
}

impl From<NioptdI> for ReducedModel {
    fn from(p: NioptdI) -> Self {
        ReducedModel::Nioptd1(p)
    }
}

impl From<NioptdII> for ReducedModel {
    fn from(p: NioptdII) -> Self {
        ReducedModel::Nioptd2(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lti::FrequencyEval;
    use crate::Complex64;

    #[test]
    fn nioptd1_response() {
        let p = NioptdI {
            k: 2.0,
            t: 1.0,
            l: 0.0,
            alpha: 0.5,
        };
        let g = p.to_fractional_tf().unwrap();
        let want = 2.0 / (1.0 + Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4));
        assert!((g.response_at(1.0).unwrap() - want).norm() < 1e-14);
        assert_eq!(g.dc_gain().unwrap(), 2.0);
    }

    #[test]
    fn integer_slices() {
        let g = NioptdI::foptd(3.0, 2.0, 0.0).to_fractional_tf().unwrap();
        assert!(g.is_integer_order());
        let s = NioptdII::soptd(4.0, 0.5, 2.0, 0.1)
            .to_fractional_tf()
            .unwrap();
        let r = s.to_rational().unwrap();
        assert_eq!(r.den().coeffs(), &[4.0, 2.0, 1.0]);
        assert!((s.dc_gain().unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn expanded_form() {
        let p = NioptdII::from_expanded(1522.8947, 2.0971, 8.1944, 1.0036, 7.7684, 0.0).unwrap();
        assert!((p.dc_gain() - 1522.8947 / 7.7684).abs() < 1e-9);
        assert!((2.0 * p.zeta * p.omega_n - 8.1944).abs() < 1e-12);
    }

    #[test]
    fn invalid_parameters() {
        assert!(NioptdI {
            k: 1.0,
            t: -1.0,
            l: 0.0,
            alpha: 1.0
        }
        .to_fractional_tf()
        .is_err());
        assert!(NioptdII::soptd(1.0, 0.0, 1.0, 0.0)
            .to_fractional_tf()
            .is_err());
        assert_eq!("NIOPTD-II".parse::<Template>().unwrap(), Template::Nioptd2);
    }
}
