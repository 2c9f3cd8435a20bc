use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::data::{lfilter, DataRecord};
use crate::error::{Error, Result};
use crate::lti::{tustin_d2c, Polynomial, RationalTf};

/// Estimator structures of the general model `A y = (B/F) u + (C/D) e`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Structure {
    Arx,
    Armax,
    Bj,
    Oe,
}

impl Structure {
    pub const ALL: [Structure; 4] = [
        Structure::Arx,
        Structure::Armax,
        Structure::Bj,
        Structure::Oe,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Structure::Arx => "arx",
            Structure::Armax => "armax",
            Structure::Bj => "bj",
            Structure::Oe => "oe",
        }
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name().to_uppercase())
    }
}

impl FromStr for Structure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "arx" => Ok(Structure::Arx),
            "armax" => Ok(Structure::Armax),
            "bj" | "box-jenkins" => Ok(Structure::Bj),
            "oe" | "output-error" => Ok(Structure::Oe),
            other => Err(Error::invalid(format!(
                "unknown structure '{other}' (expected arx, armax, bj or oe)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Orders {
    pub na: usize,
    pub nb: usize,
    pub nc: usize,
    pub nd: usize,
    pub nf: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSpec {
    pub structure: Structure,
    pub orders: Orders,
    /// Input delay in samples.
    pub nk: usize,
}

impl EstimatorSpec {
    pub fn arx(na: usize, nb: usize, nk: usize) -> Self {
        Self::new(
            Structure::Arx,
            Orders {
                na,
                nb,
                ..Default::default()
            },
            nk,
        )
    }

    pub fn armax(na: usize, nb: usize, nc: usize, nk: usize) -> Self {
        Self::new(
            Structure::Armax,
            Orders {
                na,
                nb,
                nc,
                ..Default::default()
            },
            nk,
        )
    }

    pub fn bj(nb: usize, nc: usize, nd: usize, nf: usize, nk: usize) -> Self {
        Self::new(
            Structure::Bj,
            Orders {
                nb,
                nc,
                nd,
                nf,
                na: 0,
            },
            nk,
        )
    }

    pub fn oe(nb: usize, nf: usize, nk: usize) -> Self {
        Self::new(
            Structure::Oe,
            Orders {
                nb,
                nf,
                ..Default::default()
            },
            nk,
        )
    }

    pub fn new(structure: Structure, orders: Orders, nk: usize) -> Self {
        Self {
            structure,
            orders,
            nk,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let o = self.orders;
        let unused: &[(&str, usize)] = match self.structure {
            Structure::Arx => &[("nc", o.nc), ("nd", o.nd), ("nf", o.nf)],
            Structure::Armax => &[("nd", o.nd), ("nf", o.nf)],
            Structure::Bj => &[("na", o.na)],
            Structure::Oe => &[("na", o.na), ("nc", o.nc), ("nd", o.nd)],
        };
        if let Some((name, _)) = unused.iter().find(|(_, v)| *v != 0) {
            return Err(Error::invalid(format!(
                "{name} must be 0 for the {} structure",
                self.structure
            )));
        }
        if o.nb == 0 {
            return Err(Error::invalid("nb must be >= 1"));
        }
        Ok(())
    }

    /// Number of estimated coefficients.
    pub fn param_count(&self) -> usize {
        let o = self.orders;
        o.na + o.nb + o.nc + o.nd + o.nf
    }

    /// First sample whose prediction uses only measured past data.
    pub fn first_sample(&self) -> usize {
        let o = self.orders;
        [o.na, self.nk + o.nb - 1, o.nc, o.nd, o.nf]
            .into_iter()
            .max()
            .unwrap_or(0)
    }
}

impl fmt::Display for EstimatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let o = self.orders;
        match self.structure {
            Structure::Arx => write!(f, "ARX(na={}, nb={}, nk={})", o.na, o.nb, self.nk),
            Structure::Armax => write!(
                f,
                "ARMAX(na={}, nb={}, nc={}, nk={})",
                o.na, o.nb, o.nc, self.nk
            ),
            Structure::Bj => write!(
                f,
                "BJ(nb={}, nc={}, nd={}, nf={}, nk={})",
                o.nb, o.nc, o.nd, o.nf, self.nk
            ),
            Structure::Oe => write!(f, "OE(nb={}, nf={}, nk={})", o.nb, o.nf, self.nk),
        }
    }
}

/// Coefficients in powers of `q⁻¹`. `a`, `c`, `d`, `f` are monic (leading 1 at
/// `q⁰`); `b` holds its `nb` coefficients starting at `q^{-nk}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelCoefficients {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
    pub f: Vec<f64>,
}

impl ModelCoefficients {
    /// Unpack a parameter vector ordered `[a.., b.., c.., d.., f..]`.
    pub fn from_theta(spec: &EstimatorSpec, theta: &[f64]) -> Self {
        let o = spec.orders;
        let mut rest = theta;
        let mut take = |n: usize| {
            let (head, tail) = rest.split_at(n);
            rest = tail;
            head.to_vec()
        };
        let monic = |v: Vec<f64>| [vec![1.0], v].concat();
        let a = monic(take(o.na));
        let b = [vec![0.0; spec.nk], take(o.nb)].concat();
        let c = monic(take(o.nc));
        let d = monic(take(o.nd));
        let f = monic(take(o.nf));
        Self { a, b, c, d, f }
    }

    pub fn to_theta(&self, spec: &EstimatorSpec) -> Vec<f64> {
        let mut t = Vec::with_capacity(spec.param_count());
        t.extend(&self.a[1..]);
        t.extend(&self.b[spec.nk..]);
        t.extend(&self.c[1..]);
        t.extend(&self.d[1..]);
        t.extend(&self.f[1..]);
        t
    }

    /// One-step-ahead prediction errors `e = (D/C)(A y − (B/F) u)`.
    pub fn prediction_errors(&self, data: &DataRecord) -> Vec<f64> {
        let w = lfilter(&self.b, &self.f, data.u());
        let ay = lfilter(&self.a, &[1.0], data.y());
        let v: Vec<f64> = ay.iter().zip(&w).map(|(p, q)| p - q).collect();
        if self.c.len() == 1 && self.d.len() == 1 {
            v
        } else {
            lfilter(&self.d, &self.c, &v)
        }
    }
}

/// A fitted discrete-time model with its residual statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentifiedModel {
    pub spec: EstimatorSpec,
    pub ts: f64,
    pub coeffs: ModelCoefficients,
    /// Mean squared prediction error.
    #[serde(rename = "V")]
    pub loss: f64,
    /// `None` when the fit is perfect (zero loss).
    pub aic: Option<f64>,
    pub converged: bool,
    pub iterations: usize,
    #[serde(skip)]
    pub residuals: Vec<f64>,
    /// Loss after each accepted iteration.
    #[serde(skip)]
    pub loss_trace: Vec<f64>,
}

impl IdentifiedModel {
    pub(crate) fn from_coefficients(
        spec: EstimatorSpec,
        data: &DataRecord,
        coeffs: ModelCoefficients,
        converged: bool,
        iterations: usize,
        loss_trace: Vec<f64>,
    ) -> Self {
        let residuals: Vec<f64> = coeffs.prediction_errors(data)[spec.first_sample()..].to_vec();
        let loss = residuals.iter().map(|e| e * e).sum::<f64>() / residuals.len() as f64;
        let aic = aic(loss, spec.param_count(), data.len()).ok();
        Self {
            spec,
            ts: data.ts(),
            coeffs,
            loss,
            aic,
            converged,
            iterations,
            residuals,
            loss_trace,
        }
    }

    /// `G = B / (A F)` in powers of `q⁻¹`.
    pub fn system_num(&self) -> Polynomial {
        Polynomial::new(self.coeffs.b.clone())
    }

    pub fn system_den(&self) -> Polynomial {
        &Polynomial::new(self.coeffs.a.clone()) * &Polynomial::new(self.coeffs.f.clone())
    }

    /// `H = C / (A D)`
    pub fn noise_num(&self) -> Polynomial {
        Polynomial::new(self.coeffs.c.clone())
    }

    pub fn noise_den(&self) -> Polynomial {
        &Polynomial::new(self.coeffs.a.clone()) * &Polynomial::new(self.coeffs.d.clone())
    }

    /// Continuous-time equivalent of the system part by the bilinear map.
    pub fn to_continuous(&self) -> Result<RationalTf> {
        tustin_d2c(&self.system_num(), &self.system_den(), self.ts)
    }
}

/// Akaike's criterion `ln V + 2d/N`.
pub fn aic(loss: f64, params: usize, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("AIC needs at least one sample"));
    }
    if !(loss >= 0.0) || !loss.is_finite() {
        return Err(Error::invalid(format!(
            "loss must be finite and >= 0, got {loss}"
        )));
    }
    if loss == 0.0 {
        return Err(Error::DegenerateFit(
            "zero loss (perfect fit); AIC is -inf".into(),
        ));
    }
    Ok(loss.ln() + 2.0 * params as f64 / n as f64)
}

pub(crate) fn check_data(data: &DataRecord, spec: &EstimatorSpec) -> Result<()> {
    spec.validate()?;
    let n0 = spec.first_sample();
    let rows = data.len().saturating_sub(n0);
    if rows < spec.param_count().max(1) {
        return Err(Error::invalid(format!(
            "{} samples are too few for {spec} ({} parameters, first usable sample {n0})",
            data.len(),
            spec.param_count()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aic_formula() {
        assert_eq!(aic(1.0, 0, 10).unwrap(), 0.0);
        let v = aic((-5.0f64).exp(), 4, 140).unwrap();
        assert!((v - (-5.0 + 8.0 / 140.0)).abs() < 1e-12);
        assert!(aic(0.5, 3, 100).unwrap() > aic(0.5, 2, 100).unwrap());
        assert!(matches!(aic(0.0, 1, 10), Err(Error::DegenerateFit(_))));
    }

    #[test]
    fn spec_validation() {
        assert!(EstimatorSpec::arx(2, 2, 1).validate().is_ok());
        let mut bad = EstimatorSpec::arx(2, 2, 1);
        bad.orders.nc = 1;
        assert!(bad.validate().is_err());
        assert!(EstimatorSpec::oe(0, 1, 1).validate().is_err());
        assert!(EstimatorSpec::bj(2, 1, 1, 2, 0).validate().is_ok());
    }

    #[test]
    fn theta_round_trip() {
        let spec = EstimatorSpec::bj(2, 1, 1, 2, 1);
        let theta = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6];
        let c = ModelCoefficients::from_theta(&spec, &theta);
        assert_eq!(c.a, vec![1.0]);
        assert_eq!(c.b, vec![0.0, 0.1, 0.2]);
        assert_eq!(c.c, vec![1.0, 0.3]);
        assert_eq!(c.d, vec![1.0, 0.4]);
        assert_eq!(c.f, vec![1.0, 0.5, 0.6]);
        assert_eq!(c.to_theta(&spec), theta.to_vec());
    }

    #[test]
    fn structure_parsing() {
        assert_eq!("BJ".parse::<Structure>().unwrap(), Structure::Bj);
        assert!("nope".parse::<Structure>().is_err());
    }
}
