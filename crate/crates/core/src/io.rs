//! File formats: model JSON, `t,u,y` signal CSV and tuning-spec JSON.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lti::{FractionalTf, RationalTf, Term};
use crate::sysid::DataRecord;
use crate::tuner::TuningSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Rational,
    Fractional,
}

/// `{type, num_terms: [[coeff, exponent], ...], den_terms, delay_s}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    #[serde(rename = "type")]
    pub kind: ModelKind,
    pub num_terms: Vec<(f64, f64)>,
    pub den_terms: Vec<(f64, f64)>,
    pub delay_s: f64,
}

fn pairs(terms: &[Term]) -> Vec<(f64, f64)> {
    terms.iter().map(|t| (t.coeff, t.exponent)).collect()
}

impl ModelFile {
    pub fn from_fractional(sys: &FractionalTf) -> Self {
        Self {
            kind: if sys.is_integer_order() {
                ModelKind::Rational
            } else {
                ModelKind::Fractional
            },
            num_terms: pairs(sys.num_terms()),
            den_terms: pairs(sys.den_terms()),
            delay_s: sys.delay(),
        }
    }

    pub fn from_rational(sys: &RationalTf) -> Self {
        Self::from_fractional(&FractionalTf::from_rational(sys))
    }

    pub fn to_fractional(&self) -> Result<FractionalTf> {
        let sys = FractionalTf::from_pairs(&self.num_terms, &self.den_terms, self.delay_s)?;
        if self.kind == ModelKind::Rational && !sys.is_integer_order() {
            return Err(Error::Parse(
                "model declared rational has non-integer exponents".into(),
            ));
        }
        Ok(sys)
    }

    pub fn to_rational(&self) -> Result<RationalTf> {
        self.to_fractional()?.to_rational().ok_or_else(|| {
            Error::invalid("model has fractional exponents; a rational model is required")
        })
    }
}

/// Parse a model JSON document. Unknown fields (other than metadata under
/// `"meta"`) are rejected.
pub fn parse_model_json(text: &str) -> Result<ModelFile> {
    let mut value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("model JSON: {e}")))?;
    if let Some(obj) = value.as_object_mut() {
        obj.remove("meta");
    }
    serde_json::from_value(value).map_err(|e| Error::Parse(format!("model JSON: {e}")))
}

/// Parse `t,u,y` CSV. Lines starting with `#` are comments. The sampling
/// period is taken from the time column, which must be uniform.
pub fn parse_data_csv(text: &str) -> Result<DataRecord> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = rdr
        .headers()
        .map_err(|e| Error::Parse(format!("CSV header: {e}")))?
        .clone();
    if headers.is_empty() {
        return Err(Error::Parse(
            "line 1: empty file, expected header 't,u,y'".into(),
        ));
    }
    let names: Vec<&str> = headers.iter().collect();
    if names != ["t", "u", "y"] {
        return Err(Error::Parse(format!(
            "line 1: expected header 't,u,y', found '{}'",
            names.join(",")
        )));
    }
    let (mut t, mut u, mut y) = (Vec::new(), Vec::new(), Vec::new());
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            Error::Parse(format!("line {line}: {e}"))
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let field = |i: usize, name: &str| -> Result<f64> {
            rec.get(i)
                .ok_or_else(|| Error::Parse(format!("line {line}: missing column '{name}'")))?
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("line {line}: column '{name}': {e}")))
        };
        t.push(field(0, "t")?);
        u.push(field(1, "u")?);
        y.push(field(2, "y")?);
    }
    if t.len() < 2 {
        return Err(Error::Parse("need at least two samples".into()));
    }
    let ts = (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64;
    if !(ts > 0.0) {
        return Err(Error::Parse("time column must be increasing".into()));
    }
    for (k, pair) in t.windows(2).enumerate() {
        if ((pair[1] - pair[0]) - ts).abs() > 1e-6 * ts.max(1.0) {
            return Err(Error::Parse(format!(
                "line {}: non-uniform sampling (step {} vs {ts})",
                k + 3,
                pair[1] - pair[0]
            )));
        }
    }
    DataRecord::new(ts, u, y).map_err(|e| Error::Parse(e.to_string()))
}

/// `t,u,y` CSV with shortest round-trip number formatting.
pub fn write_data_csv(data: &DataRecord) -> String {
    let mut out = String::from("t,u,y\n");
    for (k, (u, y)) in data.u().iter().zip(data.y()).enumerate() {
        out.push_str(&format!("{:?},{:?},{:?}\n", k as f64 * data.ts(), u, y));
    }
    out
}

/// `{omega_gc, phi_m_deg, A_db, omega_t, B_db, omega_s}`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub omega_gc: f64,
    pub phi_m_deg: f64,
    #[serde(rename = "A_db")]
    pub a_db: f64,
    pub omega_t: f64,
    #[serde(rename = "B_db")]
    pub b_db: f64,
    pub omega_s: f64,
}

impl From<&TuningSpec> for SpecFile {
    fn from(s: &TuningSpec) -> Self {
        Self {
            omega_gc: s.omega_gc,
            phi_m_deg: s.phi_m.to_degrees(),
            a_db: s.a_db,
            omega_t: s.omega_t,
            b_db: s.b_db,
            omega_s: s.omega_s,
        }
    }
}

impl SpecFile {
    pub fn to_spec(&self) -> Result<TuningSpec> {
        let s = TuningSpec {
            omega_gc: self.omega_gc,
            phi_m: self.phi_m_deg.to_radians(),
            a_db: self.a_db,
            omega_t: self.omega_t,
            b_db: self.b_db,
            omega_s: self.omega_s,
        };
        s.validate()?;
        Ok(s)
    }
}

pub fn parse_spec_json(text: &str) -> Result<TuningSpec> {
    let mut value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("spec JSON: {e}")))?;
    if let Some(obj) = value.as_object_mut() {
        obj.remove("meta");
    }
    let f: SpecFile =
        serde_json::from_value(value).map_err(|e| Error::Parse(format!("spec JSON: {e}")))?;
    f.to_spec()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_round_trip() {
        let g = FractionalTf::from_pairs(&[(2.0, 0.0)], &[(1.0, 1.5), (1.0, 0.0)], 0.1).unwrap();
        let f = ModelFile::from_fractional(&g);
        assert_eq!(f.kind, ModelKind::Fractional);
        let text = serde_json::to_string(&f).unwrap();
        assert!(text.contains("\"type\":\"fractional\""));
        let back = parse_model_json(&text).unwrap().to_fractional().unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn rational_model_rejects_fractional_exponents() {
        let text =
            r#"{"type":"rational","num_terms":[[1,0]],"den_terms":[[1,0.5],[1,0]],"delay_s":0}"#;
        assert!(parse_model_json(text).unwrap().to_fractional().is_err());
        assert!(parse_model_json(r#"{"type":"rational","bogus":1}"#).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let d = DataRecord::new(0.1, vec![0.0, 0.1, 0.2], vec![0.0, 1.5, 2.25]).unwrap();
        let text = write_data_csv(&d);
        let back = parse_data_csv(&text).unwrap();
        assert_eq!(back.u(), d.u());
        assert_eq!(back.y(), d.y());
        assert!((back.ts() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn csv_errors_name_the_line() {
        assert!(parse_data_csv("").is_err());
        let err = parse_data_csv("t,u,y\n0,0,0\n0.1,abc,1\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        assert!(parse_data_csv("a,b,c\n1,2,3\n").is_err());
    }

    #[test]
    fn spec_file() {
        let text =
            r#"{"omega_gc":1,"phi_m_deg":90,"A_db":-60,"omega_t":100,"B_db":-40,"omega_s":0.01}"#;
        let s = parse_spec_json(text).unwrap();
        assert!((s.phi_m - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        let bad =
            r#"{"omega_gc":1,"phi_m_deg":90,"A_db":-60,"omega_t":100,"B_db":-40,"omega_s":2}"#;
        assert!(parse_spec_json(bad).is_err());
    }
}
