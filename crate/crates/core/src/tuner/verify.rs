use serde::{Deserialize, Serialize};

use super::params::FopidParams;
use super::spec::{open_loop, phase_slope};
use crate::error::{Error, Result};
use crate::lti::{simulate, ClosedLoop, FractionalTf, RationalizeSettings};

/// Phase deviation that still counts as flat, in degrees.
pub const FLAT_BAND_DEG: f64 = 2.0;
const POINTS_PER_DECADE: f64 = 400.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Flatness {
    /// `d Arg G / dω` at the crossover, rad per rad/s.
    pub slope: f64,
    /// Lower edge of the flat band, `None` if it reaches the scan limit.
    pub band_low: Option<f64>,
    pub band_high: Option<f64>,
    /// `band_high − band_low`, infinite when either edge is open.
    pub width: f64,
}

/// Phase slope at `omega_gc` and the contiguous band around it where the
/// phase stays within 2° of its value at `omega_gc`, scanning
/// `half_decades` decades each way.
pub fn phase_flatness(
    plant: &FractionalTf,
    params: &FopidParams,
    omega_gc: f64,
    half_decades: f64,
) -> Result<Flatness> {
    if !(omega_gc > 0.0) || !(half_decades > 0.0) {
        return Err(Error::invalid("omega_gc and half_decades must be > 0"));
    }
    let c = params.to_fractional_tf()?;
    let g0 = open_loop(plant, &c, omega_gc)?;
    let slope = phase_slope(plant, &c, omega_gc)?;
    let steps = (half_decades * POINTS_PER_DECADE).ceil() as i64;
    let tol = FLAT_BAND_DEG.to_radians();
    let edge = |dir: f64| -> Result<Option<f64>> {
        let mut last = omega_gc;
        for k in 1..=steps {
            let w = omega_gc * 10f64.powf(dir * half_decades * k as f64 / steps as f64);
            let g = open_loop(plant, &c, w)?;
            if (g / g0).arg().abs() >= tol {
                return Ok(Some(last));
            }
            last = w;
        }
        Ok(None)
    };
    let band_low = edge(-1.0)?;
    let band_high = edge(1.0)?;
    let width = match (band_low, band_high) {
        (Some(lo), Some(hi)) => hi - lo,
        _ => f64::INFINITY,
    };
    Ok(Flatness {
        slope,
        band_low,
        band_high,
        width,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationSettings {
    pub t_final: f64,
    pub ts: f64,
    pub rationalize: RationalizeSettings,
}

impl Default for SimulationSettings {
    fn default() -> Self {
        Self {
            t_final: 200.0,
            ts: 0.01,
            rationalize: RationalizeSettings::default(),
        }
    }
}

impl SimulationSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.ts > 0.0) || !(self.t_final > self.ts) {
            return Err(Error::invalid("need 0 < ts < t_final"));
        }
        Ok(())
    }

    pub fn samples(&self) -> usize {
        (self.t_final / self.ts).round() as usize + 1
    }
}

/// Step-response metrics of one gain-scaled loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleMetrics {
    pub scale: f64,
    pub stable: bool,
    /// Set for a zero scale, where the loop is open and the output stays 0.
    pub degenerate: bool,
    pub overshoot_pct: Option<f64>,
    /// Time after which the response stays within 2% of the setpoint.
    pub settling_time: Option<f64>,
    pub steady_state_error_pct: Option<f64>,
    pub note: Option<String>,
    #[serde(skip)]
    pub response: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsoDampingReport {
    pub per_scale: Vec<ScaleMetrics>,
    /// Largest minus smallest overshoot over the stable scales, percentage points.
    pub overshoot_spread: Option<f64>,
}

/// Overshoot, 2% settling time and final error of a unit-setpoint response.
pub fn step_metrics(y: &[f64], ts: f64) -> (f64, Option<f64>, f64) {
    let peak = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let overshoot = ((peak - 1.0) * 100.0).max(0.0);
    let settling = match y.iter().rposition(|v| (v - 1.0).abs() > 0.02) {
        None => Some(0.0),
        Some(i) if i + 1 < y.len() => Some((i + 1) as f64 * ts),
        Some(_) => None,
    };
    let sse = (1.0 - y.last().copied().unwrap_or(0.0)).abs() * 100.0;
    (overshoot, settling, sse)
}

/// Closed-loop unit step responses of the rationalized loop at each gain scale.
pub fn verify_isodamping(
    plant: &FractionalTf,
    params: &FopidParams,
    gain_scales: &[f64],
    settings: &SimulationSettings,
) -> Result<IsoDampingReport> {
    settings.validate()?;
    let base = ClosedLoop::new(plant.clone(), params.to_fractional_tf()?);
    let n = settings.samples();
    let step = vec![1.0; n];
    let mut per_scale = Vec::with_capacity(gain_scales.len());
    for &k in gain_scales {
        if k == 0.0 {
            per_scale.push(ScaleMetrics {
                scale: k,
                stable: true,
                degenerate: true,
                overshoot_pct: None,
                settling_time: None,
                steady_state_error_pct: None,
                note: Some("zero gain: loop is open, output stays at 0".into()),
                response: vec![0.0; n],
            });
            continue;
        }
        let metrics = (|| -> Result<ScaleMetrics> {
            let rl = base
                .with_gain_scale(k)
                .rationalized(&settings.rationalize)?;
            let t = rl.complementary;
            if !t.is_stable() {
                return Ok(ScaleMetrics {
                    scale: k,
                    stable: false,
                    degenerate: false,
                    overshoot_pct: None,
                    settling_time: None,
                    steady_state_error_pct: None,
                    note: Some(format!(
                        "closed loop unstable (max pole real part {:.3e})",
                        t.max_pole_real()?
                    )),
                    response: Vec::new(),
                });
            }
            let y = simulate(&t.without_delay(), &step, settings.ts)?;
            let (ov, st, sse) = step_metrics(&y, settings.ts);
            Ok(ScaleMetrics {
                scale: k,
                stable: true,
                degenerate: false,
                overshoot_pct: Some(ov),
                settling_time: st,
                steady_state_error_pct: Some(sse),
                note: None,
                response: y,
            })
        })();
        per_scale.push(metrics.unwrap_or_else(|e| ScaleMetrics {
            scale: k,
            stable: false,
            degenerate: false,
            overshoot_pct: None,
            settling_time: None,
            steady_state_error_pct: None,
            note: Some(e.to_string()),
            response: Vec::new(),
        }));
    }
    let ovs: Vec<f64> = per_scale.iter().filter_map(|m| m.overshoot_pct).collect();
    let overshoot_spread = if ovs.is_empty() {
        None
    } else {
        let hi = ovs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = ovs.iter().copied().fold(f64::INFINITY, f64::min);
        Some(hi - lo)
    };
    Ok(IsoDampingReport {
        per_scale,
        overshoot_spread,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrator_is_flat_everywhere() {
        let plant = FractionalTf::from_pairs(&[(1.0, 0.0)], &[(1.0, 1.0)], 0.0).unwrap();
        let f = phase_flatness(&plant, &FopidParams::pid(1.0, 0.0, 0.0), 1.0, 2.0).unwrap();
        assert!(f.slope.abs() < 1e-9);
        assert!(f.width.is_infinite());
    }

    #[test]
    fn metrics_of_known_response() {
        let y = [0.0, 0.5, 1.1, 1.03, 0.99, 1.0];
        let (ov, st, sse) = step_metrics(&y, 1.0);
        assert!((ov - 10.0).abs() < 1e-9);
        assert_eq!(st, Some(4.0));
        assert!(sse.abs() < 1e-12);
    }

    #[test]
    fn first_order_loop_has_no_overshoot() {
        // Ki/s on 1/(s+1) with small Ki is overdamped
        let plant =
            FractionalTf::from_pairs(&[(1.0, 0.0)], &[(1.0, 1.0), (1.0, 0.0)], 0.0).unwrap();
        let settings = SimulationSettings {
            t_final: 60.0,
            ts: 0.01,
            ..Default::default()
        };
        let rep = verify_isodamping(
            &plant,
            &FopidParams::pid(0.0, 0.2, 0.0),
            &[0.0, 1.0],
            &settings,
        )
        .unwrap();
        assert!(rep.per_scale[0].degenerate);
        let m = &rep.per_scale[1];
        assert!(m.stable);
        assert!(m.overshoot_pct.unwrap() < 1e-9);
        assert!(m.steady_state_error_pct.unwrap() < 0.1);
    }
}
