//! Browser bindings: loop Bode explorer, gain-scaled step responses and an
//! Oustaloup approximation explorer.
//!
//! Each exported function takes plain numbers and strings and returns a JSON
//! document, so the page needs no generated TypeScript types. The same
//! functions are callable natively, which is how they are tested.

use fractune::fixtures::{controllers, plant, plants};
use fractune::lti::{freq_response, jw_pow, logspace, oustaloup, FractionalTf, FrequencyEval};
use fractune::tuner::{
    loop_margins, phase_flatness, verify_isodamping, FopidParams, SimulationSettings, TuningSpec,
};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Points per decade on every frequency grid the page draws.
const GRID_DENSITY: f64 = 40.0;
/// The crossover anchor the reference controllers were tuned for.
const OMEGA_GC: f64 = 1.0;

#[derive(Debug, thiserror::Error)]
pub enum WebError {
    #[error(transparent)]
    Core(#[from] fractune::Error),
    #[error("{0}")]
    Input(String),
}

type WebResult<T> = Result<T, WebError>;

#[derive(Serialize)]
struct Curve {
    label: String,
    mag_db: Vec<Option<f64>>,
    phase_deg: Vec<Option<f64>>,
}

impl Curve {
    fn of<S: FrequencyEval + ?Sized>(label: &str, sys: &S, omegas: &[f64]) -> WebResult<Self> {
        let r = freq_response(sys, omegas)?;
        Ok(Self {
            label: label.into(),
            mag_db: r.magnitude_db(),
            phase_deg: r.phase_deg_unwrapped(),
        })
    }
}

fn grid(lo_exp: f64, hi_exp: f64) -> WebResult<Vec<f64>> {
    if !(lo_exp.is_finite() && hi_exp.is_finite() && hi_exp > lo_exp) || hi_exp - lo_exp > 12.0 {
        return Err(WebError::Input(format!(
            "frequency range 1e{lo_exp}..1e{hi_exp} must be increasing and span at most 12 decades"
        )));
    }
    let n = ((hi_exp - lo_exp) * GRID_DENSITY).ceil() as usize + 1;
    Ok(logspace(lo_exp, hi_exp, n))
}

fn plant_model(id: &str) -> WebResult<FractionalTf> {
    Ok(plant(id)?.nioptd2().to_fractional_tf()?)
}

fn controller(kind: &str) -> WebResult<FopidParams> {
    let c = controllers();
    match kind {
        "fopid" => Ok(c.fopid),
        "pid" => Ok(c.pid),
        other => Err(WebError::Input(format!(
            "unknown controller '{other}' (fopid or pid)"
        ))),
    }
}

fn to_json<T: Serialize>(v: &T) -> WebResult<String> {
    serde_json::to_string(v).map_err(|e| WebError::Input(e.to_string()))
}

#[derive(Serialize)]
struct Catalog {
    plants: Vec<String>,
    controllers: Vec<(&'static str, FopidParams)>,
}

/// Plant identifiers and the two reference controllers.
pub fn catalog_json() -> WebResult<String> {
    let c = controllers();
    to_json(&Catalog {
        plants: plants().iter().map(|p| p.id.clone()).collect(),
        controllers: vec![("fopid", c.fopid), ("pid", c.pid)],
    })
}

#[derive(Serialize)]
struct LoopView {
    omega: Vec<f64>,
    curves: Vec<Curve>,
    phase_margin_deg: f64,
    crossover_magnitude: f64,
    phase_slope: f64,
    flat_band: (Option<f64>, Option<f64>),
}

/// Plant and open-loop Bode curves for a user-edited PI^λD^μ controller,
/// with margins and phase flatness at the crossover anchor.
#[allow(clippy::too_many_arguments)]
pub fn loop_bode_json(
    plant_id: &str,
    kp: f64,
    ki: f64,
    kd: f64,
    lambda: f64,
    mu: f64,
    lo_exp: f64,
    hi_exp: f64,
) -> WebResult<String> {
    let params = FopidParams {
        kp,
        ki,
        kd,
        lambda,
        mu,
    };
    params.validate()?;
    let g = plant_model(plant_id)?;
    let omega = grid(lo_exp, hi_exp)?;
    let open = g.series(&params.to_fractional_tf()?);
    let anchors = TuningSpec {
        omega_gc: OMEGA_GC,
        phi_m: 0.0,
        a_db: 0.0,
        omega_t: 100.0,
        b_db: 0.0,
        omega_s: 0.01,
    };
    let (m, slope) = loop_margins(&g, &params, &anchors)?;
    let flat = phase_flatness(&g, &params, OMEGA_GC, 1.0)?;
    to_json(&LoopView {
        curves: vec![
            Curve::of("plant", &g, &omega)?,
            Curve::of("open loop", &open, &omega)?,
        ],
        omega,
        phase_margin_deg: m.phase_margin_deg,
        crossover_magnitude: m.crossover_magnitude,
        phase_slope: slope,
        flat_band: (flat.band_low, flat.band_high),
    })
}

#[derive(Serialize)]
struct StepView {
    t: Vec<f64>,
    y: Vec<f64>,
    stable: bool,
    overshoot_pct: Option<f64>,
    settling_time: Option<f64>,
    steady_state_error_pct: Option<f64>,
    note: Option<String>,
}

/// Unit-setpoint closed-loop response with the loop gain multiplied by
/// `gain_scale`. The trace is thinned to at most `max_points` samples.
pub fn step_response_json(
    plant_id: &str,
    controller_kind: &str,
    gain_scale: f64,
    t_final: f64,
    max_points: usize,
) -> WebResult<String> {
    if !(gain_scale.is_finite() && gain_scale >= 0.0) {
        return Err(WebError::Input(format!(
            "gain scale must be finite and >= 0, got {gain_scale}"
        )));
    }
    if max_points < 2 {
        return Err(WebError::Input("max_points must be at least 2".into()));
    }
    let g = plant_model(plant_id)?;
    let c = controller(controller_kind)?;
    let settings = SimulationSettings {
        t_final,
        ts: 0.02,
        ..Default::default()
    };
    let report = verify_isodamping(&g, &c, &[gain_scale], &settings)?;
    let m = report
        .per_scale
        .into_iter()
        .next()
        .expect("one scale requested");
    let stride = m.response.len().div_ceil(max_points).max(1);
    let (t, y) = m
        .response
        .iter()
        .enumerate()
        .step_by(stride)
        .map(|(k, v)| {
            (
                k as f64 * settings.ts,
                if v.is_finite() { *v } else { f64::NAN },
            )
        })
        .unzip();
    to_json(&StepView {
        t,
        y,
        stable: m.stable,
        overshoot_pct: m.overshoot_pct,
        settling_time: m.settling_time,
        steady_state_error_pct: m.steady_state_error_pct,
        note: m.note,
    })
}

#[derive(Serialize)]
struct OustaloupView {
    omega: Vec<f64>,
    exact: Curve,
    approx: Curve,
    center_phase_error_deg: f64,
    center_mag_error_db: f64,
    /// Worst errors one decade in from each band edge; the edges themselves
    /// always miss by about `45·alpha` degrees.
    inner_phase_error_deg: Option<f64>,
    inner_mag_error_db: Option<f64>,
}

struct Power(f64);

impl FrequencyEval for Power {
    fn response_at(&self, omega: f64) -> Option<fractune::Complex64> {
        Some(jw_pow(omega, self.0))
    }
}

/// Exact `s^alpha` against its Oustaloup fit on `[1e{lo_exp}, 1e{hi_exp}]`,
/// drawn one decade beyond the band on each side.
pub fn oustaloup_json(alpha: f64, order: usize, lo_exp: f64, hi_exp: f64) -> WebResult<String> {
    let approx = oustaloup(alpha, order, (10f64.powf(lo_exp), 10f64.powf(hi_exp)))?;
    let omega = grid(lo_exp - 1.0, hi_exp + 1.0)?;
    let exact = Curve::of("exact", &Power(alpha), &omega)?;
    let fit = Curve::of("oustaloup", &approx, &omega)?;
    let errors = |w: f64| -> WebResult<(f64, f64)> {
        let (a, b) = (jw_pow(w, alpha), approx.response_at(w));
        let b = b.ok_or_else(|| WebError::Input(format!("approximation undefined at w={w}")))?;
        Ok((
            (b / a).arg().to_degrees().abs(),
            20.0 * (b.norm() / a.norm()).log10().abs(),
        ))
    };
    let (center_phase_error_deg, center_mag_error_db) =
        errors(10f64.powf(0.5 * (lo_exp + hi_exp)))?;
    let mut inner: Option<(f64, f64)> = None;
    for w in omega
        .iter()
        .filter(|w| (lo_exp + 1.0..=hi_exp - 1.0).contains(&w.log10()))
    {
        let (p, m) = errors(*w)?;
        let (ip, im) = inner.unwrap_or((0.0, 0.0));
        inner = Some((ip.max(p), im.max(m)));
    }
    to_json(&OustaloupView {
        omega,
        exact,
        approx: fit,
        center_phase_error_deg,
        center_mag_error_db,
        inner_phase_error_deg: inner.map(|e| e.0),
        inner_mag_error_db: inner.map(|e| e.1),
    })
}

fn js<T>(r: WebResult<T>) -> Result<T, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn catalog() -> Result<String, JsError> {
    js(catalog_json())
}

#[allow(clippy::too_many_arguments)]
#[wasm_bindgen]
pub fn loop_bode(
    plant_id: &str,
    kp: f64,
    ki: f64,
    kd: f64,
    lambda: f64,
    mu: f64,
    lo_exp: f64,
    hi_exp: f64,
) -> Result<String, JsError> {
    js(loop_bode_json(
        plant_id, kp, ki, kd, lambda, mu, lo_exp, hi_exp,
    ))
}

#[wasm_bindgen]
pub fn step_response(
    plant_id: &str,
    controller_kind: &str,
    gain_scale: f64,
    t_final: f64,
    max_points: usize,
) -> Result<String, JsError> {
    js(step_response_json(
        plant_id,
        controller_kind,
        gain_scale,
        t_final,
        max_points,
    ))
}

#[wasm_bindgen]
pub fn oustaloup_fit(
    alpha: f64,
    order: usize,
    lo_exp: f64,
    hi_exp: f64,
) -> Result<String, JsError> {
    js(oustaloup_json(alpha, order, lo_exp, hi_exp))
}
