use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::templates::{NioptdI, NioptdII, ReducedModel, Template};
use crate::error::{Error, Result};
use crate::lti::{
    h2_from_samples, h2_grid, rationalize, FractionalTf, FrequencyEval, RationalTf,
    RationalizeSettings, STABILITY_MARGIN,
};
use crate::numerics::{nelder_mead, NelderMeadOptions};
use crate::Complex64;

/// Returned for candidates that cannot be built or evaluated at all.
pub const INVALID_CANDIDATE: f64 = 1e12;
/// Scale of the instability penalty `PENALTY * (1 + max pole real part)`.
pub const PENALTY: f64 = 1e6;

const L0: f64 = 0.05;

fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else {
        x.exp().ln_1p()
    }
}

fn softplus_inv(y: f64) -> f64 {
    if y > 30.0 {
        y
    } else {
        y.exp_m1().ln()
    }
}

/// The source side of the H2 objective, sampled once on the quadrature grid.
#[derive(Debug, Clone)]
pub struct ReductionProblem {
    source: RationalTf,
    dc_gain: f64,
    samples: Vec<Complex64>,
    settings: RationalizeSettings,
}

impl ReductionProblem {
    pub fn new(source: &RationalTf, settings: RationalizeSettings) -> Result<Self> {
        if !source.is_proper() {
            return Err(Error::Improper {
                num: source.num().degree(),
                den: source.den().degree(),
            });
        }
        if !source.is_stable() {
            return Err(Error::Unstable {
                max_real: source.max_pole_real()?,
            });
        }
        let dc_gain = source.dc_gain()?;
        if dc_gain == 0.0 {
            return Err(Error::invalid(
                "source has zero dc gain; J cannot be normalized",
            ));
        }
        let rational = rationalize(&FractionalTf::from_rational(source), &settings)?;
        let d = rational.feedthrough();
        let samples = h2_grid()
            .iter()
            .map(|&w| {
                rational
                    .response_at(w)
                    .unwrap_or(Complex64::new(f64::NAN, 0.0))
                    - d
            })
            .collect();
        Ok(Self {
            source: source.clone(),
            dc_gain,
            samples,
            settings,
        })
    }

    pub fn source(&self) -> &RationalTf {
        &self.source
    }

    pub fn dc_gain(&self) -> f64 {
        self.dc_gain
    }

    /// H2 distance between the strictly proper parts of the rationalized
    /// source and candidate, plus the instability penalty.
    pub fn objective(&self, candidate: &ReducedModel) -> f64 {
        let Ok(frac) = candidate.to_fractional_tf() else {
            return INVALID_CANDIDATE;
        };
        let Ok(rat) = rationalize(&frac, &self.settings) else {
            return INVALID_CANDIDATE;
        };
        let Ok(max_real) = rat.max_pole_real() else {
            return INVALID_CANDIDATE;
        };
        if !max_real.is_finite() {
            return INVALID_CANDIDATE;
        }
        let d = rat.feedthrough();
        let diff: Vec<Complex64> = h2_grid()
            .iter()
            .zip(&self.samples)
            .map(|(&w, p)| match rat.response_at(w) {
                Some(v) => p - (v - d),
                None => Complex64::new(f64::INFINITY, 0.0),
            })
            .collect();
        let j = h2_from_samples(&diff);
        if max_real >= STABILITY_MARGIN {
            let penalty = PENALTY * (1.0 + max_real.max(0.0));
            return if j.is_finite() {
                j + penalty
            } else {
                INVALID_CANDIDATE
            };
        }
        if j.is_finite() {
            j
        } else {
            INVALID_CANDIDATE
        }
    }
}

/// `J` of a candidate against a source with the default rationalization.
pub fn reduction_objective(source: &RationalTf, candidate: &ReducedModel) -> Result<f64> {
    Ok(ReductionProblem::new(source, RationalizeSettings::default())?.objective(candidate))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReductionSettings {
    pub n_starts: usize,
    pub seed: u64,
    pub max_evals: usize,
    pub xtol: f64,
    pub ftol: f64,
    pub rationalize: RationalizeSettings,
}

impl Default for ReductionSettings {
    fn default() -> Self {
        Self {
            n_starts: 8,
            seed: 0,
            max_evals: 2000,
            xtol: 1e-6,
            ftol: 1e-10,
            rationalize: RationalizeSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionResult {
    pub template: Template,
    pub params: ReducedModel,
    #[serde(rename = "J")]
    pub j: f64,
    #[serde(rename = "J_normalized")]
    pub j_normalized: f64,
    pub starts_tried: usize,
    pub feasible: bool,
    /// Whether the best start met the simplex tolerances within budget.
    pub converged: bool,
    pub evals: usize,
    pub diagnostics: Vec<String>,
}

impl ReductionResult {
    /// Delays this small are numerically indistinguishable from none.
    pub fn delay_effectively_zero(&self) -> bool {
        self.params.delay() < 1e-6
    }
}

/// Map between unconstrained search vectors and template parameters.
fn decode(template: Template, x: &[f64]) -> ReducedModel {
    match template {
        Template::Foptd => NioptdI::foptd(x[0], x[1].exp(), softplus(x[2])).into(),
        Template::Nioptd1 => NioptdI {
            k: x[0],
            t: x[1].exp(),
            l: softplus(x[2]),
            alpha: x[3],
        }
        .into(),
        Template::Soptd => NioptdII::soptd(x[0], x[1].exp(), x[2].exp(), softplus(x[3])).into(),
        Template::Nioptd2 => NioptdII {
            k: x[0],
            zeta: x[1].exp(),
            omega_n: x[2].exp(),
            l: softplus(x[3]),
            alpha: x[4],
            beta: x[5],
        }
        .into(),
    }
}

fn encode(template: Template, m: &ReducedModel) -> Result<Vec<f64>> {
    let l = |v: f64| softplus_inv(v.max(1e-300));
    match (template, m) {
        (Template::Foptd, ReducedModel::Nioptd1(p)) => Ok(vec![p.k, p.t.ln(), l(p.l)]),
        (Template::Nioptd1, ReducedModel::Nioptd1(p)) => Ok(vec![p.k, p.t.ln(), l(p.l), p.alpha]),
        (Template::Soptd, ReducedModel::Nioptd2(p)) => {
            Ok(vec![p.k, p.zeta.ln(), p.omega_n.ln(), l(p.l)])
        }
        (Template::Nioptd2, ReducedModel::Nioptd2(p)) => Ok(vec![
            p.k,
            p.zeta.ln(),
            p.omega_n.ln(),
            l(p.l),
            p.alpha,
            p.beta,
        ]),
        _ => Err(Error::invalid(format!(
            "start point does not belong to the {template} family"
        ))),
    }
}

/// Default first start built from the source's dc gain and slowest pole.
fn default_start(template: Template, source: &RationalTf, dc: f64) -> Result<ReducedModel> {
    let poles = source.poles()?;
    let slow = poles
        .iter()
        .min_by(|a, b| a.norm().total_cmp(&b.norm()))
        .copied()
        .unwrap_or(Complex64::new(-1.0, 0.0));
    let rate = slow.norm().max(1e-6);
    Ok(match template {
        Template::Foptd | Template::Nioptd1 => NioptdI {
            k: dc,
            t: 1.0 / rate,
            l: L0,
            alpha: 1.0,
        }
        .into(),
        Template::Soptd | Template::Nioptd2 => {
            let zeta = if slow.im.abs() > 0.0 {
                (-slow.re / rate).max(0.1)
            } else {
                1.0
            };
            NioptdII {
                k: dc * rate * rate,
                zeta,
                omega_n: rate,
                l: L0,
                alpha: 2.0,
                beta: 1.0,
            }
            .into()
        }
    })
}

/// Scale every positive parameter by an independent log-uniform factor in [0.5, 2].
fn perturb(m: &ReducedModel, rng: &mut ChaCha8Rng) -> ReducedModel {
    let ln2 = std::f64::consts::LN_2;
    let mut f = || rng.random_range(-ln2..ln2).exp();
    match *m {
        ReducedModel::Nioptd1(p) => NioptdI {
            k: p.k * f(),
            t: p.t * f(),
            l: p.l * f(),
            alpha: p.alpha * f(),
        }
        .into(),
        ReducedModel::Nioptd2(p) => {
            let (fk, fz, fw, fl, fa, fb) = (f(), f(), f(), f(), f(), f());
            NioptdII {
                // keep the dc gain matched when ω_n moves
                k: p.k * fk * fw * fw,
                zeta: p.zeta * fz,
                omega_n: p.omega_n * fw,
                l: p.l * fl,
                alpha: p.alpha * fa,
                beta: p.beta * fb,
            }
            .into()
        }
    }
}

fn force_slice(template: Template, m: ReducedModel) -> ReducedModel {
    match (template, m) {
        (Template::Foptd, ReducedModel::Nioptd1(p)) => NioptdI { alpha: 1.0, ..p }.into(),
        (Template::Soptd, ReducedModel::Nioptd2(p)) => NioptdII {
            alpha: 2.0,
            beta: 1.0,
            ..p
        }
        .into(),
        _ => m,
    }
}

/// Best-of-n-starts Nelder-Mead reduction. Extra `warm_starts` (for instance
/// the optimum of the nested integer-order template) are tried first.
pub fn reduce_from(
    problem: &ReductionProblem,
    template: Template,
    settings: &ReductionSettings,
    warm_starts: &[ReducedModel],
) -> Result<ReductionResult> {
    if settings.n_starts == 0 {
        return Err(Error::invalid("n_starts must be >= 1"));
    }
    let dc = problem.dc_gain();
    let base = default_start(template, problem.source(), dc)?;
    let mut rng = ChaCha8Rng::seed_from_u64(
        settings.seed ^ (template as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15),
    );
    let mut starts: Vec<ReducedModel> = warm_starts
        .iter()
        .map(|w| force_slice(template, upcast(template, w)))
        .collect();
    starts.push(base);
    for _ in 1..settings.n_starts {
        starts.push(force_slice(template, perturb(&base, &mut rng)));
    }
    let opts = NelderMeadOptions {
        xtol: settings.xtol,
        ftol: settings.ftol,
        max_evals: settings.max_evals,
        ..Default::default()
    };
    let mut best: Option<(f64, Vec<f64>, bool)> = None;
    let mut evals = 0;
    let mut diagnostics = Vec::new();
    for (i, start) in starts.iter().enumerate() {
        let x0 = encode(template, start)?;
        let f = |x: &[f64]| problem.objective(&decode(template, x));
        match nelder_mead(f, &x0, &opts) {
            Ok(r) => {
                evals += r.evals;
                if best.as_ref().is_none_or(|b| r.f < b.0) {
                    best = Some((r.f, r.x, r.converged));
                }
            }
            Err(e) => diagnostics.push(format!("start {i}: {e}")),
        }
    }
    let Some((j, x, converged)) = best else {
        return Err(Error::Numerical(format!(
            "every start failed: {}",
            diagnostics.join("; ")
        )));
    };
    let feasible = j < PENALTY;
    if !feasible {
        diagnostics
            .push("no start reached a stable candidate; returned point carries the penalty".into());
    }
    Ok(ReductionResult {
        template,
        params: decode(template, &x),
        j,
        j_normalized: j / dc.abs(),
        starts_tried: starts.len(),
        feasible,
        converged,
        evals,
        diagnostics,
    })
}

/// Lift an integer-order optimum into its fractional family.
fn upcast(template: Template, m: &ReducedModel) -> ReducedModel {
    match (template, m) {
        (Template::Nioptd1 | Template::Foptd, ReducedModel::Nioptd1(_)) => *m,
        (Template::Nioptd2 | Template::Soptd, ReducedModel::Nioptd2(_)) => *m,
        // a first-order optimum K/(Ts+1) seeds the second-order family as
        // (K/T)/(s² + (1/T + ω) s + ω/T) with a fast extra pole
        (_, ReducedModel::Nioptd1(p)) => {
            let fast = 10.0 / p.t;
            let wn = (fast / p.t).sqrt();
            NioptdII {
                k: p.k * wn * wn,
                zeta: (1.0 / p.t + fast) / (2.0 * wn),
                omega_n: wn,
                l: p.l,
                alpha: 2.0,
                beta: 1.0,
            }
            .into()
        }
        (_, ReducedModel::Nioptd2(p)) => NioptdI {
            k: p.dc_gain(),
            t: 2.0 * p.zeta / p.omega_n,
            l: p.l,
            alpha: 1.0,
        }
        .into(),
    }
}

pub fn reduce(
    source: &RationalTf,
    template: Template,
    settings: &ReductionSettings,
) -> Result<ReductionResult> {
    let problem = ReductionProblem::new(source, settings.rationalize)?;
    reduce_from(&problem, template, settings, &[])
}

/// All four templates; each fractional family is warm-started from its
/// integer-order slice so the nested optimum can only improve.
pub fn reduce_all_templates(
    source: &RationalTf,
    settings: &ReductionSettings,
) -> Result<Vec<(Template, Result<ReductionResult>)>> {
    let problem = ReductionProblem::new(source, settings.rationalize)?;
    let foptd = reduce_from(&problem, Template::Foptd, settings, &[]);
    let soptd = reduce_from(&problem, Template::Soptd, settings, &[]);
    let warm = |r: &Result<ReductionResult>| r.as_ref().map(|r| vec![r.params]).unwrap_or_default();
    let nioptd1 = reduce_from(&problem, Template::Nioptd1, settings, &warm(&foptd));
    let nioptd2 = reduce_from(&problem, Template::Nioptd2, settings, &warm(&soptd));
    Ok(vec![
        (Template::Foptd, foptd),
        (Template::Soptd, soptd),
        (Template::Nioptd1, nioptd1),
        (Template::Nioptd2, nioptd2),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lti::Polynomial;

    fn quick() -> ReductionSettings {
        ReductionSettings {
            n_starts: 2,
            ..Default::default()
        }
    }

    #[test]
    fn softplus_inverse() {
        for y in [1e-12, 0.05, 1.0, 40.0] {
            assert!((softplus(softplus_inv(y)) / y - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn identical_candidate_scores_zero() {
        let src = RationalTf::with_delay(
            Polynomial::constant(2.0),
            Polynomial::new(vec![1.0, 1.5]),
            0.2,
        )
        .unwrap();
        let cand = NioptdI {
            k: 2.0,
            t: 1.5,
            l: 0.2,
            alpha: 1.0,
        }
        .into();
        assert!(reduction_objective(&src, &cand).unwrap() < 1e-6);
    }

    #[test]
    fn unstable_candidate_is_penalized() {
        let src = RationalTf::from_descending(&[1.0], &[1.0, 1.0]).unwrap();
        let cand = NioptdII {
            k: 1.0,
            zeta: 0.01,
            omega_n: 1.0,
            l: 0.0,
            alpha: 2.6,
            beta: 0.2,
        }
        .into();
        assert!(reduction_objective(&src, &cand).unwrap() > PENALTY);
        let bad = NioptdI {
            k: 1.0,
            t: -1.0,
            l: 0.0,
            alpha: 1.0,
        }
        .into();
        assert_eq!(reduction_objective(&src, &bad).unwrap(), INVALID_CANDIDATE);
    }

    #[test]
    fn recovers_first_order_source() {
        let src = RationalTf::from_descending(&[3.0], &[2.0, 1.0]).unwrap();
        let r = reduce(&src, Template::Nioptd1, &quick()).unwrap();
        let ReducedModel::Nioptd1(p) = r.params else {
            panic!()
        };
        assert!((p.k - 3.0).abs() < 1e-3, "{p:?}");
        assert!((p.t - 2.0).abs() < 1e-3, "{p:?}");
        assert!((p.alpha - 1.0).abs() < 1e-3, "{p:?}");
        assert!(p.l < 1e-3, "{p:?}");
        assert!(r.feasible);
    }

    #[test]
    fn unstable_source_rejected() {
        let src = RationalTf::from_descending(&[1.0], &[1.0, -1.0]).unwrap();
        assert!(reduce(&src, Template::Foptd, &quick()).is_err());
    }
}
