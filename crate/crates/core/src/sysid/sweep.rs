use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use super::data::DataRecord;
use super::model::{EstimatorSpec, Orders, Structure};
use super::pem::estimate;

/// One row of an order sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub spec: EstimatorSpec,
    pub loss: Option<f64>,
    pub aic: Option<f64>,
    /// Why the fit was skipped, if it was.
    pub skipped: Option<String>,
}

/// Every order combination of `structure` with each active order in `range`.
pub fn sweep_specs(
    structure: Structure,
    range: RangeInclusive<usize>,
    nk: usize,
) -> Vec<EstimatorSpec> {
    let r: Vec<usize> = range.collect();
    let mut out = Vec::new();
    match structure {
        Structure::Arx => {
            for &na in &r {
                for &nb in &r {
                    out.push(EstimatorSpec::arx(na, nb, nk));
                }
            }
        }
        Structure::Oe => {
            for &nb in &r {
                for &nf in &r {
                    out.push(EstimatorSpec::oe(nb, nf, nk));
                }
            }
        }
        Structure::Armax => {
            for &na in &r {
                for &nb in &r {
                    for &nc in &r {
                        out.push(EstimatorSpec::armax(na, nb, nc, nk));
                    }
                }
            }
        }
        Structure::Bj => {
            for &nb in &r {
                for &nc in &r {
                    for &nd in &r {
                        for &nf in &r {
                            out.push(EstimatorSpec::new(
                                Structure::Bj,
                                Orders {
                                    na: 0,
                                    nb,
                                    nc,
                                    nd,
                                    nf,
                                },
                                nk,
                            ));
                        }
                    }
                }
            }
        }
    }
    out
}

/// Fit every spec and rank by ascending AIC; failed fits go last with reasons.
pub fn rank_specs(data: &DataRecord, specs: &[EstimatorSpec]) -> Vec<SweepEntry> {
    let mut rows: Vec<SweepEntry> = specs
        .iter()
        .map(|spec| match estimate(data, spec) {
            Ok(m) => match m.aic {
                Some(aic) => SweepEntry {
                    spec: *spec,
                    loss: Some(m.loss),
                    aic: Some(aic),
                    skipped: None,
                },
                None => SweepEntry {
                    spec: *spec,
                    loss: Some(m.loss),
                    aic: None,
                    skipped: Some("zero loss: perfect fit, AIC undefined".into()),
                },
            },
            Err(e) => SweepEntry {
                spec: *spec,
                loss: None,
                aic: None,
                skipped: Some(e.to_string()),
            },
        })
        .collect();
    // stable sort keeps the deterministic spec order among ties
    rows.sort_by(|a, b| match (a.aic, b.aic) {
        (Some(x), Some(y)) => x.total_cmp(&y),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    });
    rows
}

/// Fit all orders of one structure in `range` and rank them by AIC.
pub fn order_sweep(
    data: &DataRecord,
    structure: Structure,
    range: RangeInclusive<usize>,
    nk: usize,
) -> Vec<SweepEntry> {
    rank_specs(data, &sweep_specs(structure, range, nk))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sysid::data::lfilter;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn second_order_arx_wins() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut gauss =
            |n: usize| -> Vec<f64> { (0..n).map(|_| rng.sample(StandardNormal)).collect() };
        let u = gauss(300);
        let e: Vec<f64> = gauss(300).iter().map(|v| 0.05 * v).collect();
        // A y = B u + e, so ARX(2, 2) is the true structure
        let bu = lfilter(&[0.0, 0.5, 0.25], &[1.0], &u);
        let drive: Vec<f64> = bu.iter().zip(&e).map(|(a, b)| a + b).collect();
        let y = lfilter(&[1.0], &[1.0, -1.2, 0.5], &drive);
        let data = DataRecord::new(0.1, u, y).unwrap();
        let ranked = order_sweep(&data, Structure::Arx, 1..=4, 1);
        assert_eq!(ranked.len(), 16);
        assert_eq!(ranked[0].spec, EstimatorSpec::arx(2, 2, 1));
    }

    #[test]
    fn singleton_range() {
        let data = DataRecord::new(
            0.1,
            (0..30).map(|k| (k % 3) as f64).collect(),
            (0..30).map(|k| (k % 5) as f64).collect(),
        )
        .unwrap();
        assert_eq!(order_sweep(&data, Structure::Oe, 2..=2, 1).len(), 1);
    }
}
