use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lti::{simulate, tustin_c2d, RationalTf};

/// Uniformly sampled input/output record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataRecord {
    ts: f64,
    u: Vec<f64>,
    y: Vec<f64>,
}

impl DataRecord {
    pub fn new(ts: f64, u: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if !(ts > 0.0) || !ts.is_finite() {
            return Err(Error::invalid(format!(
                "sampling period must be > 0, got {ts}"
            )));
        }
        if u.len() != y.len() {
            return Err(Error::invalid(format!(
                "input has {} samples but output has {}",
                u.len(),
                y.len()
            )));
        }
        if u.is_empty() {
            return Err(Error::invalid("data record is empty"));
        }
        if let Some(i) = u.iter().chain(&y).position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite sample at position {i}")));
        }
        Ok(Self { ts, u, y })
    }

    pub fn ts(&self) -> f64 {
        self.ts
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|k| k as f64 * self.ts).collect()
    }
}

/// `y = num(q⁻¹)/den(q⁻¹) x` with zero initial conditions.
pub fn lfilter(num: &[f64], den: &[f64], x: &[f64]) -> Vec<f64> {
    let a0 = den[0];
    assert!(
        a0 != 0.0,
        "filter denominator must have a nonzero constant term"
    );
    let mut y = vec![0.0; x.len()];
    for t in 0..x.len() {
        let mut acc = 0.0;
        for (k, b) in num.iter().enumerate().take(t + 1) {
            acc += b * x[t - k];
        }
        for (k, a) in den.iter().enumerate().skip(1).take(t) {
            acc -= a * y[t - k];
        }
        y[t] = acc / a0;
    }
    y
}

/// Additive measurement noise: seeded white Gaussian noise shaped by a discrete
/// filter, rescaled to a standard deviation of `std_fraction` times the
/// noise-free output span.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub std_fraction: f64,
    pub filter_num: Vec<f64>,
    pub filter_den: Vec<f64>,
    pub seed: u64,
}

impl NoiseSpec {
    pub const DEFAULT_POLE: f64 = 0.85;

    pub fn none() -> Self {
        Self {
            std_fraction: 0.0,
            filter_num: vec![1.0],
            filter_den: vec![1.0],
            seed: 0,
        }
    }

    /// First-order lowpass colored noise at 0.5% of the output span.
    pub fn colored(seed: u64) -> Self {
        Self {
            std_fraction: 0.005,
            filter_num: vec![1.0],
            filter_den: vec![1.0, -Self::DEFAULT_POLE],
            seed,
        }
    }

    pub fn white(std_fraction: f64, seed: u64) -> Self {
        Self {
            std_fraction,
            filter_num: vec![1.0],
            filter_den: vec![1.0],
            seed,
        }
    }

    pub fn is_off(&self) -> bool {
        self.std_fraction == 0.0
    }

    fn validate(&self) -> Result<()> {
        if !(self.std_fraction >= 0.0) || !self.std_fraction.is_finite() {
            return Err(Error::invalid("noise std_fraction must be >= 0"));
        }
        if self.filter_num.is_empty() || self.filter_den.first().copied().unwrap_or(0.0) == 0.0 {
            return Err(Error::invalid(
                "noise filter needs a numerator and a denominator with nonzero constant term",
            ));
        }
        Ok(())
    }

    /// `n` samples of shaped noise with unit sample standard deviation.
    pub fn unit_samples(&self, n: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let white: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let shaped = lfilter(&self.filter_num, &self.filter_den, &white);
        let sd = std_dev(&shaped);
        if sd > 0.0 {
            shaped.iter().map(|v| v / sd).collect()
        } else {
            shaped
        }
    }
}

fn std_dev(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    if x.len() < 2 {
        return 0.0;
    }
    let mean = x.iter().sum::<f64>() / n;
    (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Control-rod step-back excitation and response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StepbackScenario {
    pub drop_fraction: f64,
    pub ramp_time: f64,
    pub total_time: f64,
    pub ts: f64,
}

impl Default for StepbackScenario {
    fn default() -> Self {
        Self {
            drop_fraction: 0.3,
            ramp_time: 3.0,
            total_time: 14.0,
            ts: 0.1,
        }
    }
}

impl StepbackScenario {
    pub fn validate(&self) -> Result<()> {
        if !(self.drop_fraction >= 0.0 && self.drop_fraction <= 1.0) {
            return Err(Error::invalid(format!(
                "drop fraction must lie in [0, 1], got {}",
                self.drop_fraction
            )));
        }
        if !(self.ts > 0.0) || !(self.total_time > 0.0) {
            return Err(Error::invalid("sampling period and total time must be > 0"));
        }
        if !(self.ramp_time >= 0.0) || self.ramp_time >= self.total_time {
            return Err(Error::invalid(
                "ramp time must satisfy 0 <= ramp_time < total_time",
            ));
        }
        Ok(())
    }

    pub fn samples(&self) -> usize {
        (self.total_time / self.ts).round() as usize + 1
    }

    /// Truncated ramp from 0 to the drop fraction, then held.
    pub fn input(&self) -> Vec<f64> {
        (0..self.samples())
            .map(|k| {
                let t = k as f64 * self.ts;
                if self.ramp_time == 0.0 {
                    self.drop_fraction
                } else {
                    self.drop_fraction * (t / self.ramp_time).min(1.0)
                }
            })
            .collect()
    }
}

/// Seeded random binary sequence switching between `±amplitude`, with each
/// level held for `hold` samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RandomBinaryInput {
    pub amplitude: f64,
    pub hold: usize,
    pub samples: usize,
    pub ts: f64,
    pub seed: u64,
}

impl Default for RandomBinaryInput {
    fn default() -> Self {
        Self {
            amplitude: 0.3,
            hold: 10,
            samples: 141,
            ts: 0.1,
            seed: 1234,
        }
    }
}

impl RandomBinaryInput {
    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude.is_finite()) || self.hold == 0 || self.samples < 2 || !(self.ts > 0.0) {
            return Err(Error::invalid(
                "random binary input needs finite amplitude, hold >= 1, samples >= 2 and ts > 0",
            ));
        }
        Ok(())
    }

    pub fn input(&self) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut level = self.amplitude;
        (0..self.samples)
            .map(|k| {
                if k % self.hold == 0 {
                    level = if rng.random_bool(0.5) {
                        self.amplitude
                    } else {
                        -self.amplitude
                    };
                }
                level
            })
            .collect()
    }
}

/// How the continuous plant is sampled when synthesizing data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampling {
    /// Zero-order hold; a strictly proper plant gives one sample of delay.
    #[default]
    Zoh,
    /// Bilinear map; the discrete model has as many zeros as poles.
    Tustin,
}

/// Drive the plant with `u`, sampled at `ts`, and add measurement noise
/// scaled to the noise-free output span.
pub fn generate_data(
    plant: &RationalTf,
    u: Vec<f64>,
    ts: f64,
    sampling: Sampling,
    noise: &NoiseSpec,
) -> Result<DataRecord> {
    noise.validate()?;
    if !plant.is_stable() {
        return Err(Error::Unstable {
            max_real: plant.max_pole_real()?,
        });
    }
    let mut y = match sampling {
        Sampling::Zoh => simulate(plant, &u, ts)?,
        Sampling::Tustin => {
            let (num, den) = tustin_c2d(plant, ts)?;
            lfilter(num.coeffs(), den.coeffs(), &u)
        }
    };
    if !noise.is_off() {
        let lo = y.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let level = noise.std_fraction * (hi - lo);
        for (v, n) in y.iter_mut().zip(noise.unit_samples(u.len())) {
            *v += level * n;
        }
    }
    DataRecord::new(ts, u, y)
}

/// Simulate the plant under a step-back and add measurement noise.
pub fn generate_stepback_data(
    plant: &RationalTf,
    scenario: &StepbackScenario,
    noise: &NoiseSpec,
) -> Result<DataRecord> {
    scenario.validate()?;
    generate_data(plant, scenario.input(), scenario.ts, Sampling::Zoh, noise)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eq12() -> RationalTf {
        RationalTf::from_descending(
            &[-1.184, -23.68, 473.6, 9472.0],
            &[1.0, 11.33, 55.15, 48.31],
        )
        .unwrap()
    }

    #[test]
    fn filter_matches_recursion() {
        let y = lfilter(&[0.0, 1.0], &[1.0, -0.5], &[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(y, vec![0.0, 1.0, 0.5, 0.25]);
    }

    #[test]
    fn stepback_final_value() {
        let d = generate_stepback_data(&eq12(), &StepbackScenario::default(), &NoiseSpec::none())
            .unwrap();
        assert_eq!(d.len(), 141);
        let last = *d.y().last().unwrap();
        assert!((last / (0.3 * 9472.0 / 48.31) - 1.0).abs() < 0.01, "{last}");
    }

    #[test]
    fn zero_drop_is_flat() {
        let s = StepbackScenario {
            drop_fraction: 0.0,
            ..Default::default()
        };
        let d = generate_stepback_data(&eq12(), &s, &NoiseSpec::none()).unwrap();
        assert!(d.y().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn seeded_noise_is_reproducible() {
        let a =
            generate_stepback_data(&eq12(), &Default::default(), &NoiseSpec::colored(7)).unwrap();
        let b =
            generate_stepback_data(&eq12(), &Default::default(), &NoiseSpec::colored(7)).unwrap();
        let c =
            generate_stepback_data(&eq12(), &Default::default(), &NoiseSpec::colored(8)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn random_binary_is_seeded_and_two_level() {
        let r = RandomBinaryInput::default();
        let u = r.input();
        assert_eq!(u.len(), 141);
        assert!(u.iter().all(|v| v.abs() == 0.3));
        assert!(u.chunks(10).all(|c| c.iter().all(|v| *v == c[0])));
        assert_eq!(u, r.input());
        assert_ne!(u, RandomBinaryInput { seed: 1, ..r }.input());
    }

    #[test]
    fn tustin_sampling_keeps_dc_gain() {
        let u = vec![1.0; 400];
        let d = generate_data(&eq12(), u, 0.1, Sampling::Tustin, &NoiseSpec::none()).unwrap();
        assert!((d.y()[399] / (9472.0 / 48.31) - 1.0).abs() < 1e-6);
        // biproper plant: the first sample already responds, except at
        // ts = 0.1 where the zero at s = 2/ts maps to z = infinity
        assert_eq!(d.y()[0], 0.0);
        let d = generate_data(
            &eq12(),
            vec![1.0; 4],
            0.05,
            Sampling::Tustin,
            &NoiseSpec::none(),
        )
        .unwrap();
        assert!(d.y()[0] != 0.0);
    }

    #[test]
    fn rejects_bad_records() {
        assert!(DataRecord::new(0.1, vec![1.0], vec![]).is_err());
        assert!(DataRecord::new(0.0, vec![1.0], vec![1.0]).is_err());
        assert!(DataRecord::new(0.1, vec![f64::NAN], vec![1.0]).is_err());
        let unstable = RationalTf::from_descending(&[1.0], &[1.0, -1.0]).unwrap();
        assert!(
            generate_stepback_data(&unstable, &Default::default(), &NoiseSpec::none()).is_err()
        );
    }
}
