//! Project configuration: every knob a run depends on, with defaults that
//! are written back out next to the outputs.

use std::path::{Path, PathBuf};

use fractune::lti::RationalizeSettings;
use fractune::sysid::{Orders, RandomBinaryInput, Sampling, StepbackScenario, Structure};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ProjectConfig {
    pub seed: u64,
    pub paths: PathsConfig,
    pub rationalize: RationalizeSettings,
    pub identify: IdentifyConfig,
    pub reduce: ReduceConfig,
    pub tune: TuneConfig,
    pub simulate: SimulateConfig,
    pub bode: BodeConfig,
    pub generate: GenerateConfig,
}

/// Directories searched for relative input paths; empty means the working
/// directory.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathsConfig {
    pub data: String,
    pub models: String,
    pub specs: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IdentifyConfig {
    pub structures: Vec<Structure>,
    pub orders: Orders,
    pub nk: usize,
    /// When nonzero, sweep every order from 1 to this value and keep the
    /// lowest AIC per structure.
    pub sweep_max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReduceConfig {
    pub n_starts: usize,
    pub max_evals: usize,
    pub xtol: f64,
    pub ftol: f64,
}

/// Anchor frequencies used when a spec is backed out of a controller.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TuneConfig {
    pub omega_gc: f64,
    pub omega_t: f64,
    pub omega_s: f64,
    pub flatness_half_decades: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateConfig {
    pub t_final: f64,
    pub ts: f64,
    /// Spacing of the rows written to the transient CSV.
    pub output_ts: f64,
    pub drop: f64,
    pub gains: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BodeConfig {
    pub omega_min: f64,
    pub omega_max: f64,
    pub points_per_decade: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum InputKind {
    Stepback,
    Rbs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    Colored,
    White,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GenerateConfig {
    pub input: InputKind,
    pub sampling: Sampling,
    pub noise: NoiseKind,
    /// Noise standard deviation as a fraction of the noise-free output span.
    pub noise_fraction: f64,
    /// Pole of the first-order noise-shaping filter (colored noise only).
    pub noise_pole: f64,
    pub stepback: StepbackScenario,
    pub rbs: RandomBinaryInput,
}

impl Default for IdentifyConfig {
    fn default() -> Self {
        Self {
            structures: vec![
                Structure::Arx,
                Structure::Armax,
                Structure::Bj,
                Structure::Oe,
            ],
            orders: Orders {
                na: 3,
                nb: 4,
                nc: 1,
                nd: 1,
                nf: 3,
            },
            nk: 0,
            sweep_max: 0,
        }
    }
}

impl Default for ReduceConfig {
    fn default() -> Self {
        let d = fractune::modred::ReductionSettings::default();
        Self {
            n_starts: d.n_starts,
            max_evals: d.max_evals,
            xtol: d.xtol,
            ftol: d.ftol,
        }
    }
}

impl Default for TuneConfig {
    fn default() -> Self {
        Self {
            omega_gc: 1.0,
            omega_t: 100.0,
            omega_s: 0.01,
            flatness_half_decades: 1.0,
        }
    }
}

impl Default for SimulateConfig {
    fn default() -> Self {
        let d = fractune::tuner::SimulationSettings::default();
        Self {
            t_final: d.t_final,
            ts: d.ts,
            output_ts: 0.1,
            drop: 0.3,
            gains: vec![0.2, 1.0, 3.5],
        }
    }
}

impl Default for BodeConfig {
    fn default() -> Self {
        Self {
            omega_min: 1e-3,
            omega_max: 1e3,
            points_per_decade: 50,
        }
    }
}

impl Default for GenerateConfig {
    fn default() -> Self {
        Self {
            input: InputKind::Rbs,
            sampling: Sampling::Tustin,
            noise: NoiseKind::Colored,
            noise_fraction: 0.005,
            noise_pole: fractune::sysid::NoiseSpec::DEFAULT_POLE,
            stepback: StepbackScenario::default(),
            rbs: RandomBinaryInput::default(),
        }
    }
}

impl ProjectConfig {
    /// Defaults, overlaid with the TOML file if given, then the seed flag.
    pub fn load(path: Option<&Path>, seed: Option<u64>) -> CliResult<Self> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|source| CliError::Io {
                    path: p.to_path_buf(),
                    source,
                })?;
                Self::parse(&text)?
            }
            None => Self::default(),
        };
        if let Some(s) = seed {
            cfg.seed = s;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: &str| Err(CliError::Config(m.to_string()));
        if self.seed > i64::MAX as u64 {
            return bad("seed must be at most 2^63 - 1");
        }
        if self.reduce.n_starts == 0 || self.reduce.max_evals == 0 {
            return bad("reduce.n_starts and reduce.max_evals must be positive");
        }
        let b = &self.bode;
        if !(b.omega_min > 0.0 && b.omega_max > b.omega_min) || b.points_per_decade == 0 {
            return bad("bode needs 0 < omega_min < omega_max and points_per_decade > 0");
        }
        let s = &self.simulate;
        if !(s.ts > 0.0 && s.output_ts >= s.ts && s.t_final > s.ts) {
            return bad("simulate needs 0 < ts <= output_ts and t_final > ts");
        }
        if !(0.0..=1.0).contains(&s.drop) || s.gains.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
            return bad("simulate.drop must lie in [0, 1] and gains must be finite and >= 0");
        }
        let g = &self.generate;
        if !(g.noise_fraction >= 0.0) || !(g.noise_pole.abs() < 1.0) {
            return bad("generate needs noise_fraction >= 0 and |noise_pole| < 1");
        }
        if self.identify.structures.is_empty() {
            return bad("identify.structures must not be empty");
        }
        Ok(())
    }

    /// Canonical TOML of the resolved configuration.
    pub fn to_toml(&self) -> CliResult<String> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    /// SHA-256 of the canonical TOML, hex encoded.
    pub fn hash(&self) -> CliResult<String> {
        Ok(format!("{:x}", Sha256::digest(self.to_toml()?.as_bytes())))
    }

    fn resolve(base: &str, input: &str) -> PathBuf {
        let p = Path::new(input);
        if base.is_empty() || p.is_absolute() || p.exists() {
            p.to_path_buf()
        } else {
            Path::new(base).join(p)
        }
    }

    pub fn data_path(&self, input: &str) -> PathBuf {
        Self::resolve(&self.paths.data, input)
    }

    pub fn model_path(&self, input: &str) -> PathBuf {
        Self::resolve(&self.paths.models, input)
    }

    pub fn spec_path(&self, input: &str) -> PathBuf {
        Self::resolve(&self.paths.specs, input)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let cfg = ProjectConfig::default();
        let text = cfg.to_toml().unwrap();
        assert_eq!(ProjectConfig::parse(&text).unwrap(), cfg);
    }

    #[test]
    fn partial_file_keeps_other_defaults() {
        let cfg = ProjectConfig::parse("seed = 4\n[reduce]\nn_starts = 2\n").unwrap();
        assert_eq!(cfg.seed, 4);
        assert_eq!(cfg.reduce.n_starts, 2);
        assert_eq!(cfg.reduce.max_evals, ReduceConfig::default().max_evals);
        assert_eq!(cfg.bode, BodeConfig::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ProjectConfig::parse("sed = 4\n").is_err());
        assert!(ProjectConfig::parse("[reduce]\nstarts = 2\n").is_err());
        assert!(ProjectConfig::parse("[rationalize]\nordr = 2\n").is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = ProjectConfig::default();
        let b = ProjectConfig {
            seed: 1,
            ..a.clone()
        };
        assert_eq!(a.hash().unwrap(), a.clone().hash().unwrap());
        assert_ne!(a.hash().unwrap(), b.hash().unwrap());
        assert_eq!(a.hash().unwrap().len(), 64);
    }

    #[test]
    fn validation_catches_bad_values() {
        let mut c = ProjectConfig::default();
        c.bode.omega_min = 10.0;
        c.bode.omega_max = 1.0;
        assert!(c.validate().is_err());
        let c = ProjectConfig {
            seed: u64::MAX,
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }
}
