//! Resolving command-line inputs: files, or bundled fixtures addressed as
//! `fixture:<id>[/<variant>]`.

use std::path::Path;

use fractune::fixtures::{self, PlantFixture};
use fractune::io::{parse_data_csv, parse_model_json, parse_spec_json};
use fractune::lti::{FractionalTf, RationalTf};
use fractune::sysid::{generate_data, DataRecord, NoiseSpec};
use fractune::tuner::{achieved_spec, FopidParams, TuningSpec};

use crate::config::{InputKind, NoiseKind, ProjectConfig};
use crate::error::{CliError, CliResult};

pub const FIXTURE_PREFIX: &str = "fixture:";

/// A named input system.
#[derive(Debug, Clone)]
pub struct Labeled<T> {
    pub label: String,
    pub value: T,
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn fixture_ids() -> String {
    fixtures::plants()
        .iter()
        .map(|p| p.id.as_str())
        .collect::<Vec<_>>()
        .join(", ")
}

fn lookup(id: &str) -> CliResult<&'static PlantFixture> {
    fixtures::plant(id).map_err(|_| {
        CliError::input(format!(
            "unknown fixture '{id}' (available: {}, all)",
            fixture_ids()
        ))
    })
}

/// Fixture ids named by `id`, expanding `all`.
fn fixture_set(id: &str) -> CliResult<Vec<&'static PlantFixture>> {
    if id == "all" {
        Ok(fixtures::plants().iter().collect())
    } else {
        Ok(vec![lookup(id)?])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Variant {
    Identified,
    Nioptd1,
    Nioptd2,
}

fn split_variant(rest: &str) -> CliResult<(&str, Variant)> {
    let (id, v) = match rest.split_once('/') {
        Some((id, v)) => (id, v),
        None => (rest, "identified"),
    };
    let variant = match v {
        "identified" => Variant::Identified,
        "nioptd1" => Variant::Nioptd1,
        "nioptd2" => Variant::Nioptd2,
        other => {
            return Err(CliError::input(format!(
                "unknown fixture variant '{other}' (expected identified, nioptd1 or nioptd2)"
            )))
        }
    };
    Ok((id, variant))
}

fn fixture_system(fx: &PlantFixture, variant: Variant) -> CliResult<Labeled<FractionalTf>> {
    let (label, value) = match variant {
        Variant::Identified => (fx.id.clone(), FractionalTf::from_rational(&fx.identified())),
        Variant::Nioptd1 => (
            format!("{}/nioptd1", fx.id),
            fx.nioptd1().to_fractional_tf()?,
        ),
        Variant::Nioptd2 => (
            format!("{}/nioptd2", fx.id),
            fx.nioptd2().to_fractional_tf()?,
        ),
    };
    Ok(Labeled { label, value })
}

/// One or more systems from a model file or fixture reference.
pub fn load_systems(cfg: &ProjectConfig, input: &str) -> CliResult<Vec<Labeled<FractionalTf>>> {
    if let Some(rest) = input.strip_prefix(FIXTURE_PREFIX) {
        let (id, variant) = split_variant(rest)?;
        return fixture_set(id)?
            .into_iter()
            .map(|fx| fixture_system(fx, variant))
            .collect();
    }
    let path = cfg.model_path(input);
    let value = parse_model_json(&read(&path)?)?.to_fractional()?;
    Ok(vec![Labeled {
        label: stem(&path),
        value,
    }])
}

pub fn load_all_systems(
    cfg: &ProjectConfig,
    inputs: &[String],
) -> CliResult<Vec<Labeled<FractionalTf>>> {
    let mut out = Vec::new();
    for i in inputs {
        out.extend(load_systems(cfg, i)?);
    }
    Ok(out)
}

/// Exactly one system.
pub fn load_system(cfg: &ProjectConfig, input: &str) -> CliResult<Labeled<FractionalTf>> {
    let mut v = load_systems(cfg, input)?;
    if v.len() != 1 {
        return Err(CliError::input(format!(
            "'{input}' names {} systems; exactly one is needed here",
            v.len()
        )));
    }
    Ok(v.remove(0))
}

/// Rational systems only (the reduction source must be integer order).
pub fn load_rational(
    cfg: &ProjectConfig,
    inputs: &[String],
) -> CliResult<Vec<Labeled<RationalTf>>> {
    load_all_systems(cfg, inputs)?
        .into_iter()
        .map(|s| {
            let value = s.value.to_rational().ok_or_else(|| {
                CliError::input(format!(
                    "{}: reduction needs an integer-order (rational) source model",
                    s.label
                ))
            })?;
            Ok(Labeled {
                label: s.label,
                value,
            })
        })
        .collect()
}

/// `fixture:fopid`, `fixture:pid` or a controller JSON file.
pub fn load_controller(cfg: &ProjectConfig, input: &str) -> CliResult<Labeled<FopidParams>> {
    if let Some(rest) = input.strip_prefix(FIXTURE_PREFIX) {
        let c = fixtures::controllers();
        let value = match rest {
            "fopid" => c.fopid,
            "pid" => c.pid,
            other => {
                return Err(CliError::input(format!(
                    "unknown controller fixture '{other}' (expected fopid or pid)"
                )))
            }
        };
        return Ok(Labeled {
            label: rest.to_string(),
            value,
        });
    }
    let path = cfg.model_path(input);
    let mut doc: serde_json::Value = serde_json::from_str(&read(&path)?)
        .map_err(|e| CliError::input(format!("{}: controller JSON: {e}", path.display())))?;
    if let Some(obj) = doc.as_object_mut() {
        obj.remove("meta");
    }
    let value: FopidParams = serde_json::from_value(doc)
        .map_err(|e| CliError::input(format!("{}: controller JSON: {e}", path.display())))?;
    value.validate()?;
    Ok(Labeled {
        label: stem(&path),
        value,
    })
}

/// A spec file, or `fixture:<controller>` meaning the spec that controller
/// achieves on `plant` at the configured anchor frequencies.
pub fn load_spec(cfg: &ProjectConfig, input: &str, plant: &FractionalTf) -> CliResult<TuningSpec> {
    if input.starts_with(FIXTURE_PREFIX) {
        let c = load_controller(cfg, input)?;
        let t = &cfg.tune;
        return Ok(achieved_spec(
            plant, &c.value, t.omega_gc, t.omega_t, t.omega_s,
        )?);
    }
    let path = cfg.spec_path(input);
    parse_spec_json(&read(&path)?).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

/// Synthetic data per the `generate` configuration.
pub fn synthesize(cfg: &ProjectConfig, plant: &RationalTf) -> CliResult<DataRecord> {
    let g = &cfg.generate;
    let (u, ts) = match g.input {
        InputKind::Stepback => {
            g.stepback.validate()?;
            (g.stepback.input(), g.stepback.ts)
        }
        InputKind::Rbs => {
            g.rbs.validate()?;
            (g.rbs.input(), g.rbs.ts)
        }
    };
    let noise = match g.noise {
        NoiseKind::None => NoiseSpec::none(),
        NoiseKind::White => NoiseSpec::white(g.noise_fraction, cfg.seed),
        NoiseKind::Colored => NoiseSpec {
            std_fraction: g.noise_fraction,
            filter_num: vec![1.0],
            filter_den: vec![1.0, -g.noise_pole],
            seed: cfg.seed,
        },
    };
    Ok(generate_data(plant, u, ts, g.sampling, &noise)?)
}

/// A `t,u,y` CSV file, or `fixture:<id>` for synthetic data from that plant.
pub fn load_data(cfg: &ProjectConfig, input: &str) -> CliResult<Labeled<DataRecord>> {
    if let Some(rest) = input.strip_prefix(FIXTURE_PREFIX) {
        let fx = lookup(rest)?;
        return Ok(Labeled {
            label: format!("synthetic {}", fx.id),
            value: synthesize(cfg, &fx.identified())?,
        });
    }
    let path = cfg.data_path(input);
    let value = parse_data_csv(&read(&path)?)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    Ok(Labeled {
        label: stem(&path),
        value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_references() {
        let cfg = ProjectConfig::default();
        assert_eq!(load_systems(&cfg, "fixture:all").unwrap().len(), 8);
        assert_eq!(load_systems(&cfg, "fixture:all/nioptd2").unwrap().len(), 8);
        let one = load_system(&cfg, "fixture:50_70/nioptd1").unwrap();
        assert_eq!(one.label, "50_70/nioptd1");
        assert!(load_system(&cfg, "fixture:all").is_err());
        assert!(load_systems(&cfg, "fixture:99_1").is_err());
        assert!(load_systems(&cfg, "fixture:30_100/bogus").is_err());
        assert_eq!(
            load_rational(&cfg, &["fixture:30_100".into()])
                .unwrap()
                .len(),
            1
        );
        assert!(load_rational(&cfg, &["fixture:30_100/nioptd2".into()]).is_err());
    }

    #[test]
    fn controller_and_spec_fixtures() {
        let cfg = ProjectConfig::default();
        assert_eq!(
            load_controller(&cfg, "fixture:pid").unwrap().value.lambda,
            1.0
        );
        assert!(load_controller(&cfg, "fixture:pi").is_err());
        let plant = load_system(&cfg, "fixture:30_100/nioptd2").unwrap().value;
        let spec = load_spec(&cfg, "fixture:fopid", &plant).unwrap();
        assert!((spec.phi_m.to_degrees() - 90.46).abs() < 0.01);
    }

    #[test]
    fn synthetic_data_is_seeded() {
        let cfg = ProjectConfig::default();
        let a = load_data(&cfg, "fixture:30_100").unwrap().value;
        let b = load_data(&cfg, "fixture:30_100").unwrap().value;
        let c = load_data(
            &ProjectConfig {
                seed: 1,
                ..cfg.clone()
            },
            "fixture:30_100",
        )
        .unwrap()
        .value;
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
