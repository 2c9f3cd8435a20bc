//! Bundled reference models: eight identified step-back plants with their
//! published reduced models, and two reference controllers.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lti::RationalTf;
use crate::modred::{NioptdI, NioptdII, Template};
use crate::tuner::FopidParams;

const PLANTS_JSON: &str = include_str!("../fixtures/plants.json");
const CONTROLLERS_JSON: &str = include_str!("../fixtures/controllers.json");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemplateErrors {
    pub foptd: f64,
    pub soptd: f64,
    pub nioptd1: f64,
    pub nioptd2: f64,
}

impl TemplateErrors {
    pub fn get(&self, t: Template) -> f64 {
        match t {
            Template::Foptd => self.foptd,
            Template::Soptd => self.soptd,
            Template::Nioptd1 => self.nioptd1,
            Template::Nioptd2 => self.nioptd2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportedNioptdI {
    pub k: f64,
    pub t: f64,
    pub alpha: f64,
    pub delay: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportedNioptdII {
    pub k: f64,
    pub alpha: f64,
    pub two_zeta_omega_n: f64,
    pub beta: f64,
    pub omega_n_sq: f64,
    pub delay: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantFixture {
    pub id: String,
    pub rod_drop_percent: u32,
    pub initial_power_percent: u32,
    pub num_descending: Vec<f64>,
    pub den_descending: Vec<f64>,
    pub reported_dc_gain: f64,
    pub reported_j_normalized: TemplateErrors,
    pub reported_nioptd1: ReportedNioptdI,
    pub reported_nioptd2: ReportedNioptdII,
}

impl PlantFixture {
    /// The identified continuous-time model.
    pub fn identified(&self) -> RationalTf {
        RationalTf::from_descending(&self.num_descending, &self.den_descending)
            .expect("bundled fixture is a valid transfer function")
    }

    pub fn nioptd1(&self) -> NioptdI {
        let r = self.reported_nioptd1;
        NioptdI {
            k: r.k,
            t: r.t,
            l: r.delay,
            alpha: r.alpha,
        }
    }

    pub fn nioptd2(&self) -> NioptdII {
        let r = self.reported_nioptd2;
        NioptdII::from_expanded(
            r.k,
            r.alpha,
            r.two_zeta_omega_n,
            r.beta,
            r.omega_n_sq,
            r.delay,
        )
        .expect("bundled fixture has valid NIOPTD-II parameters")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct PlantFile {
    version: u32,
    description: String,
    plants: Vec<PlantFixture>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerFixtures {
    pub fopid: FopidParams,
    pub pid: FopidParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ControllerFile {
    version: u32,
    description: String,
    fopid: FopidParams,
    pid: FopidParams,
}

/// All eight plants, ordered 30% drop then 50% drop, descending power.
pub fn plants() -> &'static [PlantFixture] {
    static CELL: OnceLock<Vec<PlantFixture>> = OnceLock::new();
    CELL.get_or_init(|| {
        serde_json::from_str::<PlantFile>(PLANTS_JSON)
            .expect("bundled plants.json parses")
            .plants
    })
}

pub fn plant(id: &str) -> Result<&'static PlantFixture> {
    plants().iter().find(|p| p.id == id).ok_or_else(|| {
        let ids: Vec<&str> = plants().iter().map(|p| p.id.as_str()).collect();
        Error::invalid(format!(
            "unknown fixture '{id}' (available: {})",
            ids.join(", ")
        ))
    })
}

/// The reference controllers tuned on the `30_100` NIOPTD-II model.
pub fn controllers() -> ControllerFixtures {
    let f: ControllerFile =
        serde_json::from_str(CONTROLLERS_JSON).expect("bundled controllers.json parses");
    ControllerFixtures {
        fopid: f.fopid,
        pid: f.pid,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eight_stable_plants() {
        assert_eq!(plants().len(), 8);
        for p in plants() {
            let g = p.identified();
            assert!(g.is_stable(), "{}", p.id);
            assert!(p.nioptd2().validate().is_ok());
        }
        assert!(plant("30_100").is_ok());
        assert!(plant("nope").is_err());
    }

    #[test]
    fn reference_controllers() {
        let c = controllers();
        assert!(c.pid.is_pid());
        assert!((c.fopid.lambda - 1.0137).abs() < 1e-12);
    }
}
