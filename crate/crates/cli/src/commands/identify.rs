use fractune::io::ModelFile;
use fractune::lti::{minreal, DEFAULT_MINREAL_TOL};
use fractune::sysid::{
    estimate, rank_specs, sweep_specs, EstimatorSpec, Orders, Structure, SweepEntry,
};
use serde::Serialize;

use crate::config::ProjectConfig;
use crate::error::{CliError, CliResult};
use crate::inputs::load_data;
use crate::output::{fmt_num, Run, Table};
use crate::IdentifyArgs;

const TABLE_ORDER: [Structure; 4] = [
    Structure::Arx,
    Structure::Armax,
    Structure::Bj,
    Structure::Oe,
];

fn spec_for(structure: Structure, o: Orders, nk: usize) -> EstimatorSpec {
    match structure {
        Structure::Arx => EstimatorSpec::arx(o.na, o.nb, nk),
        Structure::Armax => EstimatorSpec::armax(o.na, o.nb, o.nc, nk),
        Structure::Bj => EstimatorSpec::bj(o.nb, o.nc, o.nd, o.nf, nk),
        Structure::Oe => EstimatorSpec::oe(o.nb, o.nf, nk),
    }
}

/// Selection score: a perfect fit outranks every finite AIC.
fn score(e: &SweepEntry) -> Option<f64> {
    match (e.aic, e.loss) {
        (Some(a), _) => Some(a),
        (None, Some(0.0)) => Some(f64::NEG_INFINITY),
        _ => None,
    }
}

fn parse_structures(names: &[String]) -> CliResult<Option<Vec<Structure>>> {
    if names.is_empty() {
        return Ok(None);
    }
    if names.iter().any(|n| n == "all") {
        return Ok(Some(TABLE_ORDER.to_vec()));
    }
    let mut out = Vec::new();
    for n in names {
        let s: Structure = n.parse()?;
        if !out.contains(&s) {
            out.push(s);
        }
    }
    Ok(Some(out))
}

#[derive(Serialize)]
struct ModelDoc<'a> {
    dataset: &'a str,
    identified: &'a fractune::sysid::IdentifiedModel,
    continuous: Option<ModelFile>,
    continuous_error: Option<String>,
}

/// Fold the command-line flags into the configuration.
pub fn configure(cfg: &mut ProjectConfig, args: &IdentifyArgs) -> CliResult<()> {
    {
        let c = &mut cfg.identify;
        if let Some(s) = parse_structures(&args.structure)? {
            c.structures = s;
        }
        let o = &mut c.orders;
        for (flag, slot) in [
            (args.na, &mut o.na),
            (args.nb, &mut o.nb),
            (args.nc, &mut o.nc),
            (args.nd, &mut o.nd),
            (args.nf, &mut o.nf),
        ] {
            if let Some(v) = flag {
                *slot = v;
            }
        }
        if let Some(nk) = args.nk {
            c.nk = nk;
        }
        if let Some(m) = args.sweep {
            c.sweep_max = m;
        }
    }
    Ok(())
}

/// Writes `aic_table.csv`, `aic_detail.csv`, `model_<structure>.json` and
/// `model.json` (continuous form of the best model).
pub fn run(run: &mut Run, args: &IdentifyArgs) -> CliResult<()> {
    let cfg = run.config.identify.clone();
    let data = load_data(&run.config, &args.data)?;

    let mut detail = Table::new(
        [
            "structure",
            "na",
            "nb",
            "nc",
            "nd",
            "nf",
            "nk",
            "params",
            "V",
            "AIC",
            "status",
        ]
        .map(String::from)
        .to_vec(),
    );
    let mut best: Vec<(Structure, SweepEntry, f64)> = Vec::new();
    for &structure in &cfg.structures {
        let specs = if cfg.sweep_max > 0 {
            sweep_specs(structure, 1..=cfg.sweep_max, cfg.nk)
        } else {
            vec![spec_for(structure, cfg.orders, cfg.nk)]
        };
        let ranked = rank_specs(&data.value, &specs);
        for e in &ranked {
            let o = e.spec.orders;
            detail.push(vec![
                structure.to_string(),
                o.na.to_string(),
                o.nb.to_string(),
                o.nc.to_string(),
                o.nd.to_string(),
                o.nf.to_string(),
                e.spec.nk.to_string(),
                e.spec.param_count().to_string(),
                fmt_num(e.loss),
                fmt_num(score(e)),
                e.skipped.clone().unwrap_or_else(|| "ok".into()),
            ]);
        }
        let top = ranked
            .iter()
            .filter_map(|e| score(e).map(|s| (e, s)))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        match top {
            Some((e, s)) => best.push((structure, e.clone(), s)),
            None => run.warn(format!("{structure}: no order combination could be fitted")),
        }
    }
    if best.is_empty() {
        return Err(CliError::Core(fractune::Error::Numerical(
            "no structure produced a usable fit".into(),
        )));
    }

    let winner = best
        .iter()
        .min_by(|a, b| a.2.total_cmp(&b.2))
        .map(|b| b.0)
        .expect("best is non-empty");
    let mut table = Table::new(
        ["dataset", "ARX", "ARMAX", "BJ", "OE", "preferred"]
            .map(String::from)
            .to_vec(),
    );
    table
        .notes
        .push("minimum AIC per estimator structure".into());
    let mut row = vec![data.label.clone()];
    for s in TABLE_ORDER {
        row.push(fmt_num(best.iter().find(|b| b.0 == s).map(|b| b.2)));
    }
    row.push(winner.to_string());
    table.push(row);
    run.write_csv("aic_table.csv", &table)?;
    run.write_csv("aic_detail.csv", &detail)?;

    for (structure, entry, _) in &best {
        let model = estimate(&data.value, &entry.spec)?;
        let (continuous, continuous_error) = match model
            .to_continuous()
            .and_then(|g| minreal(&g, DEFAULT_MINREAL_TOL))
        {
            Ok(g) => (Some(ModelFile::from_rational(&g)), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let name = format!("model_{}.json", structure.to_string().to_ascii_lowercase());
        let doc = ModelDoc {
            dataset: &data.label,
            identified: &model,
            continuous: continuous.clone(),
            continuous_error: continuous_error.clone(),
        };
        run.write_json(&name, &doc)?;
        if *structure == winner {
            match continuous {
                Some(m) => {
                    run.write_json("model.json", &m)?;
                }
                None => run.warn(format!(
                    "best model ({structure}) has no continuous equivalent: {}",
                    continuous_error.unwrap_or_default()
                )),
            }
        }
    }
    Ok(())
}
