use fractune::io::ModelFile;
use fractune::modred::{
    reduce_all_templates, reduce_from, ReductionProblem, ReductionResult, ReductionSettings,
    Template,
};
use serde::Serialize;

use crate::config::ProjectConfig;
use crate::error::{CliError, CliResult};
use crate::inputs::load_rational;
use crate::output::{file_stem, fmt_num, Run, Table};
use crate::ReduceArgs;

#[derive(Serialize)]
struct TemplateOutcome {
    template: Template,
    #[serde(skip_serializing_if = "Option::is_none")]
    result: Option<ReductionResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize)]
struct SourceReport {
    source: String,
    dc_gain: f64,
    model: ModelFile,
    templates: Vec<TemplateOutcome>,
    /// Template with the lowest normalized error.
    best: Option<Template>,
}

#[derive(Serialize)]
struct ReducedDoc<'a> {
    settings: &'a ReductionSettings,
    sources: Vec<SourceReport>,
}

fn parse_templates(s: &str) -> CliResult<Vec<Template>> {
    if s == "all" {
        Ok(Template::ALL.to_vec())
    } else {
        Ok(vec![s.parse()?])
    }
}

pub fn configure(cfg: &mut ProjectConfig, args: &ReduceArgs) -> CliResult<()> {
    if let Some(n) = args.starts {
        if n == 0 {
            return Err(CliError::input("--starts must be at least 1"));
        }
        cfg.reduce.n_starts = n;
    }
    Ok(())
}

/// Writes `reduced.json`, `table2.csv` and one model file per successful
/// template and source.
pub fn run(run: &mut Run, args: &ReduceArgs) -> CliResult<()> {
    let templates = parse_templates(&args.template)?;
    let c = &run.config;
    let settings = ReductionSettings {
        n_starts: c.reduce.n_starts,
        seed: c.seed,
        max_evals: c.reduce.max_evals,
        xtol: c.reduce.xtol,
        ftol: c.reduce.ftol,
        rationalize: c.rationalize,
    };
    let sources = load_rational(c, &args.models)?;

    let mut table = Table::new(
        [
            "model",
            "dc_gain",
            "FOPTD",
            "SOPTD",
            "NIOPTD-I",
            "NIOPTD-II",
            "best",
        ]
        .map(String::from)
        .to_vec(),
    );
    table
        .notes
        .push("modeling error normalized by dc gain".into());
    let mut reports = Vec::new();
    let mut model_files = Vec::new();
    for src in &sources {
        let explain = |e: fractune::Error| {
            match e {
            fractune::Error::Unstable { max_real } => CliError::input(format!(
                "{}: source model is unstable (max pole real part {max_real:.3e}); the H2 reduction error would be infinite",
                src.label
            )),
            fractune::Error::IntegratingSystem => CliError::input(format!(
                "{}: source model has a pole at the origin; the H2 reduction error would be infinite",
                src.label
            )),
            other => CliError::Core(other),
        }
        };
        let outcomes = if templates.len() == Template::ALL.len() {
            reduce_all_templates(&src.value, &settings).map_err(explain)?
        } else {
            let problem =
                ReductionProblem::new(&src.value, settings.rationalize).map_err(explain)?;
            templates
                .iter()
                .map(|&t| (t, reduce_from(&problem, t, &settings, &[])))
                .collect()
        };
        let dc_gain = src.value.dc_gain()?;
        let mut row = vec![src.label.clone(), fmt_num(Some(dc_gain))];
        let mut outs = Vec::new();
        for t in Template::ALL {
            let cell = outcomes
                .iter()
                .find(|(ot, _)| *ot == t)
                .and_then(|(_, r)| r.as_ref().ok())
                .map(|r| r.j_normalized);
            row.push(fmt_num(cell));
        }
        for (t, r) in outcomes {
            match r {
                Ok(r) => {
                    match r.params.to_fractional_tf() {
                        Ok(g) => model_files.push((
                            format!("model_{}_{}.json", file_stem(&src.label), t.name()),
                            ModelFile::from_fractional(&g),
                        )),
                        Err(e) => run.warn(format!("{} {}: {e}", src.label, t.label())),
                    }
                    if !r.converged {
                        run.warn(format!(
                            "{} {}: optimizer stopped on its evaluation budget",
                            src.label,
                            t.label()
                        ));
                    }
                    outs.push(TemplateOutcome {
                        template: t,
                        result: Some(r),
                        error: None,
                    });
                }
                Err(e) => {
                    run.warn(format!("{} {}: {e}", src.label, t.label()));
                    outs.push(TemplateOutcome {
                        template: t,
                        result: None,
                        error: Some(e.to_string()),
                    });
                }
            }
        }
        let best = outs
            .iter()
            .filter_map(|o| o.result.as_ref().map(|r| (o.template, r.j_normalized)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|b| b.0);
        row.push(best.map(|t| t.label().to_string()).unwrap_or_default());
        table.push(row);
        reports.push(SourceReport {
            source: src.label.clone(),
            dc_gain,
            model: ModelFile::from_rational(&src.value),
            templates: outs,
            best,
        });
    }
    if reports.iter().all(|r| r.best.is_none()) {
        return Err(CliError::Core(fractune::Error::Numerical(
            "no template could be fitted to any source".into(),
        )));
    }
    run.write_json(
        "reduced.json",
        &ReducedDoc {
            settings: &settings,
            sources: reports,
        },
    )?;
    run.write_csv("table2.csv", &table)?;
    for (name, m) in model_files {
        run.write_json(&name, &m)?;
    }
    Ok(())
}
