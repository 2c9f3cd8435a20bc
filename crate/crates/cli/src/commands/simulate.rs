use fractune::tuner::{verify_isodamping, FopidParams, IsoDampingReport, SimulationSettings};
use serde::Serialize;

use crate::config::ProjectConfig;
use crate::error::{CliError, CliResult};
use crate::inputs::{load_all_systems, load_controller};
use crate::output::{fmt_num, Run, Table};
use crate::svg::{plot_csv, Panel, PlotSpec};
use crate::SimulateArgs;

#[derive(Serialize)]
struct PlantMetrics {
    plant: String,
    #[serde(flatten)]
    report: IsoDampingReport,
}

#[derive(Serialize)]
struct MetricsDoc<'a> {
    scenario: &'static str,
    controller: &'a str,
    params: FopidParams,
    drop: f64,
    gains: &'a [f64],
    settings: &'a SimulationSettings,
    plants: Vec<PlantMetrics>,
}

pub fn configure(cfg: &mut ProjectConfig, args: &SimulateArgs) -> CliResult<()> {
    if let Some(d) = args.drop {
        cfg.simulate.drop = d;
    }
    if !args.gains.is_empty() {
        cfg.simulate.gains = args.gains.clone();
    }
    Ok(())
}

/// Writes `transients.csv`, `metrics.json` and `plot.svg`. The setpoint steps
/// down by `drop`; traces are the resulting change in normalized power.
pub fn run(run: &mut Run, args: &SimulateArgs) -> CliResult<()> {
    let cfg = &run.config;
    let sim = SimulationSettings {
        t_final: cfg.simulate.t_final,
        ts: cfg.simulate.ts,
        rationalize: cfg.rationalize,
    };
    sim.validate()?;
    let drop = cfg.simulate.drop;
    let gains = cfg.simulate.gains.clone();
    if gains.is_empty() {
        return Err(CliError::input("at least one gain scale is needed"));
    }
    let ctrl = load_controller(cfg, &args.controller)?;
    let plants = load_all_systems(cfg, &args.plants)?;
    let every = ((cfg.simulate.output_ts / sim.ts).round() as usize).max(1);

    let mut header = vec!["t".to_string()];
    let mut columns: Vec<Vec<Option<f64>>> = Vec::new();
    let mut notes = Vec::new();
    let mut plant_metrics = Vec::new();
    for p in &plants {
        let mut report = verify_isodamping(&p.value, &ctrl.value, &gains, &sim)?;
        for m in &mut report.per_scale {
            header.push(format!("{} k={}", p.label, fmt_num(Some(m.scale))));
            if m.stable {
                // adding 0.0 turns -0.0 into 0.0 for clean CSV cells
                columns.push(
                    m.response
                        .iter()
                        .step_by(every)
                        .map(|y| Some(-drop * y + 0.0))
                        .collect(),
                );
            } else {
                columns.push(Vec::new());
                let msg = format!(
                    "{} k={}: {}",
                    p.label,
                    fmt_num(Some(m.scale)),
                    m.note.clone().unwrap_or_else(|| "unstable".into())
                );
                notes.push(format!("UNSTABLE {msg}"));
                run.warn(msg);
            }
            if drop == 0.0 && m.stable {
                m.degenerate = true;
                m.overshoot_pct = None;
                m.settling_time = None;
                m.steady_state_error_pct = None;
                m.note = Some("zero drop: setpoint unchanged, trace is flat".into());
            }
        }
        if drop == 0.0 {
            report.overshoot_spread = None;
        }
        plant_metrics.push(PlantMetrics {
            plant: p.label.clone(),
            report,
        });
    }

    let rows = sim.samples().div_ceil(every);
    let mut table = Table::new(header);
    table.notes = notes.clone();
    for r in 0..rows {
        let mut row = vec![fmt_num(Some((r * every) as f64 * sim.ts))];
        for c in &columns {
            row.push(fmt_num(c.get(r).copied().flatten()));
        }
        table.push(row);
    }
    let csv_text = table.to_csv(&run.banner());
    run.write_text("transients.csv", &csv_text)?;
    run.write_json(
        "metrics.json",
        &MetricsDoc {
            scenario: "stepback",
            controller: &ctrl.label,
            params: ctrl.value,
            drop,
            gains: &gains,
            settings: &sim,
            plants: plant_metrics,
        },
    )?;
    let svg = plot_csv(
        &csv_text,
        &PlotSpec {
            title: format!(
                "{}% step-back, controller {}",
                fmt_num(Some(drop * 100.0)),
                ctrl.label
            ),
            x_label: "time (s)".into(),
            x_log: false,
            panels: vec![Panel {
                suffix: String::new(),
                y_label: "change in power (fraction of full)".into(),
            }],
            notes,
            markers: Vec::new(),
            banner: run.banner(),
        },
    )?;
    run.write_text("plot.svg", &svg)?;
    Ok(())
}
