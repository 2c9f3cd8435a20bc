use fractune::lti::{freq_response, logspace, ClosedLoop, FractionalTf, FrequencyEval};
use fractune::tuner::{phase_flatness, Flatness};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::inputs::{load_all_systems, load_controller, Labeled};
use crate::output::{fmt_num, Run, Table};
use crate::svg::{plot_csv, Panel, PlotSpec};
use crate::{BodeArgs, BodeMode};

const MAG: &str = " mag_db";
const PHASE: &str = " phase_deg";

#[derive(Serialize)]
struct FlatnessEntry {
    system: String,
    omega_gc: f64,
    #[serde(flatten)]
    flatness: Flatness,
}

#[derive(Serialize)]
struct FlatnessDoc {
    controller: String,
    entries: Vec<FlatnessEntry>,
}

fn push_response<S: FrequencyEval>(
    header: &mut Vec<String>,
    columns: &mut Vec<Vec<Option<f64>>>,
    label: &str,
    sys: &S,
    omegas: &[f64],
    with_phase: bool,
) -> CliResult<()> {
    let r = freq_response(sys, omegas)?;
    header.push(format!("{label}{MAG}"));
    columns.push(r.magnitude_db());
    if with_phase {
        header.push(format!("{label}{PHASE}"));
        columns.push(r.phase_deg_unwrapped());
    }
    Ok(())
}

/// Writes `bode.csv` and `bode.svg`, plus `flatness.json` with `--flatness`.
pub fn run(run: &mut Run, args: &BodeArgs) -> CliResult<()> {
    let cfg = &run.config;
    let systems: Vec<Labeled<FractionalTf>> = load_all_systems(cfg, &args.systems)?;
    let ctrl = args
        .controller
        .as_deref()
        .map(|c| load_controller(cfg, c))
        .transpose()?;
    let mode = args.mode.unwrap_or(if ctrl.is_some() {
        BodeMode::Open
    } else {
        BodeMode::System
    });
    if (mode != BodeMode::System || args.flatness) && ctrl.is_none() {
        return Err(CliError::input(
            "--controller is required for open-loop, S/T and flatness views",
        ));
    }
    let b = &cfg.bode;
    let lo = b.omega_min.log10();
    let hi = b.omega_max.log10();
    let n = ((hi - lo) * b.points_per_decade as f64).round() as usize + 1;
    let omegas = logspace(lo, hi, n);

    let mut header = vec!["omega".to_string()];
    let mut columns = Vec::new();
    for s in &systems {
        match (&mode, &ctrl) {
            (BodeMode::System, _) => {
                push_response(&mut header, &mut columns, &s.label, &s.value, &omegas, true)?
            }
            (_, Some(c)) => {
                let lp = ClosedLoop::new(s.value.clone(), c.value.to_fractional_tf()?);
                if mode == BodeMode::Open {
                    push_response(
                        &mut header,
                        &mut columns,
                        &format!("{} L", s.label),
                        &lp.open(),
                        &omegas,
                        true,
                    )?;
                } else {
                    push_response(
                        &mut header,
                        &mut columns,
                        &format!("{} S", s.label),
                        &lp.sensitivity(),
                        &omegas,
                        false,
                    )?;
                    push_response(
                        &mut header,
                        &mut columns,
                        &format!("{} T", s.label),
                        &lp.complementary(),
                        &omegas,
                        false,
                    )?;
                }
            }
            (_, None) => unreachable!("checked above"),
        }
    }

    let mut notes = Vec::new();
    let mut markers = Vec::new();
    if args.flatness {
        let c = ctrl.as_ref().expect("checked above");
        let wgc = cfg.tune.omega_gc;
        markers.push(wgc);
        let mut entries = Vec::new();
        for s in &systems {
            let f = phase_flatness(&s.value, &c.value, wgc, cfg.tune.flatness_half_decades)?;
            notes.push(format!(
                "{}: phase slope {:.4} rad·s at omega={}, flat (±2°) from {} to {} rad/s",
                s.label,
                f.slope,
                fmt_num(Some(wgc)),
                f.band_low.map_or("scan edge".into(), |v| format!("{v:.4}")),
                f.band_high
                    .map_or("scan edge".into(), |v| format!("{v:.4}")),
            ));
            entries.push(FlatnessEntry {
                system: s.label.clone(),
                omega_gc: wgc,
                flatness: f,
            });
        }
        run.write_json(
            "flatness.json",
            &FlatnessDoc {
                controller: c.label.clone(),
                entries,
            },
        )?;
    }

    let mut table = Table::new(header);
    table.notes = notes.clone();
    for (i, w) in omegas.iter().enumerate() {
        let mut row = vec![fmt_num(Some(*w))];
        row.extend(columns.iter().map(|c| fmt_num(c[i])));
        table.push(row);
    }
    let csv_text = table.to_csv(&run.banner());
    run.write_text("bode.csv", &csv_text)?;

    let mut panels = vec![Panel {
        suffix: MAG.into(),
        y_label: "magnitude (dB)".into(),
    }];
    if mode != BodeMode::St {
        panels.push(Panel {
            suffix: PHASE.into(),
            y_label: "phase (deg)".into(),
        });
    }
    let title = match (mode, &ctrl) {
        (BodeMode::System, _) => "Bode diagram".to_string(),
        (BodeMode::Open, Some(c)) => format!("Open loop with controller {}", c.label),
        (BodeMode::St, Some(c)) => format!(
            "Sensitivity and complementary sensitivity, controller {}",
            c.label
        ),
        _ => unreachable!("checked above"),
    };
    let svg = plot_csv(
        &csv_text,
        &PlotSpec {
            title,
            x_label: "frequency (rad/s)".into(),
            x_log: true,
            panels,
            notes,
            markers,
            banner: run.banner(),
        },
    )?;
    run.write_text("bode.svg", &svg)?;
    Ok(())
}
