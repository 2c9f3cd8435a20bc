use fractune::io::SpecFile;
use fractune::tuner::{
    default_initial, phase_flatness, tune_with, Flatness, FopidParams, TuneMask, TuneReport,
};
use serde::Serialize;

use crate::error::CliResult;
use crate::inputs::{load_controller, load_spec, load_system};
use crate::output::Run;
use crate::{ControllerKind, TuneArgs};

#[derive(Serialize)]
struct ReportDoc<'a> {
    plant: &'a str,
    controller: &'static str,
    spec: SpecFile,
    initial: FopidParams,
    report: &'a TuneReport,
    /// Frequency band around the crossover target where the phase stays flat.
    flat_band: Option<Flatness>,
}

/// Writes `controller.json` and `tune_report.json`. A solve that does not
/// converge still writes both and only warns.
pub fn run(run: &mut Run, args: &TuneArgs) -> CliResult<()> {
    let cfg = &run.config;
    let plant = load_system(cfg, &args.plant)?;
    let spec = load_spec(cfg, &args.spec, &plant.value)?;
    spec.validate()?;
    let initial = match &args.initial {
        Some(i) => load_controller(cfg, i)?.value,
        None => default_initial(&plant.value, &spec)?,
    };
    let (mask, initial, kind) = match args.controller {
        ControllerKind::Fopid => (TuneMask::FOPID, initial, "fopid"),
        ControllerKind::Pid => (
            TuneMask::PID,
            FopidParams::pid(initial.kp, initial.ki, initial.kd),
            "pid",
        ),
    };
    let report = tune_with(&plant.value, &spec, &initial, &mask, cfg.seed)?;
    let flat_band = phase_flatness(
        &plant.value,
        &report.params,
        spec.omega_gc,
        cfg.tune.flatness_half_decades,
    )
    .ok();
    if !report.converged {
        run.warn(format!(
            "tuning did not converge (largest scaled residual {:.3e}); reporting the best iterate",
            report.max_scaled_residual
        ));
    }
    run.write_json("controller.json", &report.params)?;
    run.write_json(
        "tune_report.json",
        &ReportDoc {
            plant: &plant.label,
            controller: kind,
            spec: SpecFile::from(&spec),
            initial,
            report: &report,
            flat_band,
        },
    )?;
    Ok(())
}
