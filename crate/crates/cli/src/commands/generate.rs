use fractune::io::write_data_csv;
use fractune::sysid::Sampling;

use crate::config::ProjectConfig;
use crate::error::{CliError, CliResult};
use crate::inputs::{load_system, synthesize};
use crate::output::Run;
use crate::{GenerateArgs, SamplingArg};

pub fn configure(cfg: &mut ProjectConfig, args: &GenerateArgs) -> CliResult<()> {
    if let Some(i) = args.input {
        cfg.generate.input = i;
    }
    if let Some(n) = args.noise {
        cfg.generate.noise = n;
    }
    if let Some(s) = args.sampling {
        cfg.generate.sampling = match s {
            SamplingArg::Zoh => Sampling::Zoh,
            SamplingArg::Tustin => Sampling::Tustin,
        };
    }
    Ok(())
}

/// Writes `data.csv`.
pub fn run(run: &mut Run, args: &GenerateArgs) -> CliResult<()> {
    let plant = load_system(&run.config, &args.plant)?;
    let rational = plant.value.to_rational().ok_or_else(|| {
        CliError::input(format!(
            "{}: data generation needs a rational plant",
            plant.label
        ))
    })?;
    let data = synthesize(&run.config, &rational)?;
    let text = format!(
        "# {}\n# plant {}\n{}",
        run.banner(),
        plant.label,
        write_data_csv(&data)
    );
    run.write_text("data.csv", &text)?;
    Ok(())
}
