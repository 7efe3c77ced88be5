mod args;
mod presets;
mod report;

use std::process::ExitCode;

use clap::Parser;

use ebin_core::field::GridSpec;

use args::{parse_grid, Cli, Command, Preset, RunArgs};
use presets::RunError;
use report::{render, write_all, Report};

const EXIT_CHECK: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn run(args: &RunArgs) -> Result<Report, RunError> {
    let preset = args.preset;
    let stray: Vec<&str> = args.given().into_iter().filter(|f| !preset.accepts().contains(f)).collect();
    if !stray.is_empty() {
        let list: Vec<String> = stray.iter().map(|f| format!("--{f}")).collect();
        return Err(RunError::Usage(format!(
            "preset {} does not take {}",
            preset.name(),
            list.join(", ")
        )));
    }
    let explicit = args.grid.as_deref().map(parse_grid).transpose().map_err(RunError::Usage)?;
    let dims = explicit.clone().unwrap_or_else(|| vec![64, 64]);
    let grid = GridSpec::unit_torus(dims.len(), dims.clone())?;
    let mut report = Report::new(preset.name(), &dims, args.seed);
    match preset {
        Preset::Eg2 => presets::eg2(args, &grid, &mut report)?,
        Preset::Eg3 => presets::eg3(args, &grid, &mut report)?,
        Preset::Tori => presets::tori(args, &grid, &mut report)?,
        Preset::Incompleteness => presets::incompleteness(args, &grid, &mut report)?,
        Preset::Conformal => presets::conformal(args, &grid, &mut report)?,
        Preset::Custom => presets::custom(args, explicit.as_ref().map(|_| &grid), &mut report)?,
    }
    Ok(report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Command::Run(args) = cli.command;
    let report = match run(&args) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            if let Some(p) = &args.field_out {
                let _ = std::fs::remove_file(p);
            }
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let docs = render(&report, args.format, args.out.as_deref());
    if let Err(e) = write_all(&docs) {
        eprintln!("error: writing output: {e}");
        if let Some(p) = &args.field_out {
            let _ = std::fs::remove_file(p);
        }
        return ExitCode::from(EXIT_USAGE);
    }
    for row in report.failures() {
        match row.limit {
            Some(l) => eprintln!("check failed: {} = {} exceeds {}", row.name, row.value, l),
            None => eprintln!("check failed: {}", row.name),
        }
    }
    if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_CHECK)
    }
}
