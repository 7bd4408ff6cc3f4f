use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mixchan_cli::config::{Artifact, Scenario};
use mixchan_cli::presets::{self, Preset, PRESETS};
use mixchan_cli::run::{execute, VERSION};
use mixchan_cli::verify::{run_suite, Suite, DEFAULT_SEED};
use mixchan_cli::CliError;

#[derive(Debug, Parser)]
#[command(name = "mixchan", version, about = "Mixtures of quantum dynamical maps: information flow and non-Markovianity")]
struct Cli {
    /// Directory for CSV and JSON artifacts.
    #[arg(long, global = true, env = "MIXCHAN_OUT_DIR", default_value = "mixchan-out")]
    out_dir: PathBuf,

    /// Overrides the scenario seed (or the default verification seed).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Overrides the scenario time step.
    #[arg(long, global = true)]
    grid_step: Option<f64>,

    /// Overrides the artifacts requested by the scenario.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
    Both,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Runs a scenario file.
    Run { config: PathBuf },
    /// Runs a verification suite.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
    },
    /// Runs one compiled-in preset, or all of them.
    ReproducePaper { preset: Option<String> },
    /// Lists the compiled-in presets.
    ListPresets,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch(cli: &Cli) -> Result<ExitCode, CliError> {
    match &cli.command {
        Command::Run { config } => {
            let scenario = Scenario::from_file(config)?;
            run_one(cli, scenario, None)
        }
        Command::Verify { suite } => {
            let seed = cli.seed.unwrap_or(DEFAULT_SEED);
            let reports = run_suite(*suite, seed)?;
            let mut ok = true;
            for r in &reports {
                println!("{r}");
                ok &= r.passed();
            }
            let failed: usize = reports.iter().map(|r| r.failures()).sum();
            let total: usize = reports.iter().map(|r| r.checks.len()).sum();
            println!("total: {total} checks, {failed} failed");
            Ok(exit(ok))
        }
        Command::ReproducePaper { preset } => {
            let selected: Vec<&Preset> = match preset {
                Some(name) => vec![presets::find(name).ok_or_else(|| {
                    CliError::Usage(format!("unknown preset '{name}' (see list-presets)"))
                })?],
                None => PRESETS.iter().collect(),
            };
            let mut ok = true;
            for p in selected {
                ok &= run_one(cli, p.scenario()?, Some(p))? == ExitCode::SUCCESS;
            }
            Ok(exit(ok))
        }
        Command::ListPresets => {
            for p in PRESETS {
                println!("{:<26} {}", p.name, p.reproduces);
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn run_one(cli: &Cli, mut scenario: Scenario, preset: Option<&Preset>) -> Result<ExitCode, CliError> {
    scenario.override_with(cli.seed, cli.grid_step)?;
    let outputs = match cli.format {
        Some(Format::Csv) => vec![Artifact::Csv],
        Some(Format::Json) => vec![Artifact::Json],
        Some(Format::Both) => vec![Artifact::Csv, Artifact::Json],
        None if scenario.outputs.is_empty() => vec![Artifact::Json],
        None => scenario.outputs.clone(),
    };
    let artifacts = execute(&scenario, preset)?;
    let written = artifacts.write(Path::new(&cli.out_dir), &outputs)?;
    println!("{VERSION}: scenario {}", scenario.name);
    for c in &artifacts.checks {
        println!("  {c}");
    }
    for p in written {
        println!("  wrote {}", p.display());
    }
    if !artifacts.passed() {
        eprintln!("error: scenario {} failed one or more checks", scenario.name);
    }
    Ok(exit(artifacts.passed()))
}

fn exit(ok: bool) -> ExitCode {
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    }
}
