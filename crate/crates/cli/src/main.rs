use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cislunar_cli::commands::{
    misalignment_csv, parse_area_mode, parse_delta_grid, parse_element_counts, snr_elements_csv,
    timeseries_csv, write_output,
};
use cislunar_cli::{dump_scenario, parse_scenario, CliError, LoadedScenario};
use cislunar_core::linkselect::Execution;

/// Earth → GEO relay surface → lunar orbit link simulator.
#[derive(Debug, Parser)]
#[command(name = "cislunar", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Link selection and budget at every sample time.
    Timeseries {
        #[command(flatten)]
        common: Common,
        /// Area allocation across elements, overriding the scenario file.
        #[arg(long, value_name = "fixed-total|fixed-element")]
        area_mode: Option<String>,
    },
    /// Aligned SNR against the number of surface elements.
    SnrElements {
        #[command(flatten)]
        common: Common,
        /// Reference epoch in seconds.
        #[arg(long, default_value_t = 0.0, value_name = "SECONDS")]
        at: f64,
        #[arg(long, value_name = "fixed-total|fixed-element")]
        area_mode: Option<String>,
        /// Comma-separated element counts.
        #[arg(long, default_value = "1,10,100,1000,10000", value_name = "LIST")]
        m_list: String,
    },
    /// SNR against a uniform phase error on every element.
    Misalign {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.0, value_name = "SECONDS")]
        at: f64,
        #[arg(long, value_name = "fixed-total|fixed-element")]
        area_mode: Option<String>,
        /// Phase error grid in degrees.
        #[arg(
            long,
            default_value = "-180:180:1",
            value_name = "START:STOP:STEP",
            allow_hyphen_values = true
        )]
        delta_grid: String,
    },
    /// Parse and check a scenario file.
    Validate {
        #[arg(long, value_name = "PATH")]
        scenario: PathBuf,
        /// Print the canonical form of the parsed scenario.
        #[arg(long)]
        dump: bool,
    },
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long, value_name = "PATH")]
    scenario: PathBuf,
    /// Output CSV; defaults to the scenario's run.output, then stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Timeseries { common, area_mode } => {
            let loaded = load(&common.scenario, area_mode.as_deref())?;
            let csv = timeseries_csv(&loaded.scenario, Execution::Parallel)?;
            emit(&common, &loaded, &csv)
        }
        Command::SnrElements {
            common,
            at,
            area_mode,
            m_list,
        } => {
            let counts = parse_element_counts(&m_list)?;
            let loaded = load(&common.scenario, area_mode.as_deref())?;
            let csv = snr_elements_csv(&loaded.scenario, &counts, at)?;
            emit(&common, &loaded, &csv)
        }
        Command::Misalign {
            common,
            at,
            area_mode,
            delta_grid,
        } => {
            let grid = parse_delta_grid(&delta_grid)?;
            let loaded = load(&common.scenario, area_mode.as_deref())?;
            let csv = misalignment_csv(&loaded.scenario, &grid, at)?;
            emit(&common, &loaded, &csv)
        }
        Command::Validate { scenario, dump } => {
            let loaded = parse_scenario(&scenario)?;
            if dump {
                print_stdout(&dump_scenario(&loaded.scenario, loaded.output.as_deref()))
            } else {
                let s = &loaded.scenario;
                eprintln!(
                    "{}: ok ({} GEO, {} LLO, {} steps)",
                    scenario.display(),
                    s.geo_elements.len(),
                    s.llo_elements.len(),
                    s.step_count()
                );
                Ok(())
            }
        }
    }
}

fn load(path: &Path, area_mode: Option<&str>) -> Result<LoadedScenario, CliError> {
    let mode = area_mode.map(parse_area_mode).transpose()?;
    let mut loaded = parse_scenario(path)?;
    if let Some(mode) = mode {
        loaded.scenario.ris = loaded.scenario.ris.with_area_mode(mode);
    }
    Ok(loaded)
}

fn emit(common: &Common, loaded: &LoadedScenario, csv: &str) -> Result<(), CliError> {
    match common.out.as_ref().or(loaded.output.as_ref()) {
        Some(path) => write_output(path, csv),
        None => print_stdout(csv),
    }
}

fn print_stdout(text: &str) -> Result<(), CliError> {
    let mut stdout = std::io::stdout().lock();
    stdout
        .write_all(text.as_bytes())
        .and_then(|()| stdout.flush())
        .map_err(|source| CliError::Output {
            path: PathBuf::from("<stdout>"),
            source,
        })
}
