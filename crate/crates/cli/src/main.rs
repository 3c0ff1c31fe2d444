use clap::{Parser, Subcommand};
use rmz_cli::experiment::{self, ExperimentName, ExperimentSpec};
use rmz_cli::{output, parse_config};
use rmz_core::oracle::exact_resolved_energy;
use std::path::PathBuf;
use std::process::ExitCode;

const CONFIG_ERROR: u8 = 1;
const RUN_FAILURE: u8 = 2;

#[derive(Parser)]
#[command(name = "rmz", version, about = "Renormalized reduced models for Burgers and 3D Euler")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration file and write its CSV series.
    Run {
        config: PathBuf,
        /// Series file; defaults to the config path with a .csv extension.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment suite.
    Experiment {
        /// fig1-burgers, fig2-euler, fig3-coefficient-sweep or fig4-stability.
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact reference values.
    Oracle {
        #[command(subcommand)]
        which: Oracle,
    },
}

#[derive(Subcommand)]
enum Oracle {
    /// Resolved energy of the sine-data Burgers solution.
    Burgers {
        #[arg(long)]
        t: f64,
        #[arg(long)]
        n: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, out } => run(config, out),
        Command::Experiment { name, out } => run_experiment(&name, out),
        Command::Oracle {
            which: Oracle::Burgers { t, n },
        } => oracle(t, n),
    }
}

fn run(config: PathBuf, out: Option<PathBuf>) -> ExitCode {
    let text = match std::fs::read_to_string(&config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}: {e}", config.display());
            return ExitCode::from(CONFIG_ERROR);
        }
    };
    let cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", config.display());
            return ExitCode::from(CONFIG_ERROR);
        }
    };
    let result = match rmz_core::run(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: run failed: {e}");
            return ExitCode::from(RUN_FAILURE);
        }
    };
    let path = out.unwrap_or_else(|| config.with_extension("csv"));
    if let Err(e) = output::emit_csv(&result, &path) {
        eprintln!("error: {e}");
        return ExitCode::from(RUN_FAILURE);
    }
    eprintln!("{}: {}", path.display(), result.status.label());
    if let Some(c) = &result.coefficients {
        eprintln!("switch at t={:?}, coefficients {:?}", result.switch_time, c.values);
    }
    for note in &result.notes {
        eprintln!("note: {note}");
    }
    ExitCode::SUCCESS
}

fn run_experiment(name: &str, out: Option<PathBuf>) -> ExitCode {
    let name: ExperimentName = match name.parse() {
        Ok(n) => n,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(CONFIG_ERROR);
        }
    };
    let spec = ExperimentSpec::new(name, out.unwrap_or_else(|| experiment::default_out(name)));
    if let Err(e) = spec.validate() {
        eprintln!("error: {e}");
        return ExitCode::from(CONFIG_ERROR);
    }
    let report = experiment::run_experiment_with(&spec, |e| eprintln!("{}: {}", e.name, e.status));
    match report {
        Ok(report) => {
            if let Some(s) = report.slope {
                eprintln!("slope through origin: {s:.6}");
            }
            eprintln!("manifest: {}", report.manifest_path.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(RUN_FAILURE)
        }
    }
}

fn oracle(t: f64, n: usize) -> ExitCode {
    if n < 2 || n % 2 != 0 {
        eprintln!("error: N must be even, got {n}");
        return ExitCode::from(CONFIG_ERROR);
    }
    match exact_resolved_energy(t, n) {
        Ok(e) => {
            println!("t,energy");
            println!("{},{}", output::number(t), output::number(e.energy));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(CONFIG_ERROR)
        }
    }
}
