use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use onebit::bench::{
    emit_plotdata, read_records, run_experiment, run_props, summarize_records, write_props,
    write_records, write_summary, ExperimentConfig, RawConfig,
};
use onebit::Error;

#[derive(Parser)]
#[command(name = "onebit", version, about = "One-bit compressive sensing experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo sweep and write one CSV row per trial and algorithm.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
        /// Overrides `run.out`; records go to stdout when neither is set.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Median and 90th percentile errors per cell of a record CSV.
    Summarize {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// One `m,median_error` CSV per algorithm.
    Plotdata {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate the random-matrix properties listed in a props config.
    Props {
        #[arg(long)]
        config: PathBuf,
    },
}

enum Failure {
    Config(Error),
    Io(Error),
    Other(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) => Failure::Config(e),
            Error::Io(_) => Failure::Io(e),
            Error::Csv(ref c) if matches!(c.kind(), csv::ErrorKind::Io(_)) => Failure::Io(e),
            _ => Failure::Other(e),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.into())
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn read_config(path: &Path) -> Result<RawConfig, Failure> {
    let text = std::fs::read_to_string(path)?;
    Ok(RawConfig::parse(&text)?)
}

/// Dictionary parameters that cannot be built are configuration errors.
fn as_config(e: Error) -> Failure {
    match e {
        Error::InvalidParameter(_) | Error::DimensionMismatch { .. } => {
            Failure::Config(Error::Config(e.to_string()))
        }
        other => other.into(),
    }
}

fn run(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Run {
            config,
            threads,
            out,
        } => {
            let mut cfg: ExperimentConfig = read_config(&config)?.experiment()?;
            if threads.is_some() {
                cfg.threads = threads;
            }
            if out.is_some() {
                cfg.out = out;
            }
            cfg.dict.build().map_err(as_config)?;
            let records = run_experiment(&cfg).map_err(as_config)?;
            let mut w = open_output(cfg.out.as_deref())?;
            write_records(&mut w, &records)?;
            w.flush()?;
            if cfg.out.is_some() {
                write_summary(io::stdout().lock(), &summarize_records(&records))?;
            }
            Ok(())
        }
        Command::Summarize { input } => {
            let records = read_records(File::open(&input)?)?;
            write_summary(io::stdout().lock(), &summarize_records(&records))?;
            Ok(())
        }
        Command::Plotdata { input, out } => {
            let records = read_records(File::open(&input)?)?;
            for path in emit_plotdata(&records, &out)? {
                println!("{}", path.display());
            }
            Ok(())
        }
        Command::Props { config } => {
            let cfg = read_config(&config)?.props()?;
            cfg.dict.build().map_err(as_config)?;
            let rows = run_props(&cfg)?;
            let mut w = open_output(cfg.out.as_deref())?;
            write_props(&mut w, &rows)?;
            w.flush()?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("onebit: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Io(e)) => {
            eprintln!("onebit: {e}");
            ExitCode::from(3)
        }
        Err(Failure::Other(e)) => {
            eprintln!("onebit: {e}");
            ExitCode::from(1)
        }
    }
}
