//! `gfconv`: batch frontend for gradient integration, the GIS layer,
//! saliency evaluation and dataset perturbation.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod error;

use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "gfconv", version, about = "Green's function convolution toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate a gradient field (ex, ey) into a scalar field.
    Integrate {
        #[arg(long)]
        ex: PathBuf,
        #[arg(long)]
        ey: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the GIS layer on an N x 3n x H x W tensor file.
    Gis {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "grouped", value_parser = ["grouped", "interleaved"])]
        layout: String,
        /// Print wall-clock timing to stdout.
        #[arg(long)]
        time: bool,
    },
    /// Score saliency maps against ground-truth masks, matched by file stem.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        /// Optional valid-pixel masks; non-zero pixels are counted.
        #[arg(long)]
        mask: Option<PathBuf>,
        #[arg(long, default_value_t = 256, value_parser = parse_levels)]
        levels: usize,
        #[arg(long, default_value_t = 0.3)]
        beta2: f64,
        #[arg(long)]
        out: PathBuf,
        /// Directory for per-image threshold curves.
        #[arg(long)]
        curves: Option<PathBuf>,
    },
    /// Apply salt-and-pepper noise and/or darkening to every image in a directory.
    Perturb {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Fraction of pixel positions to corrupt.
        #[arg(long)]
        noise: Option<f64>,
        #[arg(long, default_value_t = 0, requires = "noise")]
        seed: u64,
        /// Brightness multiplier in [0, 1].
        #[arg(long)]
        darken: Option<f64>,
    },
    /// Reconstruct a disk from its edges and score the result.
    DemoDisk {
        #[arg(long)]
        size: usize,
        #[arg(long)]
        radius: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Time warm-cache Laplacian solves and the GIS layer.
    Bench {
        #[arg(long)]
        size: usize,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 10)]
        batch: usize,
    },
}

fn parse_levels(s: &str) -> Result<usize, String> {
    match s {
        "256" => Ok(256),
        "51" => Ok(51),
        _ => Err(format!("levels must be 256 or 51, got {s}")),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Integrate { ex, ey, out } => commands::integrate(&ex, &ey, &out),
        Command::Gis {
            input,
            out,
            layout,
            time,
        } => commands::gis(&input, &out, &layout, time),
        Command::Eval {
            pred,
            gt,
            mask,
            levels,
            beta2,
            out,
            curves,
        } => commands::eval(&commands::EvalArgs {
            pred,
            gt,
            mask,
            levels,
            beta2,
            out,
            curves,
        }),
        Command::Perturb {
            input,
            out,
            noise,
            seed,
            darken,
        } => commands::perturb(&input, &out, noise, seed, darken),
        Command::DemoDisk { size, radius, out } => commands::demo_disk(size, radius, &out),
        Command::Bench { size, count, batch } => commands::bench(size, count, batch),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let msg = e.to_string();
            eprintln!("error: {}", msg.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: "));
            return ExitCode::from(error::EXIT_USAGE);
        }
        Err(e) => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
