use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use delay_heom::cli::{self, CommandError, DEFAULT_TOLERANCE};

const EXIT_TOLERANCE: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "delay-heom",
    version,
    about = "Retarded photon exchange between two QNM cavities"
)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one model and write a CSV time series with a metadata sidecar.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Defaults to the config's `output` entry.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the density-matrix model with the wave-function solution.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tolerance: f64,
    },
    /// Print QNM frequencies, couplings and overlaps of two identical slabs.
    #[command(name = "qnm-info")]
    QnmInfo {
        /// Slab length in μm.
        #[arg(long = "L", allow_negative_numbers = true)]
        length_um: f64,
        #[arg(long = "eps-r", allow_negative_numbers = true)]
        eps_slab: f64,
        #[arg(long = "eps-b", allow_negative_numbers = true)]
        eps_background: f64,
        /// Centre-to-centre separation in μm.
        #[arg(long = "R", allow_negative_numbers = true)]
        separation_um: f64,
    },
}

fn fail(err: &CommandError) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(err.exit_code() as u8)
}

fn print_json(value: &impl serde::Serialize) {
    println!("{}", serde_json::to_string_pretty(value).expect("report serialises"));
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };

    match args.command {
        Command::Simulate { config, out } => {
            let result = cli::load_config(&config).and_then(|cfg| {
                let out = out
                    .or_else(|| cfg.output.clone())
                    .ok_or_else(|| CommandError::Usage("no output path: pass --out or set `output`".into()))?;
                cli::simulate(&cfg, &out)
            });
            match result {
                Ok(summary) => {
                    eprintln!("wrote {} rows to {}", summary.rows, summary.out.display());
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e),
            }
        }
        Command::Compare { config, tolerance } => {
            match cli::load_config(&config).and_then(|cfg| cli::compare(&cfg, tolerance)) {
                Ok(report) => {
                    print_json(&report);
                    if report.pass {
                        ExitCode::SUCCESS
                    } else {
                        eprintln!(
                            "max deviation {:e} exceeds tolerance {:e}",
                            report.max_deviation, report.tolerance
                        );
                        ExitCode::from(EXIT_TOLERANCE)
                    }
                }
                Err(e) => fail(&e),
            }
        }
        Command::QnmInfo {
            length_um,
            eps_slab,
            eps_background,
            separation_um,
        } => match cli::qnm_info(length_um, eps_slab, eps_background, separation_um) {
            Ok(info) => {
                print_json(&info);
                ExitCode::SUCCESS
            }
            Err(e) => fail(&e),
        },
    }
}
