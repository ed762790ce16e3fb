//! `poisson-girsanov`: runs the verification suites and writes JSON reports.
//!
//! Exit status is 0 when every check passes, 1 when any check fails and 2 on
//! invalid arguments.

mod suites;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use poisson_girsanov::exact::parse_rational;
use poisson_girsanov::finite_oracle::OracleCheck;
use poisson_girsanov::mc::{threads_from_env, Functional};
use poisson_girsanov::moments::StepFunction;
use poisson_girsanov::report::{emit_plot_data, to_json_document, CheckReport, Status};
use poisson_girsanov::{Error, ExactRational};

#[derive(Parser)]
#[command(
    name = "poisson-girsanov",
    version,
    about = "Poisson-space identity and Girsanov checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Output {
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Exact Stirling and Charlier/Bell identities.
    Identities {
        #[arg(long, default_value_t = 18)]
        max_n: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Moments of a compensated step-function integral, by three formulas.
    Moments {
        /// JSON file `{"cells": [[c, sigma], ...]}`; `-` reads stdin.
        #[arg(long)]
        input: String,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Operator identities on the truncated cell space.
    Oracle {
        #[arg(long, default_value_t = 3)]
        cells: usize,
        /// Comma-separated rationals, one per cell.
        #[arg(long, default_value = "1,3/4,1/2")]
        sigma: String,
        /// Count truncation; defaults per check.
        #[arg(long)]
        trunc: Option<usize>,
        /// Comma-separated subset of duality,isometry,commutation,l221,p12,l12,t11.
        #[arg(long, default_value = "duality,isometry,commutation,l221,p12,l12,t11")]
        check: String,
        /// Repeat the sums in exact rational arithmetic (truncation <= 5).
        #[arg(long)]
        exact: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Monte Carlo Girsanov identity for the convex-hull transformation.
    Girsanov {
        #[arg(long, default_value_t = 2.0)]
        rate: f64,
        #[arg(long, default_value = "0.2,0", allow_hyphen_values = true)]
        u: String,
        #[arg(long, default_value_t = 200_000)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 128)]
        quad: usize,
        #[arg(long, default_value = "none")]
        functional: String,
        /// Worker count; overrides GIRSANOV_THREADS.
        #[arg(long)]
        threads: Option<usize>,
        /// Running-mean CSV path; defaults to the `--out` path with a `.csv` extension.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Include wall-clock runtime in the report.
        #[arg(long)]
        timing: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Sampled cyclic products of the transformation gradient.
    Nilpotence {
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 4)]
        k_max: usize,
        #[arg(long, default_value_t = 2.0)]
        rate: f64,
        #[arg(long, default_value = "0.2,0", allow_hyphen_values = true)]
        u: String,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Every suite with default parameters.
    All {
        #[arg(long)]
        quick: bool,
        #[arg(long)]
        threads: Option<usize>,
        #[command(flatten)]
        output: Output,
    },
}

fn parse_vector(s: &str) -> Result<[f64; 2], Error> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let bad = || Error::Parse {
        what: "vector ux,uy",
        input: s.to_string(),
    };
    if parts.len() != 2 {
        return Err(bad());
    }
    Ok([
        parts[0].parse().map_err(|_| bad())?,
        parts[1].parse().map_err(|_| bad())?,
    ])
}

fn parse_sigma(s: &str, cells: usize) -> Result<Vec<ExactRational>, Error> {
    let sigma = s
        .split(',')
        .map(|p| parse_rational(p.trim()))
        .collect::<Result<Vec<_>, _>>()?;
    if sigma.len() != cells {
        return Err(Error::Argument(format!(
            "--sigma has {} entries for {cells} cells",
            sigma.len()
        )));
    }
    Ok(sigma)
}

fn read_input(path: &str) -> Result<String, Error> {
    let res = if path == "-" {
        std::io::read_to_string(std::io::stdin())
    } else {
        std::fs::read_to_string(path)
    };
    res.map_err(|e| Error::Argument(format!("cannot read {path}: {e}")))
}

fn write_out(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text)
        .map_err(|e| Error::Argument(format!("cannot write {}: {e}", path.display())))
}

fn emit(command: &str, reports: &[CheckReport], out: &Output) -> Result<(), Error> {
    let doc = to_json_document(command, reports);
    match &out.out {
        Some(p) => write_out(p, &(doc + "\n")),
        None => {
            use std::io::Write;
            match writeln!(std::io::stdout().lock(), "{doc}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    Err(Error::Argument(format!("cannot write to stdout: {e}")))
                }
                _ => Ok(()),
            }
        }
    }
}

fn run(cli: Cli) -> Result<bool, Error> {
    let (name, reports, output) = match cli.command {
        Command::Identities { max_n, output } => ("identities", suites::identities(max_n)?, output),
        Command::Moments { input, n, output } => {
            let h = StepFunction::from_json(&read_input(&input)?)?;
            ("moments", suites::moments(&h, n, "")?, output)
        }
        Command::Oracle {
            cells,
            sigma,
            trunc,
            check,
            exact,
            output,
        } => {
            let sigma = parse_sigma(&sigma, cells)?;
            let checks = check
                .split(',')
                .map(OracleCheck::parse)
                .collect::<Result<Vec<_>, _>>()?;
            (
                "oracle",
                suites::oracle(sigma, trunc, &checks, exact)?,
                output,
            )
        }
        Command::Girsanov {
            rate,
            u,
            samples,
            seed,
            quad,
            functional,
            threads,
            csv,
            timing,
            output,
        } => {
            let args = suites::GirsanovArgs {
                rate,
                u: parse_vector(&u)?,
                samples,
                seed,
                quad,
                functional: Functional::parse(&functional)?,
                threads: threads.or_else(threads_from_env),
                timing,
            };
            let (reports, series) = suites::girsanov(&args)?;
            if let Some(p) = csv.or_else(|| output.out.as_ref().map(|o| o.with_extension("csv"))) {
                write_out(&p, &emit_plot_data(&series))?;
            }
            ("girsanov", reports, output)
        }
        Command::Nilpotence {
            samples,
            k_max,
            rate,
            u,
            seed,
            output,
        } => {
            let args = suites::NilpotenceArgs {
                samples,
                k_max,
                rate,
                u: parse_vector(&u)?,
                seed,
            };
            ("nilpotence", suites::nilpotence(&args)?, output)
        }
        Command::All {
            quick,
            threads,
            output,
        } => (
            "all",
            suites::all(quick, threads.or_else(threads_from_env))?,
            output,
        ),
    };
    emit(name, &reports, &output)?;
    let failed = reports.iter().filter(|r| r.status == Status::Fail).count();
    if failed > 0 {
        eprintln!("{failed} of {} checks failed", reports.len());
    }
    Ok(failed == 0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e @ (Error::Argument(_) | Error::Parse { .. } | Error::Size(_))) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
