//! `fzeta`: tube functions, fractal zeta functions, poles and spectra from the shell.
//!
//! Results go to stdout (or `--out`) as CSV; diagnostics are one line on stderr.
//! Exit codes: 0 success, 1 failed verification, 2 bad input or numerical
//! failure, 3 divergence, 4 unsupported combination.

mod commands;
mod descriptor;
mod job;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fzeta::Error;

use commands::{Options, Output, SpectralAction};

#[derive(Parser)]
#[command(name = "fzeta", version, about = "Fractal zeta functions, complex dimensions and spectra")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write results here instead of stdout.
    #[arg(long, global = true)]
    out: Option<String>,
    /// Size of the worker pool.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Tube volumes `|A_t|` on a geometric grid.
    Tube(Options),
    /// Distance zeta function of a set or relative drum.
    Zeta(Options),
    /// Evaluate a closed form.
    Form(Options),
    /// Minkowski dimensions, contents and classification.
    Dim(Options),
    /// Log-periodic fit of the tube function.
    Fit(Options),
    /// Locate poles of a closed form in a window.
    Poles(Options),
    /// Build a quasiperiodic assembly, optionally checking its zeta function.
    Qp(Options),
    /// Eigenvalues, spectral zeta, Weyl remainder and residue.
    Spectral {
        #[arg(value_enum)]
        action: SpectralAction,
        #[command(flatten)]
        options: Options,
    },
    /// Run the reproduction suite.
    Verify(Options),
    /// Run a JSON job file.
    Job {
        /// Path to the job file, or `-` for stdin.
        path: String,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Divergence(_) => 3,
        Error::Unsupported(_) | Error::NoClosedForm(_) => 4,
        _ => 2,
    }
}

fn diagnostic(e: &Error) -> String {
    match e {
        Error::IndependenceViolation { certificate } => {
            let c: Vec<String> = certificate.iter().map(i128::to_string).collect();
            format!("error: exponent vectors are rationally dependent; certificate [{}]", c.join(","))
        }
        other => format!("error: {other}"),
    }
}

fn dispatch(command: &str, action: Option<SpectralAction>, opts: &Options) -> fzeta::Result<Output> {
    match command {
        "tube" => commands::tube(opts),
        "zeta" => commands::zeta(opts),
        "form" => commands::form(opts),
        "dim" => commands::dim(opts),
        "fit" => commands::fit(opts),
        "poles" => commands::poles(opts),
        "qp" => commands::qp(opts),
        "spectral" => {
            commands::spectral(action.ok_or_else(|| Error::Parse("spectral needs an action".into()))?, opts)
        }
        "verify" => commands::run_verify(opts),
        other => Err(Error::Parse(format!("unknown command {other:?}"))),
    }
}

fn run(cli: Cli) -> Result<(Output, Option<String>), Error> {
    let read_job = |path: &str| -> fzeta::Result<job::Job> {
        let raw = if path == "-" {
            std::io::read_to_string(std::io::stdin())
        } else {
            std::fs::read_to_string(path)
        }
        .map_err(|e| Error::Parse(format!("cannot read job {path}: {e}")))?;
        job::parse(&raw)
    };
    let (name, action, opts, out) = match cli.command {
        Command::Tube(o) => ("tube".to_string(), None, o, cli.out),
        Command::Zeta(o) => ("zeta".into(), None, o, cli.out),
        Command::Form(o) => ("form".into(), None, o, cli.out),
        Command::Dim(o) => ("dim".into(), None, o, cli.out),
        Command::Fit(o) => ("fit".into(), None, o, cli.out),
        Command::Poles(o) => ("poles".into(), None, o, cli.out),
        Command::Qp(o) => ("qp".into(), None, o, cli.out),
        Command::Spectral { action, options } => ("spectral".into(), Some(action), options, cli.out),
        Command::Verify(o) => ("verify".into(), None, o, cli.out),
        Command::Job { path } => {
            let j = read_job(&path)?;
            (j.command, j.action, j.options, cli.out.or(j.output))
        }
    };
    Ok((dispatch(&name, action, &opts)?, out))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot size the worker pool: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok((output, path)) => {
            if let Some(path) = path {
                if let Err(e) = std::fs::write(&path, &output.text) {
                    eprintln!("error: cannot write {path}: {e}");
                    return ExitCode::from(2);
                }
            } else {
                print!("{}", output.text);
            }
            if output.ok {
                ExitCode::SUCCESS
            } else {
                eprintln!("error: verification failed");
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("{}", diagnostic(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}
