//! Experiment front end for `egr-core`: single runs, side-by-side
//! comparisons, convergence fits and the standard figure datasets, all
//! written as CSV with a `#` metadata header.
//!
//! Reservoir convention: dz/dt = +y·D(x, y), so K = H + z is constant along
//! exact solutions.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use clap::Parser;

pub mod args;
pub mod cache;
pub mod commands;
pub mod figures;
pub mod spec;
pub mod table;

use args::{Cli, Command};
use commands::{cmd_compare, cmd_convergence, cmd_run, Outcome};
use figures::{cmd_figure, FigureOptions};
use spec::{resolve_config, resolve_system, ReferenceSpec, RunSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numerical(egr_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
}

impl From<egr_core::Error> for CliError {
    fn from(e: egr_core::Error) -> Self {
        use egr_core::Error as E;
        fn numerical(e: &egr_core::Error) -> bool {
            match e {
                E::Divergence { .. } | E::NonFinite { .. } => true,
                E::StepFailed { source, .. } => numerical(source),
                _ => false,
            }
        }
        match e {
            e if numerical(&e) => CliError::Numerical(e),
            E::Io(io) => CliError::Io(io),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => EXIT_USAGE,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

/// Writes the table to `out` (or stdout) and the summary to stdout, or to
/// stderr when stdout carries the CSV.
fn emit(outcome: &Outcome, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            outcome.table.write_to(&mut w)?;
            w.flush()?;
            for line in &outcome.summary {
                println!("{line}");
            }
        }
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            outcome.table.write_to(&mut w)?;
            w.flush()?;
            for line in &outcome.summary {
                eprintln!("{line}");
            }
        }
    }
    Ok(())
}

fn finish(outcome: &Outcome, out: Option<&Path>) -> Result<i32, CliError> {
    emit(outcome, out)?;
    if outcome.stalled_steps > 0 {
        eprintln!("error: {} step(s) stalled above the rounding floor", outcome.stalled_steps);
        return Ok(EXIT_NUMERICAL);
    }
    Ok(EXIT_OK)
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Run(a) => {
            let spec = RunSpec::from_args(&a.system, a.integrator, &a.solver, &a.grid)?;
            finish(&cmd_run(&spec)?, spec.output.as_deref())
        }
        Command::Compare(a) => {
            let specs = a
                .integrators
                .iter()
                .map(|&m| RunSpec::from_args(&a.system, m, &a.solver, &a.grid))
                .collect::<Result<Vec<_>, _>>()?;
            finish(&cmd_compare(&specs)?, a.grid.out.as_deref())
        }
        Command::Convergence(a) => {
            let (model, ic) = resolve_system(&a.system)?;
            let largest = a.hs.iter().copied().fold(f64::NAN, f64::max);
            let cfg = resolve_config(largest, &a.solver)?;
            if !(a.t_end > 0.0) {
                return Err(CliError::Usage(format!("--T must be positive, got {}", a.t_end)));
            }
            let table = cmd_convergence(&model, a.integrator, ic, &cfg, &a.hs, a.t_end, a.solver.strict)?;
            print!("{}", table.render());
            Ok(EXIT_OK)
        }
        Command::Figure(a) => {
            let opts = FigureOptions {
                h: a.h,
                t_end: a.t_end,
                reference: ReferenceSpec::parse(&a.reference)?,
                tol: a.tol,
                max_iter: a.max_iter,
                cache_dir: Some(a.cache_dir.clone()),
            };
            finish(&cmd_figure(&a.id, &opts)?, a.out.as_deref())
        }
    }
}

/// Parses `args` (program name first) and runs the command; returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
