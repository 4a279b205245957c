use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cltlb::driver::{check_sat, load_problem, parse_timeout, run_suite, Overrides, RunConfig};
use cltlb::encoder::ValuationMode;
use cltlb::error::DriverError;
use cltlb::formula::{ConstantsMode, Theory};

/// Bounded satisfiability checker for constraint LTL with past operators.
#[derive(Parser)]
#[command(name = "cltlb-check", version, args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    /// Problem file to check.
    file: Option<PathBuf>,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand)]
enum Command {
    /// Run every .cltl file of a directory and write a CSV report.
    Suite {
        dir: PathBuf,
        #[arg(long)]
        csv: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
}

#[derive(Args, Clone, Default)]
struct Flags {
    /// Largest bound tried.
    #[arg(long)]
    max_k: Option<u32>,
    /// ipc, int, nat, rat or real; overrides the file.
    #[arg(long)]
    theory: Option<String>,
    /// Solver command reading SMT-LIB from standard input.
    #[arg(long)]
    solver: Option<String>,
    /// Per-bound solver timeout in seconds.
    #[arg(long)]
    timeout: Option<String>,
    /// Compare only variables related by the formula (default).
    #[arg(long, conflicts_with = "strong")]
    weak: bool,
    /// Compare all variables with each other.
    #[arg(long)]
    strong: bool,
    /// occurring or interval.
    #[arg(long)]
    consts: Option<String>,
    /// Write each script to PATH; `{k}` is replaced by the bound.
    #[arg(long, value_name = "PATH")]
    emit_smt: Option<PathBuf>,
    /// Print the verdict as JSON.
    #[arg(long)]
    json: bool,
    /// Encode past terms directly instead of shifting them away.
    #[arg(long)]
    no_shift: bool,
    /// Omit the arithmetic-model existence constraints.
    #[arg(long)]
    no_existence: bool,
    /// Skip the pattern check for a variable against itself.
    #[arg(long)]
    no_self_pairs: bool,
    /// Probe this many bounds concurrently.
    #[arg(long)]
    parallel_k: Option<usize>,
}

impl Flags {
    fn overrides(&self) -> Result<Overrides, DriverError> {
        let bad = |key: &str, message: String| DriverError::BadOption { key: key.into(), message };
        let theory = match &self.theory {
            Some(t) => Some(Theory::parse(t).ok_or_else(|| bad("theory", format!("unknown theory `{t}`")))?),
            None => None,
        };
        let consts = match &self.consts {
            Some(c) => Some(ConstantsMode::parse(c).ok_or_else(|| bad("consts", format!("unknown mode `{c}`")))?),
            None => None,
        };
        let mode = if self.strong {
            Some(ValuationMode::Strong)
        } else if self.weak {
            Some(ValuationMode::Weak)
        } else {
            None
        };
        Ok(Overrides {
            max_k: self.max_k,
            theory,
            consts,
            mode,
            solver: self.solver.clone(),
            timeout: self.timeout.as_deref().map(|t| parse_timeout("timeout", t)).transpose()?,
            emit_smt: self.emit_smt.clone(),
            json: self.json.then_some(true),
            shift: self.no_shift.then_some(false),
            existence: self.no_existence.then_some(false),
            self_pairs: self.no_self_pairs.then_some(false),
            parallel_k: self.parallel_k,
        })
    }
}

fn check_file(file: PathBuf, flags: &Flags) -> Result<i32, DriverError> {
    let problem = load_problem(&file)?;
    let cfg = RunConfig::resolve(&problem.options, &flags.overrides()?)?;
    let verdict = check_sat(&problem, &cfg)?;
    let text = if cfg.json {
        format!("{}\n", serde_json::to_string_pretty(&verdict.to_json()).expect("json value"))
    } else {
        verdict.render_text()
    };
    // a closed pipe is not worth a panic
    let _ = std::io::stdout().write_all(text.as_bytes());
    Ok(verdict.exit_code())
}

fn suite(dir: PathBuf, csv: PathBuf, flags: &Flags) -> Result<i32, DriverError> {
    let report = run_suite(&dir, &flags.overrides()?, &csv)?;
    for row in &report.rows {
        let k = row.first_sat_k.map_or("-".to_string(), |k| k.to_string());
        println!("{:<32} {:<8} k={:<3} {:>8} ms  {}", row.file, row.verdict, k, row.wall_ms, row.status);
    }
    for (file, why) in &report.unreadable {
        eprintln!("unreadable: {file}: {why}");
    }
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Some(Command::Suite { dir, csv, flags }) => suite(dir, csv, &flags),
        None => match cli.file {
            Some(file) => check_file(file, &cli.flags),
            None => {
                eprintln!("error: a problem file or the `suite` subcommand is required");
                return ExitCode::from(2);
            }
        },
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
