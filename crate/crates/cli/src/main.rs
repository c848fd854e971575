//! `paramver`: run the tasks of a task file and print the report.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use paramver_core::runner::{run_path, RunOptions};

#[derive(Parser, Debug)]
#[command(name = "paramver", version, about = "Constraint generation and invariant checking for parametric systems")]
struct Cli {
    /// Task file (YAML).
    task_file: PathBuf,
    /// Run only the named task (repeatable).
    #[arg(long = "task", value_name = "NAME")]
    tasks: Vec<String>,
    /// Add the purified, instantiated problems to the Extra block.
    #[arg(long)]
    dump_reduction: bool,
    /// Write the reduced ground problems as SMT-LIB2 scripts into DIR.
    #[arg(long, value_name = "DIR")]
    dump_smtlib: Option<PathBuf>,
    /// File with `;`-separated ground terms added to the instantiation set.
    #[arg(long, value_name = "FILE")]
    seed_closure: Option<PathBuf>,
    /// Bound on the number of case splits during elimination.
    #[arg(long, value_name = "N")]
    max_cases: Option<usize>,
    /// Parameter assumptions added to every task, e.g. "lf >= _0; ea > _0".
    #[arg(long, value_name = "ATOMS")]
    assume: Vec<String>,
    /// Also write the report to FILE.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Run independent tasks and elimination cases in parallel.
    #[arg(long)]
    parallel: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let seed_closure = match &cli.seed_closure {
        None => None,
        Some(p) => match std::fs::read_to_string(p) {
            Ok(t) => Some(t),
            Err(e) => {
                eprintln!("error: {}: {e}", p.display());
                return ExitCode::from(2);
            }
        },
    };
    let opts = RunOptions {
        tasks: (!cli.tasks.is_empty()).then(|| cli.tasks.clone()),
        dump_reduction: cli.dump_reduction,
        dump_smtlib: cli.dump_smtlib.clone(),
        seed_closure,
        max_cases: cli.max_cases,
        assume: cli.assume.clone(),
        parallel: cli.parallel,
    };
    let outcome = run_path(&cli.task_file, &opts);
    for d in &outcome.diagnostics {
        eprintln!("{d}");
    }
    print!("{}", outcome.report);
    if let Some(out) = &cli.out {
        if outcome.exit_code != 2 {
            if let Err(e) = std::fs::write(out, &outcome.report) {
                eprintln!("error: {}: {e}", out.display());
                return ExitCode::from(1);
            }
        }
    }
    ExitCode::from(outcome.exit_code as u8)
}
