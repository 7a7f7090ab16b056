use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::Context;
use clap::{Parser, ValueEnum};

use zground::frontend::{
    emit_smtlib, parse_problem, print_native, run_pipeline, solve_external, PipelineOptions,
    Verdict,
};
use zground::oracle::{bounded_decide, OracleVerdict};
use zground::zclause::{Problem, Theory};
use zground::Error;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Emit {
    Smtlib,
    Native,
}

/// Ground a set of Z-clauses and optionally solve the result.
#[derive(Parser, Debug)]
#[command(name = "ground", version)]
struct Cli {
    /// Input problem, native format or SMT-LIB2 subset.
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Theory tag; overrides the one in the file.
    #[arg(long)]
    theory: Option<Theory>,
    #[arg(long, value_enum, default_value = "smtlib")]
    emit: Emit,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also count the instances of a baseline procedure.
    #[arg(long)]
    baseline: Option<String>,
    /// Print the pipeline report as key=value lines on standard error.
    #[arg(long)]
    stats: bool,
    /// Write the pipeline report as JSON.
    #[arg(long, value_name = "FILE")]
    report_json: Option<PathBuf>,
    #[arg(long)]
    minimize_bound: bool,
    /// Instantiate clauses on the thread pool.
    #[arg(long)]
    parallel: bool,
    /// Solver command reading SMT-LIB2 on standard input, e.g. "z3 -in".
    #[arg(long)]
    solver_cmd: Option<String>,
    #[arg(long, default_value_t = 10_000, value_name = "MS")]
    timeout: u64,
    /// Decide the ground problem with the bounded oracle over [-N, N].
    #[arg(long, value_name = "N")]
    oracle_bound: Option<i64>,
}

const EXIT_USAGE: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_VALIDATION: u8 = 3;
const EXIT_SAT: u8 = 10;
const EXIT_UNSAT: u8 = 20;
const EXIT_UNKNOWN: u8 = 30;

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(
            Error::Syntax { .. } | Error::Sort(_) | Error::UnknownSymbol(_) | Error::Unsupported(_),
        ) => EXIT_PARSE,
        Some(
            Error::Validation(_)
            | Error::NotStratified(_)
            | Error::EmptySort(_)
            | Error::Unclassified(_)
            | Error::MalformedBound(_)
            | Error::ProfileMismatch(_)
            | Error::Precondition(_),
        ) => EXIT_VALIDATION,
        Some(Error::Solver(_)) => EXIT_UNKNOWN,
        _ => EXIT_USAGE,
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    let text = std::fs::read_to_string(&cli.input)
        .with_context(|| format!("reading {}", cli.input.display()))?;
    let mut problem: Problem = parse_problem(&text)?;
    if let Some(t) = cli.theory {
        problem.theory = t;
    }
    let opts = PipelineOptions {
        baseline: cli.baseline.clone(),
        minimize_bound: cli.minimize_bound,
        parallel: cli.parallel,
        ..Default::default()
    };
    let (ground, mut report) = run_pipeline(&problem, &opts)?;
    let smtlib = emit_smtlib(&ground)?;
    let output = match cli.emit {
        Emit::Smtlib => smtlib.clone(),
        Emit::Native => print_native(&Problem::new(
            ground.signature.clone(),
            ground.clauses.clone(),
            problem.theory,
        )),
    };
    match &cli.out {
        Some(path) => {
            std::fs::write(path, &output).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{output}"),
    }

    let mut code = 0;
    if let Some(cmd) = &cli.solver_cmd {
        let verdict = solve_external(&smtlib, cmd, Duration::from_millis(cli.timeout))?;
        report.verdict = Some(verdict);
        code = match verdict {
            Verdict::Sat => EXIT_SAT,
            Verdict::Unsat => EXIT_UNSAT,
            Verdict::Unknown => EXIT_UNKNOWN,
        };
    } else if let Some(k) = cli.oracle_bound {
        let g = Problem::new(
            ground.signature.clone(),
            ground.clauses.clone(),
            problem.theory,
        );
        let outcome = bounded_decide(&g, k, Some(&report.escape))?;
        report
            .warnings
            .push(format!("oracle: {}", outcome.verdict.name()));
        code = match outcome.verdict {
            OracleVerdict::Sat => EXIT_SAT,
            OracleVerdict::UnsatWithinBound => EXIT_UNSAT,
            OracleVerdict::Unknown => EXIT_UNKNOWN,
        };
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if cli.stats {
        eprint!("{}", report.to_key_value());
    }
    if let Some(path) = &cli.report_json {
        std::fs::write(path, serde_json::to_string_pretty(&report)?)?;
    }
    Ok(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
