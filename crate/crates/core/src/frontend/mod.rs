//! Input formats, SMT-LIB2 output, the end-to-end pipeline and solver calls.

mod native;
mod pipeline;
mod sexpr;
mod smtlib;
mod solver;

pub use native::{parse_native, print_native};
pub use pipeline::{run_pipeline, validate_problem, PipelineOptions, PipelineReport};
pub use sexpr::{parse_sexprs, SExpr};
pub use smtlib::{emit_smtlib, parse_smtlib, GroundProblem, Logic};
pub use solver::{parse_verdict, solve_external, Verdict};

use crate::error::Result;
use crate::zclause::Problem;

/// Reads either format: SMT-LIB2 when the text uses SMT-LIB commands,
/// otherwise the native format.
pub fn parse_problem(text: &str) -> Result<Problem> {
    let smt = parse_sexprs(text)?.iter().any(|e| {
        matches!(
            e.head(),
            Some("assert" | "declare-fun" | "declare-sort" | "declare-const" | "set-logic")
        )
    });
    if smt {
        parse_smtlib(text)
    } else {
        parse_native(text)
    }
}
