use thiserror::Error;

use crate::term::{Sort, Symbol};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{line}:{column}: syntax error: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("sort error: {0}")]
    Sort(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(Symbol),
    #[error("unsupported construct: {0}")]
    Unsupported(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("signature is not stratified: cycle through {}", display_cycle(.0))]
    NotStratified(Vec<Sort>),
    #[error("sort `{0}` has no ground term")]
    EmptySort(Sort),
    #[error("substitution binds `{var}` of sort {expected} to a term of sort {found}")]
    SubstitutionSort {
        var: Symbol,
        expected: Sort,
        found: Sort,
    },
    #[error("clause `{0}` has not been classified")]
    Unclassified(String),
    #[error("malformed bound: {0}")]
    MalformedBound(String),
    #[error("St2 side condition violated: {0}")]
    ProfileMismatch(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error("unknown {kind} `{name}`")]
    UnknownStrategy { kind: &'static str, name: String },
    #[error("solver error: {0}")]
    Solver(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn display_cycle(cycle: &[Sort]) -> String {
    cycle
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join(" -> ")
}
