use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::thread;
use std::time::Duration;

use serde::Serialize;
use wait_timeout::ChildExt;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Sat,
    Unsat,
    Unknown,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Sat => "sat",
            Verdict::Unsat => "unsat",
            Verdict::Unknown => "unknown",
        }
    }
}

/// Reads the first status token of solver output.
pub fn parse_verdict(output: &str) -> Result<Verdict> {
    let token = output
        .split_whitespace()
        .next()
        .ok_or_else(|| Error::Solver("solver produced no output".into()))?;
    match token {
        "sat" => Ok(Verdict::Sat),
        "unsat" => Ok(Verdict::Unsat),
        "unknown" | "timeout" => Ok(Verdict::Unknown),
        other => Err(Error::Solver(format!("unexpected solver output `{other}`"))),
    }
}

/// Pipes `smtlib` to `command` (split on whitespace, e.g. `z3 -in`) and reads
/// its verdict. A run exceeding `timeout` is killed and reported as unknown.
pub fn solve_external(smtlib: &str, command: &str, timeout: Duration) -> Result<Verdict> {
    let mut parts = command.split_whitespace();
    let program = parts
        .next()
        .ok_or_else(|| Error::Solver("empty solver command".into()))?;
    let mut child = Command::new(program)
        .args(parts)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| Error::Solver(format!("cannot start `{program}`: {e}")))?;

    let mut stdin = child.stdin.take().expect("piped stdin");
    let input = smtlib.to_string();
    let writer = thread::spawn(move || {
        // A solver that exits early closes the pipe; that is not our error.
        let _ = stdin.write_all(input.as_bytes());
    });
    let mut stdout = child.stdout.take().expect("piped stdout");
    let reader = thread::spawn(move || {
        let mut s = String::new();
        let _ = stdout.read_to_string(&mut s);
        s
    });

    let status = child.wait_timeout(timeout)?;
    if status.is_none() {
        let _ = child.kill();
        let _ = child.wait();
        let _ = writer.join();
        let _ = reader.join();
        return Ok(Verdict::Unknown);
    }
    let _ = writer.join();
    let output = reader
        .join()
        .map_err(|_| Error::Solver("output reader panicked".into()))?;
    parse_verdict(&output)
}
