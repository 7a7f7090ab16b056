use std::fmt::Write as _;
use std::time::Instant;

use serde::Serialize;

use super::smtlib::GroundProblem;
use super::solver::Verdict;
use crate::error::{Error, Result};
use crate::grounder::{
    compute_bound, instantiate_integer_vars, minimize_bound, replay_check, simplify_escape,
    BoundMode, InstantiateOptions,
};
use crate::schemes::{
    count_instances, default_baselines, default_schemes, BaselineCount, InstanceStats,
};
use crate::term::stratification_levels;
use crate::zclause::{classify_and_complete, validate_az_problem, Problem, Theory};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PipelineOptions {
    /// Registry name of a baseline to count alongside, e.g. `bradley`.
    pub baseline: Option<String>,
    pub minimize_bound: bool,
    pub parallel: bool,
    pub fast_path: bool,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            baseline: None,
            minimize_bound: false,
            parallel: false,
            fast_path: true,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct PipelineReport {
    pub theory: String,
    /// Wall-clock microseconds per stage, in execution order.
    pub timings: Vec<(String, u128)>,
    pub stats: InstanceStats,
    pub bound: Vec<String>,
    pub escape: String,
    pub index_set: Vec<String>,
    pub warnings: Vec<String>,
    pub verdict: Option<Verdict>,
}

impl PipelineReport {
    /// One `key=value` line per field; lists are comma separated.
    pub fn to_key_value(&self) -> String {
        let s = &self.stats;
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(out, "{k}={v}");
        };
        line("theory", self.theory.clone());
        for (stage, us) in &self.timings {
            line(&format!("time_us.{stage}"), us.to_string());
        }
        line("input_clauses", s.input_clauses.to_string());
        line("stage1_instances", s.stage1_instances.to_string());
        line("stage1_simplified", s.stage1_simplified.to_string());
        line("stage2_instances", s.stage2_instances.to_string());
        line("bound_size", s.bound_size.to_string());
        line("extended_size", s.extended_size.to_string());
        line("bound", self.bound.join(","));
        line("escape", self.escape.clone());
        line("index_set_size", s.index_set_size.to_string());
        line("index_set", self.index_set.join(","));
        line("baseline_instances", s.baseline_instances.to_string());
        let blowup: Vec<String> = s.per_clause_blowup.iter().map(|n| n.to_string()).collect();
        line("per_clause_blowup", blowup.join(","));
        line("warnings", self.warnings.len().to_string());
        if let Some(v) = self.verdict {
            line("verdict", v.name().to_string());
        }
        out
    }
}

/// Rejects inputs outside the fragment their theory tag promises.
pub fn validate_problem(p: &Problem) -> Result<Vec<String>> {
    let mut warnings = Vec::new();
    match p.theory {
        Theory::ArraysInt => {
            let report = validate_az_problem(p);
            if !report.is_valid() {
                let msgs: Vec<String> = report
                    .violations
                    .iter()
                    .map(|v| {
                        format!(
                            "clause {} (condition {}): {}",
                            v.clause, v.bullet, v.message
                        )
                    })
                    .collect();
                return Err(Error::Validation(msgs.join("; ")));
            }
        }
        Theory::Stratified | Theory::St2 => {
            stratification_levels(&p.signature)?;
            let report = p.signature.validate();
            if !report.int_range_offenders.is_empty() {
                return Err(Error::Validation(format!(
                    "integer-valued functions with non-integer arguments: {}",
                    report.int_range_offenders.join(", ")
                )));
            }
        }
        Theory::Generic => warnings.push("generic theory: no completeness guarantee".into()),
    }
    Ok(warnings)
}

/// Validation, integer instantiation, escape simplification and the
/// theory's stage-two scheme, in that order.
pub fn run_pipeline(
    p: &Problem,
    opts: &PipelineOptions,
) -> Result<(GroundProblem, PipelineReport)> {
    let mut report = PipelineReport {
        theory: p.theory.to_string(),
        ..Default::default()
    };
    let mut clock = Instant::now();
    let mut lap = |report: &mut PipelineReport, stage: &str| {
        report
            .timings
            .push((stage.to_string(), clock.elapsed().as_micros()));
        clock = Instant::now();
    };

    report.warnings.extend(validate_problem(p)?);
    let mut input = p.clone();
    if matches!(p.theory, Theory::Stratified | Theory::St2) {
        for w in input.signature.ensure_inhabited() {
            report
                .warnings
                .push(format!("added witness constant `{w}`"));
        }
    }
    let schemes = default_schemes();
    let scheme = schemes.get(p.theory.name())?;
    let pre = scheme.preprocess(&input)?;
    lap(&mut report, "preprocess");

    let completed = Problem {
        clauses: pre
            .clauses
            .iter()
            .map(|c| classify_and_complete(c).0)
            .collect(),
        ..pre.clone()
    };
    let mode = if p.theory == Theory::ArraysInt {
        BoundMode::Arrays
    } else {
        BoundMode::Generic
    };
    let mut b = compute_bound(&completed, mode)?;
    if opts.minimize_bound {
        b = minimize_bound(&b, &completed);
    }
    report.warnings.extend(b.warnings.iter().cloned());
    lap(&mut report, "bound");

    let inst_opts = InstantiateOptions {
        fast_path: opts.fast_path,
        parallel: opts.parallel,
    };
    let (instances, trace) = instantiate_integer_vars(&completed, &b, inst_opts)?;
    replay_check(&completed, &instances, &trace)?;
    report.warnings.extend(trace.warnings.iter().cloned());
    let (simplified, _, warnings) = simplify_escape(&instances, &b);
    report.warnings.extend(warnings);
    lap(&mut report, "stage1");

    let stage2 = scheme.ground(&simplified, &b)?;
    let ground = GroundProblem::from_clauses(&simplified.signature, &stage2)?;
    lap(&mut report, "stage2");

    let baseline: Option<BaselineCount> = match &opts.baseline {
        Some(name) => Some(default_baselines().get(name)?.count(&pre)?),
        None => None,
    };
    report.stats = count_instances(p, &trace, &simplified, &stage2, &b, baseline.as_ref());
    report.bound = b.base().iter().map(|t| t.to_string()).collect();
    report.escape = b.escape().to_string();
    if let Some(c) = &baseline {
        report.index_set = c.index_set.iter().map(|t| t.to_string()).collect();
    }
    Ok((ground, report))
}
