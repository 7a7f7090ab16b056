use serde::Serialize;

use crate::grounder::{BoundSet, InstantiationTrace};
use crate::zclause::{Problem, ZClause};

use super::BaselineCount;

/// Clause counts through the pipeline, with the baseline next to ours.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct InstanceStats {
    pub input_clauses: usize,
    /// Instances produced by integer instantiation before escape simplification.
    pub stage1_instances: usize,
    pub stage1_simplified: usize,
    /// Final ground clauses, theory axiom instances included.
    pub stage2_instances: usize,
    pub bound_size: usize,
    pub extended_size: usize,
    pub index_set_size: usize,
    pub baseline_instances: usize,
    /// `|B′|^|IneqVar(C)|` for each clause entering integer instantiation.
    pub per_clause_blowup: Vec<usize>,
}

pub fn count_instances(
    input: &Problem,
    trace: &InstantiationTrace,
    simplified: &Problem,
    stage2: &[ZClause],
    b: &BoundSet,
    baseline: Option<&BaselineCount>,
) -> InstanceStats {
    InstanceStats {
        input_clauses: input.clauses.len(),
        stage1_instances: trace.entries.len(),
        stage1_simplified: simplified.clauses.len(),
        stage2_instances: stage2.len(),
        bound_size: b.len(),
        extended_size: b.len() + 1,
        index_set_size: baseline.map_or(0, |c| c.index_set.len()),
        baseline_instances: baseline.map_or(0, |c| c.total),
        per_clause_blowup: trace.full_counts.clone(),
    }
}
