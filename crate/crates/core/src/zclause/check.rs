use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{classify, Problem, ZClause};
use crate::term::{cartesian, normalize_numerals, Atom, Position, Term, Var};

/// Offending atom if `c` is not preconstrained.
pub fn preconstrained_witness(c: &ZClause) -> Option<Atom> {
    let abs = classify(c).abs_vars;
    let all_abs = |t: &Term| t.vars().iter().all(|v| abs.contains(v));
    c.constraints
        .iter()
        .find(|a| {
            if a.as_grounding_abstraction().is_some() {
                return false;
            }
            if a.vars().iter().all(|v| abs.contains(v)) {
                return false;
            }
            match a {
                Atom::Leq(l, r) => {
                    let ok = |t: &Term| t.is_var() || all_abs(t);
                    !((l.is_var() && ok(r)) || (r.is_var() && ok(l)))
                }
                _ => true,
            }
        })
        .cloned()
}

pub fn is_preconstrained(c: &ZClause) -> bool {
    preconstrained_witness(c).is_none()
}

/// How an atom `x ⩽ t` was matched against the bound set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpsubWitness {
    pub atom: String,
    /// (position, variable, replacement) per variable occurrence of `t`.
    pub replacements: Vec<(Position, String, String)>,
    pub bound_term: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SpsubResult {
    pub holds: bool,
    pub witnesses: Vec<SpsubWitness>,
    pub failures: Vec<String>,
}

/// Ground completions of `t` obtained by replacing every variable occurrence
/// with the right-hand side of one of its grounding abstraction atoms.
/// Returns the completions in normal form with the replacements used.
pub fn ground_completions(
    t: &Term,
    defs: &BTreeMap<Var, Vec<Term>>,
) -> Vec<(Term, Vec<(Position, Var, Term)>)> {
    let occurrences = t.var_positions();
    let mut columns: Vec<Vec<(Position, Var, Term)>> = Vec::with_capacity(occurrences.len());
    for (pos, v) in occurrences {
        let Some(options) = defs.get(&v) else {
            return Vec::new();
        };
        columns.push(
            options
                .iter()
                .map(|s| (pos.clone(), v.clone(), s.clone()))
                .collect(),
        );
    }
    let refs: Vec<&[(Position, Var, Term)]> = columns.iter().map(Vec::as_slice).collect();
    cartesian(&refs)
        .into_iter()
        .map(|choice| {
            let mut out = t.clone();
            for (pos, _, s) in &choice {
                out = out.replace_at(pos, s);
            }
            (normalize_numerals(&out), choice)
        })
        .collect()
}

/// Grounding abstraction definitions of a clause, grouped by variable.
pub fn abstraction_defs(c: &ZClause) -> BTreeMap<Var, Vec<Term>> {
    let mut defs: BTreeMap<Var, Vec<Term>> = BTreeMap::new();
    for (x, t) in c.grounding_abstractions() {
        let entry = defs.entry(x).or_default();
        let t = normalize_numerals(&t);
        if !entry.contains(&t) {
            entry.push(t);
        }
    }
    defs
}

/// `C ⊑ B`: every `x ⩽ t` of Λ has a ground completion of `t` in `B`.
/// Atoms whose bound is itself a variable impose no condition.
pub fn spsub_check(c: &ZClause, bound: &BTreeSet<Term>) -> SpsubResult {
    let normalized: BTreeSet<Term> = bound.iter().map(normalize_numerals).collect();
    let defs = abstraction_defs(c);
    let mut memo: BTreeMap<Term, Option<SpsubWitness>> = BTreeMap::new();
    let mut result = SpsubResult {
        holds: true,
        ..Default::default()
    };
    for a in &c.constraints {
        let Atom::Leq(Term::Var(_), t) = a else {
            continue;
        };
        if t.is_var() {
            continue;
        }
        let found = memo
            .entry(t.clone())
            .or_insert_with(|| {
                ground_completions(t, &defs)
                    .into_iter()
                    .find(|(g, _)| normalized.contains(g))
                    .map(|(g, choice)| SpsubWitness {
                        atom: String::new(),
                        replacements: choice
                            .into_iter()
                            .map(|(p, v, s)| (p, v.name.to_string(), s.to_string()))
                            .collect(),
                        bound_term: g.to_string(),
                    })
            })
            .clone();
        match found {
            Some(mut w) => {
                w.atom = a.to_string();
                result.witnesses.push(w);
            }
            None => {
                result.holds = false;
                result.failures.push(a.to_string());
            }
        }
    }
    result
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AzViolation {
    pub clause: usize,
    pub bullet: u8,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct AzReport {
    pub violations: Vec<AzViolation>,
}

impl AzReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the three syntactic conditions on A^Z-inequality problems:
/// only integer variables; non-ground non-abstraction arithmetic atoms are
/// `x ⩽ t` / `t ⩽ x` with `t` a variable or ground; variables under `store`
/// occur in a grounding abstraction atom of the same clause.
pub fn validate_az_problem(p: &Problem) -> AzReport {
    let mut report = AzReport::default();
    for (idx, c) in p.clauses.iter().enumerate() {
        let mut push = |bullet: u8, message: String| {
            report.violations.push(AzViolation {
                clause: idx,
                bullet,
                message,
            })
        };
        for v in c.non_int_vars() {
            push(
                1,
                format!("variable `{}` of sort {} in {}", v.name, v.sort, c),
            );
        }
        for a in &c.constraints {
            if a.is_ground() || a.as_abstraction().is_some() {
                continue;
            }
            let simple = |t: &Term| t.is_var() || t.is_ground();
            let ok = match a {
                Atom::Leq(l, r) => (l.is_var() && simple(r)) || (r.is_var() && simple(l)),
                _ => false,
            };
            if !ok {
                push(2, format!("arithmetic atom {a} in {c}"));
            }
        }
        let covered: BTreeSet<Var> = c
            .grounding_abstractions()
            .into_iter()
            .map(|(x, _)| x)
            .collect();
        let mut under_store = BTreeSet::new();
        for a in c.atoms() {
            for t in a.terms() {
                t.visit(&mut |s| {
                    if s.head() == Some("store") {
                        s.collect_vars(&mut under_store);
                    }
                });
            }
        }
        for v in under_store {
            if !covered.contains(&v) {
                push(
                    3,
                    format!(
                        "`{}` occurs under store without a grounding abstraction in {c}",
                        v.name
                    ),
                );
            }
        }
    }
    report
}
