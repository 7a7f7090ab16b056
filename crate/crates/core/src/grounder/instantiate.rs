use rayon::prelude::*;

use super::{simplify_clause, BoundSet};
use crate::error::{Error, Result};
use crate::term::{cartesian, Atom, Term, Var};
use crate::zclause::{add_constraints, classify, is_preconstrained, spsub_check, Problem, ZClause};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct InstantiateOptions {
    /// Skip instances whose constraints the escape simplification would make false.
    pub fast_path: bool,
    /// Run the per-clause work on the rayon pool.
    pub parallel: bool,
}

/// One output clause: the source clause and the values chosen for its
/// inequality variables, in variable order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEntry {
    pub source: usize,
    pub bindings: Vec<(Var, Term)>,
}

impl TraceEntry {
    pub fn bdef(&self) -> Vec<Atom> {
        self.bindings
            .iter()
            .map(|(x, s)| Atom::eq(Term::var(x.clone()), s.clone()))
            .collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InstantiationTrace {
    pub entries: Vec<TraceEntry>,
    /// `|B′|^|IneqVar(C)|` per source clause.
    pub full_counts: Vec<usize>,
    pub warnings: Vec<String>,
}

/// `{⟨Λ′, C⟩ : C ∈ P, Λ′ a B′-definition of C}`. Every integer variable of
/// every clause must already be classified.
pub fn instantiate_integer_vars(
    p: &Problem,
    b: &BoundSet,
    opts: InstantiateOptions,
) -> Result<(Problem, InstantiationTrace)> {
    let extended = b.extended();
    let bound_set = b.as_set();

    let work =
        |(idx, c): (usize, &ZClause)| -> Result<(Vec<(ZClause, TraceEntry)>, usize, Vec<String>)> {
            let class = classify(c);
            let mut warnings = Vec::new();
            if let Some(v) = c
                .int_vars()
                .into_iter()
                .find(|v| !class.abs_vars.contains(v) && !class.ineq_vars.contains(v))
            {
                return Err(Error::Unclassified(format!("{c} (variable `{}`)", v.name)));
            }
            if !is_preconstrained(c) {
                warnings.push(format!("clause {idx} is not preconstrained: {c}"));
            }
            let sp = spsub_check(c, &bound_set);
            if !sp.holds {
                warnings.push(format!(
                    "clause {idx} is not covered by the bound set at {}",
                    sp.failures.join(", ")
                ));
            }
            let vars: Vec<Var> = class.ineq_vars.into_iter().collect();
            let columns: Vec<&[Term]> = vars.iter().map(|_| extended.as_slice()).collect();
            let full = extended
                .len()
                .checked_pow(vars.len() as u32)
                .unwrap_or(usize::MAX);
            let mut out = Vec::new();
            for choice in cartesian(&columns) {
                let entry = TraceEntry {
                    source: idx,
                    bindings: vars.iter().cloned().zip(choice).collect(),
                };
                let bdef = entry.bdef();
                if opts.fast_path {
                    let probe = ZClause::new(
                        bdef.iter().chain(c.constraints.iter()).cloned().collect(),
                        vec![],
                        vec![],
                    );
                    if simplify_clause(&probe, b.escape()).0.is_none() {
                        continue;
                    }
                }
                out.push((add_constraints(&bdef, c), entry));
            }
            Ok((out, full, warnings))
        };

    let indexed: Vec<(usize, &ZClause)> = p.clauses.iter().enumerate().collect();
    let results: Vec<_> = if opts.parallel {
        indexed.into_par_iter().map(work).collect()
    } else {
        indexed.into_iter().map(work).collect()
    };

    let mut clauses = Vec::new();
    let mut trace = InstantiationTrace::default();
    for r in results {
        let (instances, full, warnings) = r?;
        trace.full_counts.push(full);
        trace.warnings.extend(warnings);
        for (c, e) in instances {
            clauses.push(c);
            trace.entries.push(e);
        }
    }
    Ok((
        Problem {
            signature: p.signature.clone(),
            clauses,
            theory: p.theory,
        },
        trace,
    ))
}

/// Re-derives every output clause from its source and traced bindings.
pub fn replay_check(src: &Problem, out: &Problem, trace: &InstantiationTrace) -> Result<()> {
    if out.clauses.len() != trace.entries.len() {
        return Err(Error::Invariant(format!(
            "{} output clauses but {} trace entries",
            out.clauses.len(),
            trace.entries.len()
        )));
    }
    for (i, (c, e)) in out.clauses.iter().zip(&trace.entries).enumerate() {
        let source = src.clauses.get(e.source).ok_or_else(|| {
            Error::Invariant(format!("trace entry {i} names missing source {}", e.source))
        })?;
        let rebuilt = add_constraints(&e.bdef(), source).normalize();
        if !rebuilt.same_content(&c.normalize()) {
            return Err(Error::Invariant(format!(
                "replay of instance {i} gives {rebuilt}, expected {c}"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{Signature, Sort};
    use crate::zclause::Theory;

    fn bound(names: &[&str]) -> BoundSet {
        BoundSet::new(
            names.iter().map(|n| Term::int_const(n)),
            Term::int_const("chi"),
        )
        .unwrap()
    }

    fn problem(clauses: Vec<ZClause>) -> Problem {
        Problem::new(Signature::new(), clauses, Theory::Generic)
    }

    #[test]
    fn clause_without_inequality_variables_is_kept() {
        let c = ZClause::new(
            vec![Atom::eq(Term::int_var("x"), Term::int_const("a"))],
            vec![],
            vec![],
        );
        let (out, trace) = instantiate_integer_vars(
            &problem(vec![c.clone()]),
            &bound(&["a"]),
            Default::default(),
        )
        .unwrap();
        assert_eq!(out.clauses, vec![c]);
        assert_eq!(trace.full_counts, vec![1]);
    }

    #[test]
    fn count_is_power_of_extended_bound() {
        let x = Term::int_var("x");
        let y = Term::int_var("y");
        let c = ZClause::new(
            vec![
                Atom::leq(x.clone(), Term::int_const("a")),
                Atom::leq(y.clone(), Term::int_const("b")),
            ],
            vec![],
            vec![],
        );
        let p = problem(vec![c]);
        let b = bound(&["a", "b"]);
        let (out, trace) = instantiate_integer_vars(&p, &b, Default::default()).unwrap();
        assert_eq!(out.clauses.len(), 9);
        assert_eq!(trace.full_counts, vec![9]);
        replay_check(&p, &out, &trace).unwrap();
        assert!(out.clauses.iter().all(ZClause::is_z_closed));
    }

    #[test]
    fn only_escape_gives_single_instance() {
        let c = ZClause::new(
            vec![Atom::leq(Term::int_var("x"), Term::int_var("x"))],
            vec![],
            vec![],
        );
        let (out, _) =
            instantiate_integer_vars(&problem(vec![c]), &bound(&[]), Default::default()).unwrap();
        assert_eq!(out.clauses.len(), 1);
    }

    #[test]
    fn unclassified_variable_is_rejected() {
        let s = Sort::new("S");
        let c = ZClause::new(
            vec![],
            vec![],
            vec![Atom::eq(
                Term::app("f", vec![Term::int_var("z")], s.clone()),
                Term::constant("c", s),
            )],
        );
        assert!(matches!(
            instantiate_integer_vars(&problem(vec![c]), &bound(&[]), Default::default()),
            Err(Error::Unclassified(_))
        ));
    }

    #[test]
    fn fast_path_matches_simplified_output() {
        let x = Term::int_var("x");
        let c = ZClause::new(
            vec![
                Atom::leq(Term::int_const("l"), x.clone()),
                Atom::leq(x.clone(), Term::int_const("u")),
            ],
            vec![],
            vec![],
        );
        let p = problem(vec![c]);
        let b = bound(&["u"]);
        let slow = instantiate_integer_vars(&p, &b, Default::default())
            .unwrap()
            .0;
        let fast = instantiate_integer_vars(
            &p,
            &b,
            InstantiateOptions {
                fast_path: true,
                parallel: true,
            },
        )
        .unwrap()
        .0;
        let (simplified, _, _) = super::super::simplify_escape(&slow, &b);
        let (fast_simplified, _, _) = super::super::simplify_escape(&fast, &b);
        assert_eq!(simplified, fast_simplified);
        assert_eq!(fast.clauses.len(), 1);
    }
}
