use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::Result;
use crate::term::{normalize_numerals, Atom, Term, Var};
use crate::zclause::{abstraction_defs, ground_completions, Problem, ZClause};

use super::arrays::store_contexts;
use super::Baseline;

/// Instance counts of the index-set method on one problem.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BaselineCount {
    /// `I` in canonical order; may be empty.
    #[serde(serialize_with = "display_terms")]
    pub index_set: Vec<Term>,
    /// `|I|^q` per clause, `q` the number of quantified index variables.
    pub per_clause: Vec<usize>,
    /// Read-over-write instances, `1 + 2|I|` per store context.
    pub axiom_instances: usize,
    pub total: usize,
}

fn display_terms<S: serde::Serializer>(
    terms: &[Term],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(terms.iter().map(|t| t.to_string()))
}

/// Integer variables with no grounding abstraction atom.
fn quantified(c: &ZClause) -> BTreeSet<Var> {
    let defs = abstraction_defs(c);
    c.int_vars()
        .into_iter()
        .filter(|v| !defs.contains_key(v))
        .collect()
}

/// Reconstructed index set: ground bounds on either side of quantified index
/// variables, ground select indices, `t − 1, t, t + 1` for each write index
/// `t`, and every `s` that a pair of unit constraints equates to a write index.
pub fn bradley_index_set(p: &Problem) -> Vec<Term> {
    let mut out: BTreeSet<Term> = BTreeSet::new();
    let mut writes: BTreeSet<Term> = BTreeSet::new();
    // (a, b) records the unit fact a ⩽ b.
    let mut facts: BTreeSet<(Term, Term)> = BTreeSet::new();
    for c in &p.clauses {
        let defs = abstraction_defs(c);
        let q = quantified(c);
        let is_q = |t: &Term| t.as_var().is_some_and(|v| q.contains(v));
        for a in &c.constraints {
            let Atom::Leq(l, r) = a else { continue };
            for (var_side, other) in [(l, r), (r, l)] {
                if is_q(var_side) && !is_q(other) {
                    out.extend(ground_completions(other, &defs).into_iter().map(|(g, _)| g));
                }
            }
        }
        for a in c.clause_atoms() {
            for t in a.terms() {
                t.visit(&mut |s| match s.head() {
                    Some("select") if s.args().len() == 2 => {
                        out.extend(
                            ground_completions(&s.args()[1], &defs)
                                .into_iter()
                                .map(|(g, _)| g),
                        );
                    }
                    Some("store") if s.args().len() == 3 => {
                        writes.extend(
                            ground_completions(&s.args()[1], &defs)
                                .into_iter()
                                .map(|(g, _)| g),
                        );
                    }
                    _ => {}
                });
            }
        }
        if c.ante.is_empty() && c.succ.is_empty() && c.constraints.len() == 1 {
            // ⟨l ⩽ r ∥ →⟩ asserts r ⩽ l − 1.
            if let Atom::Leq(l, r) = &c.constraints[0] {
                if l.is_ground() && r.is_ground() {
                    facts.insert((normalize_numerals(r), Term::offset(l.clone(), -1)));
                }
            }
        }
    }
    for w in &writes {
        out.insert(Term::offset(w.clone(), -1));
        out.insert(Term::offset(w.clone(), 1));
        out.insert(w.clone());
        for (a, b) in &facts {
            if a == w && facts.contains(&(b.clone(), w.clone())) {
                out.insert(b.clone());
            }
        }
    }
    out.into_iter().collect()
}

pub struct BradleyBaseline;

impl Baseline for BradleyBaseline {
    fn name(&self) -> &'static str {
        "bradley"
    }

    fn description(&self) -> &'static str {
        "array property fragment index-set instantiation"
    }

    fn count(&self, p: &Problem) -> Result<BaselineCount> {
        let index_set = bradley_index_set(p);
        // An empty index set is replaced by {0} when something must be instantiated.
        let width = index_set.len().max(1);
        let per_clause: Vec<usize> = p
            .clauses
            .iter()
            .map(|c| width.saturating_pow(quantified(c).len() as u32))
            .collect();
        let contexts = store_contexts(p)?.len();
        let axiom_instances = contexts * (1 + 2 * width);
        let total = per_clause
            .iter()
            .fold(axiom_instances, |acc, n| acc.saturating_add(*n));
        Ok(BaselineCount {
            index_set,
            per_clause,
            axiom_instances,
            total,
        })
    }
}
