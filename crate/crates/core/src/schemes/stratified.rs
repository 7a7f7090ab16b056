use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::grounder::BoundSet;
use crate::term::{cartesian, GroundUniverse, Substitutable, Substitution, Term, Var};
use crate::zclause::{Problem, ZClause};

use super::InstantiationScheme;

/// Integer terms used at integer argument positions: `B′` plus the right-hand
/// sides of every grounding abstraction atom, or `{0}` when both are empty.
pub fn integer_pool(p: &Problem, b: Option<&BoundSet>) -> Vec<Term> {
    let mut pool: BTreeSet<Term> = BTreeSet::new();
    if let Some(b) = b {
        pool.extend(b.extended());
    }
    for c in &p.clauses {
        pool.extend(c.grounding_abstractions().into_iter().map(|(_, t)| t));
    }
    if pool.is_empty() {
        pool.insert(Term::num(0));
    }
    pool.into_iter().collect()
}

/// Replaces every non-integer variable by every ground term of its sort.
pub fn ground_stratified(p: &Problem, int_pool: Vec<Term>) -> Result<Vec<ZClause>> {
    let universe = GroundUniverse::build(&p.signature, int_pool)?;
    let mut out = Vec::new();
    for c in &p.clauses {
        let vars: Vec<Var> = c.non_int_vars().into_iter().collect();
        let mut columns = Vec::with_capacity(vars.len());
        for v in &vars {
            let terms = universe.terms(&v.sort);
            if terms.is_empty() {
                return Err(Error::EmptySort(v.sort.clone()));
            }
            columns.push(terms);
        }
        for choice in cartesian(&columns) {
            let sigma = Substitution::from_pairs(vars.iter().cloned().zip(choice))?;
            out.push(c.apply(&sigma));
        }
    }
    Ok(out)
}

pub struct StratifiedScheme;

impl InstantiationScheme for StratifiedScheme {
    fn name(&self) -> &'static str {
        "stratified"
    }

    fn description(&self) -> &'static str {
        "enumeration of all ground terms of a stratified signature"
    }

    fn ground(&self, p: &Problem, b: &BoundSet) -> Result<Vec<ZClause>> {
        ground_stratified(p, integer_pool(p, Some(b)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{Atom, Profile, Signature, Sort};
    use crate::zclause::Theory;

    fn sig() -> Signature {
        let mut sig = Signature::new();
        for (s, names) in [("S", vec!["c", "d"]), ("T", vec!["e", "f", "g"])] {
            sig.declare_sort(Sort::new(s));
            for n in names {
                sig.declare_function(n, Profile::constant(Sort::new(s)))
                    .unwrap();
            }
        }
        sig.declare_function("p", Profile::new(vec![Sort::new("S")], Sort::new("T")))
            .unwrap();
        sig
    }

    #[test]
    fn product_of_sort_sizes() {
        let x = Term::var(Var::new("x", Sort::new("S")));
        let y = Term::var(Var::new("y", Sort::new("T")));
        let c = ZClause::new(
            vec![],
            vec![],
            vec![
                Atom::eq(x, Term::constant("c", Sort::new("S"))),
                Atom::eq(y.clone(), y),
            ],
        );
        let p = Problem::new(sig(), vec![c], Theory::Stratified);
        // T has e, f, g and p(c), p(d).
        let out = ground_stratified(&p, vec![]).unwrap();
        assert_eq!(out.len(), 2 * 5);
        assert!(out.iter().all(ZClause::is_ground));
    }

    #[test]
    fn ground_clause_is_singleton() {
        let c = ZClause::new(vec![], vec![], vec![]);
        let p = Problem::new(sig(), vec![c.clone()], Theory::Stratified);
        assert_eq!(ground_stratified(&p, vec![]).unwrap(), vec![c]);
    }

    #[test]
    fn empty_sort_is_reported() {
        let mut s = Signature::new();
        s.declare_sort(Sort::new("E"));
        let x = Term::var(Var::new("x", Sort::new("E")));
        let c = ZClause::new(vec![], vec![], vec![Atom::eq(x.clone(), x)]);
        let p = Problem::new(s, vec![c], Theory::Stratified);
        assert!(matches!(
            ground_stratified(&p, vec![]),
            Err(Error::EmptySort(_))
        ));
    }
}
