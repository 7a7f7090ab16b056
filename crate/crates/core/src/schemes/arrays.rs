use crate::error::{Error, Result};
use crate::grounder::{simplify_clause, BoundSet};
use crate::term::{normalize_numerals, Atom, Substitutable, Substitution, Term, Var};
use crate::zclause::{Problem, ZClause};

use super::InstantiationScheme;

/// A ground write `store(array, index, value)` found in the problem.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct StoreContext {
    pub array: Term,
    pub index: Term,
    pub value: Term,
}

fn resolver(c: &ZClause) -> Substitution {
    let mut sigma = Substitution::new();
    for (x, t) in c.grounding_abstractions() {
        if sigma.get(&x).is_none() {
            sigma
                .bind(x, t)
                .expect("abstraction atoms are integer-sorted");
        }
    }
    sigma
}

/// Store contexts in first-occurrence order, with integer variables replaced
/// by their grounding definitions.
pub fn store_contexts(p: &Problem) -> Result<Vec<StoreContext>> {
    let mut out: Vec<StoreContext> = Vec::new();
    for c in &p.clauses {
        let sigma = resolver(c);
        let mut found = Vec::new();
        for a in c.clause_atoms() {
            for t in a.terms() {
                t.visit(&mut |s| {
                    if s.head() == Some("store") && s.args().len() == 3 {
                        found.push(s.clone());
                    }
                });
            }
        }
        for s in found {
            let args: Vec<Term> = s.args().iter().map(|t| t.apply(&sigma)).collect();
            if !args[1].is_ground() {
                return Err(Error::MalformedBound(format!(
                    "store index `{}` of {c} has no grounding abstraction",
                    s.args()[1]
                )));
            }
            if !args[0].is_ground() || !args[2].is_ground() {
                return Err(Error::Unsupported(format!(
                    "store term `{s}` with non-ground array or value"
                )));
            }
            let ctx = StoreContext {
                array: args[0].clone(),
                index: normalize_numerals(&args[1]),
                value: args[2].clone(),
            };
            if !out.contains(&ctx) {
                out.push(ctx);
            }
        }
    }
    Ok(out)
}

/// Instances of (a1)–(a3) for one store context, with the inequality variable
/// of (a2)/(a3) ranging over `extended` and the escape simplification applied.
pub fn array_axioms(ctx: &StoreContext, extended: &[Term], chi: &Term) -> Vec<ZClause> {
    let z = Term::var(Var::int("z"));
    let elem = ctx.value.sort();
    let written = Term::app(
        "store",
        vec![ctx.array.clone(), z.clone(), ctx.value.clone()],
        ctx.array.sort(),
    );
    let select = |a: &Term, i: &Term| Term::app("select", vec![a.clone(), i.clone()], elem.clone());
    let def = Atom::eq(z.clone(), ctx.index.clone());

    let mut out = vec![ZClause::new(
        vec![def.clone()],
        vec![],
        vec![Atom::eq(select(&written, &z), ctx.value.clone())],
    )
    .with_origin("axiom:a1")];
    let frame = |s: &Term| Atom::eq(select(&written, s), select(&ctx.array, s));
    for s in extended {
        let below = Atom::leq(s.clone(), Term::offset(z.clone(), -1));
        let a2 =
            ZClause::new(vec![def.clone(), below], vec![], vec![frame(s)]).with_origin("axiom:a2");
        out.extend(simplify_clause(&a2, chi).0);
    }
    for s in extended {
        let above = Atom::leq(Term::offset(z.clone(), 1), s.clone());
        let a3 =
            ZClause::new(vec![def.clone(), above], vec![], vec![frame(s)]).with_origin("axiom:a3");
        out.extend(simplify_clause(&a3, chi).0);
    }
    out
}

/// Array axiom instances for every store context of `p`.
pub fn ground_array_axioms(p: &Problem, b: &BoundSet) -> Result<Vec<ZClause>> {
    let extended = b.extended();
    Ok(store_contexts(p)?
        .iter()
        .flat_map(|ctx| array_axioms(ctx, &extended, b.escape()))
        .collect())
}

pub struct ArraysScheme;

impl InstantiationScheme for ArraysScheme {
    fn name(&self) -> &'static str {
        "arrays-int"
    }

    fn description(&self) -> &'static str {
        "read-over-write axioms instantiated at each store and bound term"
    }

    fn ground(&self, p: &Problem, b: &BoundSet) -> Result<Vec<ZClause>> {
        if let Some(c) = p.clauses.iter().find(|c| !c.non_int_vars().is_empty()) {
            return Err(Error::Unsupported(format!(
                "array clause with non-integer variables: {c}"
            )));
        }
        let mut out = p.clauses.clone();
        out.extend(ground_array_axioms(p, b)?);
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{Signature, Sort};
    use crate::zclause::Theory;

    fn store_problem() -> Problem {
        let arr = Sort::new("Array");
        let x = Term::int_var("x");
        let c = ZClause::new(
            vec![Atom::eq(x.clone(), Term::int_const("t"))],
            vec![],
            vec![Atom::eq(
                Term::constant("b", arr.clone()),
                Term::app(
                    "store",
                    vec![
                        Term::constant("a", arr.clone()),
                        x,
                        Term::constant("e", Sort::new("Elem")),
                    ],
                    arr,
                ),
            )],
        );
        Problem::new(Signature::new(), vec![c], Theory::ArraysInt)
    }

    #[test]
    fn only_escape_keeps_upper_frame_axiom() {
        let p = store_problem();
        let b = BoundSet::new([], Term::int_const("chi")).unwrap();
        let ax = ground_array_axioms(&p, &b).unwrap();
        let origins: Vec<_> = ax.iter().map(|c| c.origin.as_str()).collect();
        assert_eq!(origins, vec!["axiom:a1", "axiom:a3"]);
        assert_eq!(ax[1].constraints.len(), 1);
    }

    #[test]
    fn one_frame_axiom_per_bound_term() {
        let p = store_problem();
        let t = Term::int_const("t");
        let b = BoundSet::new([t.clone(), Term::offset(t, -1)], Term::int_const("chi")).unwrap();
        let ax = ground_array_axioms(&p, &b).unwrap();
        // a1, two a2 (χ deleted), three a3.
        assert_eq!(ax.len(), 6);
        assert!(ax.iter().all(ZClause::is_z_closed));
    }

    #[test]
    fn no_store_no_axioms() {
        let p = Problem::new(Signature::new(), vec![], Theory::ArraysInt);
        let b = BoundSet::new([], Term::int_const("chi")).unwrap();
        assert!(ground_array_axioms(&p, &b).unwrap().is_empty());
    }
}
