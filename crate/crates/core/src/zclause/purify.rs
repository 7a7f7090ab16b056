use std::collections::{BTreeMap, BTreeSet};

use super::{Problem, ZClause};
use crate::term::{normalize_numerals, Atom, Profile, Term, Var};

pub const SEED_ENV: &str = "Z_GROUNDER_SEED";

/// Deterministic supply of names `prefix!N` avoiding a set of taken names.
/// The counter starts at `Z_GROUNDER_SEED` (default 0).
#[derive(Clone, Debug)]
pub struct FreshNames {
    prefix: String,
    next: u64,
    taken: BTreeSet<String>,
}

impl FreshNames {
    pub fn seed() -> u64 {
        std::env::var(SEED_ENV)
            .ok()
            .and_then(|s| s.trim().parse().ok())
            .unwrap_or(0)
    }

    pub fn new(prefix: &str, taken: impl IntoIterator<Item = String>) -> Self {
        FreshNames {
            prefix: prefix.to_string(),
            next: Self::seed(),
            taken: taken.into_iter().collect(),
        }
    }

    pub fn next_name(&mut self) -> String {
        loop {
            let name = format!("{}!{}", self.prefix, self.next);
            self.next += 1;
            if self.taken.insert(name.clone()) {
                return name;
            }
        }
    }
}

/// Moves arithmetic atoms out of the clause part. Arithmetic atoms of Γ go to
/// Λ unchanged; `t ⩽ s` in Δ becomes `s+1 ⩽ t` in Λ; an integer equation in Δ
/// splits the clause in two, one per strict inequality.
pub fn separate_arithmetic(c: &ZClause) -> Vec<ZClause> {
    let mut base = ZClause {
        constraints: c.constraints.clone(),
        ante: Vec::new(),
        succ: Vec::new(),
        origin: c.origin.clone(),
    };
    for a in &c.ante {
        if a.is_arithmetic() {
            base.constraints.push(a.clone());
        } else {
            base.ante.push(a.clone());
        }
    }
    let mut splits: Vec<[Atom; 2]> = Vec::new();
    for a in &c.succ {
        match a {
            Atom::Leq(t, s) => base
                .constraints
                .push(Atom::leq(Term::offset(s.clone(), 1), t.clone())),
            Atom::Eq(t, s) if t.is_int() => splits.push([
                Atom::leq(Term::offset(s.clone(), 1), t.clone()),
                Atom::leq(Term::offset(t.clone(), 1), s.clone()),
            ]),
            other => base.succ.push(other.clone()),
        }
    }
    let mut out = vec![base];
    for pair in splits {
        out = out
            .into_iter()
            .flat_map(|c| {
                pair.iter().map(move |extra| {
                    let mut d = c.clone();
                    d.constraints.push(extra.clone());
                    d
                })
            })
            .collect();
    }
    out
}

/// Replaces every non-variable integer term of Γ → Δ by a fresh variable `u`
/// and records `u ≐ t` in Λ. Identical terms share one variable.
pub fn purify(c: &ZClause) -> ZClause {
    let taken = c.vars().into_iter().map(|v| v.name.to_string());
    let mut names = FreshNames::new("u", taken);
    let mut shared: BTreeMap<Term, Var> = BTreeMap::new();
    let mut added: Vec<Atom> = Vec::new();

    fn extract(
        t: &Term,
        names: &mut FreshNames,
        shared: &mut BTreeMap<Term, Var>,
        added: &mut Vec<Atom>,
    ) -> Term {
        if t.is_int() {
            if t.is_var() {
                return t.clone();
            }
            let n = normalize_numerals(t);
            if n.is_var() {
                return n;
            }
            let v = shared.entry(n.clone()).or_insert_with(|| {
                let v = Var::int(&names.next_name());
                added.push(Atom::eq(Term::var(v.clone()), n));
                v
            });
            return Term::var(v.clone());
        }
        match t {
            Term::App { head, args, sort } => Term::App {
                head: head.clone(),
                args: args
                    .iter()
                    .map(|a| extract(a, names, shared, added))
                    .collect(),
                sort: sort.clone(),
            },
            other => other.clone(),
        }
    }

    let mut side = |atoms: &[Atom]| -> Vec<Atom> {
        atoms
            .iter()
            .map(|a| a.map_terms(|t| extract(t, &mut names, &mut shared, &mut added)))
            .collect()
    };
    let ante = side(&c.ante);
    let succ = side(&c.succ);
    let mut constraints = c.constraints.clone();
    constraints.extend(added);
    ZClause {
        constraints,
        ante,
        succ,
        origin: c.origin.clone(),
    }
}

/// Names every proper, non-constant, non-integer ground subterm of Γ → Δ with
/// a fresh constant `k` and adds the unit clause `t ≐ k`. The result is purified.
pub fn flatten(p: &Problem) -> Problem {
    let mut signature = p.signature.clone();
    let taken = signature.functions().map(|(n, _)| n.to_string());
    let mut names = FreshNames::new("k", taken);
    let mut named: BTreeMap<Term, Term> = BTreeMap::new();
    let mut units: Vec<ZClause> = Vec::new();

    fn go(
        t: &Term,
        top: bool,
        sig: &mut crate::term::Signature,
        names: &mut FreshNames,
        named: &mut BTreeMap<Term, Term>,
        units: &mut Vec<ZClause>,
    ) -> Term {
        let Term::App { head, args, sort } = t else {
            return t.clone();
        };
        let rebuilt = Term::App {
            head: head.clone(),
            args: args
                .iter()
                .map(|a| go(a, false, sig, names, named, units))
                .collect(),
            sort: sort.clone(),
        };
        if top || args.is_empty() || rebuilt.is_int() || !rebuilt.is_ground() {
            return rebuilt;
        }
        if let Some(k) = named.get(&rebuilt) {
            return k.clone();
        }
        let name = names.next_name();
        sig.declare_function(&name, Profile::constant(sort.clone()))
            .expect("fresh constant over a declared sort");
        let k = Term::constant(&name, sort.clone());
        units.push(
            ZClause::new(vec![], vec![], vec![Atom::eq(rebuilt.clone(), k.clone())])
                .with_origin("flatten"),
        );
        named.insert(rebuilt, k.clone());
        k
    }

    let mut clauses = Vec::with_capacity(p.clauses.len());
    for c in &p.clauses {
        let mut side = |atoms: &[Atom]| -> Vec<Atom> {
            atoms
                .iter()
                .map(|a| {
                    a.map_terms(|t| go(t, true, &mut signature, &mut names, &mut named, &mut units))
                })
                .collect()
        };
        let ante = side(&c.ante);
        let succ = side(&c.succ);
        clauses.push(ZClause {
            constraints: c.constraints.clone(),
            ante,
            succ,
            origin: c.origin.clone(),
        });
    }
    clauses.extend(units);
    Problem {
        signature,
        clauses: clauses.iter().map(purify).collect(),
        theory: p.theory,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{Signature, Sort};
    use crate::zclause::Theory;

    fn arr() -> Sort {
        Sort::new("Array")
    }
    fn elem() -> Sort {
        Sort::new("Elem")
    }
    fn select(a: Term, i: Term) -> Term {
        Term::app("select", vec![a, i], elem())
    }
    fn store(a: Term, i: Term, e: Term) -> Term {
        Term::app("store", vec![a, i, e], arr())
    }

    fn array_sig() -> Signature {
        let mut sig = Signature::new();
        sig.declare_sort(arr());
        sig.declare_sort(elem());
        for c in ["a", "b"] {
            sig.declare_function(c, Profile::constant(arr())).unwrap();
        }
        for c in ["e", "d"] {
            sig.declare_function(c, Profile::constant(elem())).unwrap();
        }
        for c in ["i", "j"] {
            sig.declare_function(c, Profile::constant(Sort::int()))
                .unwrap();
        }
        sig.declare_function("select", Profile::new(vec![arr(), Sort::int()], elem()))
            .unwrap();
        sig.declare_function(
            "store",
            Profile::new(vec![arr(), Sort::int(), elem()], arr()),
        )
        .unwrap();
        sig
    }

    #[test]
    fn purify_offset_index() {
        let a = Term::constant("a", arr());
        let c = ZClause::new(
            vec![],
            vec![],
            vec![Atom::eq(
                select(a.clone(), Term::add(Term::int_const("i"), Term::num(1))),
                Term::constant("e", elem()),
            )],
        );
        let p = purify(&c);
        let u = Term::int_var("u!0");
        assert_eq!(
            p.constraints,
            vec![Atom::eq(u.clone(), Term::offset(Term::int_const("i"), 1))]
        );
        assert_eq!(
            p.succ,
            vec![Atom::eq(select(a, u), Term::constant("e", elem()))]
        );
        assert!(p.is_well_formed());
    }

    #[test]
    fn purify_without_integer_terms_is_identity() {
        let c = ZClause::new(
            vec![],
            vec![],
            vec![Atom::eq(
                Term::constant("a", arr()),
                Term::constant("b", arr()),
            )],
        );
        assert_eq!(purify(&c), c);
    }

    #[test]
    fn purify_shares_identical_terms() {
        let a = Term::constant("a", arr());
        let i = Term::int_const("i");
        let c = ZClause::new(
            vec![],
            vec![Atom::eq(
                select(a.clone(), i.clone()),
                Term::constant("e", elem()),
            )],
            vec![Atom::eq(select(a, i), Term::constant("d", elem()))],
        );
        assert_eq!(purify(&c).constraints.len(), 1);
    }

    #[test]
    fn purify_store_index_constant() {
        let c = ZClause::new(
            vec![],
            vec![],
            vec![Atom::eq(
                Term::constant("b", arr()),
                store(
                    Term::constant("a", arr()),
                    Term::int_const("u3"),
                    Term::constant("e1", elem()),
                ),
            )],
        );
        let p = purify(&c);
        let x = Term::int_var("u!0");
        assert_eq!(
            p.constraints,
            vec![Atom::eq(x.clone(), Term::int_const("u3"))]
        );
        assert_eq!(
            p.succ[0],
            Atom::eq(
                Term::constant("b", arr()),
                store(Term::constant("a", arr()), x, Term::constant("e1", elem()))
            )
        );
    }

    #[test]
    fn separate_moves_and_negates() {
        let x = Term::int_var("x");
        let c = ZClause::new(
            vec![],
            vec![Atom::leq(x.clone(), Term::int_const("a"))],
            vec![Atom::leq(x.clone(), Term::int_const("b"))],
        );
        let out = separate_arithmetic(&c);
        assert_eq!(out.len(), 1);
        assert_eq!(
            out[0].constraints,
            vec![
                Atom::leq(x.clone(), Term::int_const("a")),
                Atom::leq(Term::offset(Term::int_const("b"), 1), x),
            ]
        );
    }

    #[test]
    fn separate_splits_integer_equations() {
        let x = Term::int_var("x");
        let c = ZClause::new(vec![], vec![], vec![Atom::eq(x, Term::int_const("a"))]);
        assert_eq!(separate_arithmetic(&c).len(), 2);
    }

    #[test]
    fn flatten_nested_store() {
        let sig = array_sig();
        let a = Term::constant("a", arr());
        let c = ZClause::new(
            vec![],
            vec![],
            vec![Atom::eq(
                select(
                    store(a.clone(), Term::int_const("i"), Term::constant("e", elem())),
                    Term::int_const("j"),
                ),
                Term::constant("d", elem()),
            )],
        );
        let p = flatten(&Problem::new(sig, vec![c], Theory::ArraysInt));
        assert_eq!(p.clauses.len(), 2);
        let k = Term::constant("k!0", arr());
        assert!(p.signature.has_function("k!0"));
        assert_eq!(
            p.clauses[0].succ,
            vec![Atom::eq(
                select(k.clone(), Term::int_var("u!0")),
                Term::constant("d", elem())
            )]
        );
        assert_eq!(p.clauses[1].origin, "flatten");
        match &p.clauses[1].succ[0] {
            Atom::Eq(lhs, rhs) => {
                assert_eq!(lhs.head(), Some("store"));
                assert_eq!(rhs, &k);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn flatten_fixpoint_on_flat_problem() {
        let sig = array_sig();
        let c = ZClause::new(
            vec![],
            vec![],
            vec![Atom::eq(
                select(Term::constant("a", arr()), Term::int_var("x")),
                Term::constant("d", elem()),
            )],
        );
        let p = Problem::new(sig, vec![c], Theory::ArraysInt);
        assert_eq!(flatten(&p), p);
    }

    #[test]
    fn fresh_names_skip_taken() {
        let mut names = FreshNames::new("u", ["u!0".to_string()]);
        assert_eq!(names.next_name(), "u!1");
    }
}
