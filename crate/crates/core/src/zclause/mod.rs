//! Z-clauses `Λ ∥ Γ → Δ` and the syntactic analyses over them.

mod check;
mod purify;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::term::{Atom, Signature, Substitutable, Substitution, Term, Var};

pub use check::{
    abstraction_defs, ground_completions, is_preconstrained, preconstrained_witness, spsub_check,
    validate_az_problem, AzReport, AzViolation, SpsubResult, SpsubWitness,
};
pub use purify::{flatten, purify, separate_arithmetic, FreshNames};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ZClause {
    pub constraints: Vec<Atom>,
    pub ante: Vec<Atom>,
    pub succ: Vec<Atom>,
    pub origin: String,
}

impl ZClause {
    pub fn new(constraints: Vec<Atom>, ante: Vec<Atom>, succ: Vec<Atom>) -> Self {
        ZClause {
            constraints,
            ante,
            succ,
            origin: String::new(),
        }
    }

    pub fn with_origin(mut self, origin: impl Into<String>) -> Self {
        self.origin = origin.into();
        self
    }

    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.constraints
            .iter()
            .chain(self.ante.iter())
            .chain(self.succ.iter())
    }

    pub fn clause_atoms(&self) -> impl Iterator<Item = &Atom> {
        self.ante.iter().chain(self.succ.iter())
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for a in self.atoms() {
            a.collect_vars(&mut out);
        }
        out
    }

    pub fn int_vars(&self) -> BTreeSet<Var> {
        self.vars()
            .into_iter()
            .filter(|v| v.sort.is_int())
            .collect()
    }

    pub fn non_int_vars(&self) -> BTreeSet<Var> {
        self.vars()
            .into_iter()
            .filter(|v| !v.sort.is_int())
            .collect()
    }

    pub fn is_ground(&self) -> bool {
        self.atoms().all(Atom::is_ground)
    }

    pub fn contains_symbol(&self, name: &str) -> bool {
        self.atoms().any(|a| a.contains_symbol(name))
    }

    /// Grounding abstraction atoms `x ≐ t` of Λ, as (x, t) pairs.
    pub fn grounding_abstractions(&self) -> Vec<(Var, Term)> {
        self.constraints
            .iter()
            .filter_map(|a| a.as_grounding_abstraction())
            .map(|(x, t)| (x.clone(), t.clone()))
            .collect()
    }

    /// Every integer variable occurs in a grounding abstraction atom.
    pub fn is_z_closed(&self) -> bool {
        let covered: BTreeSet<Var> = self
            .grounding_abstractions()
            .into_iter()
            .map(|(x, _)| x)
            .collect();
        self.int_vars().iter().all(|v| covered.contains(v))
    }

    /// Z-closed with only integer variables.
    pub fn is_closed(&self) -> bool {
        self.is_z_closed() && self.non_int_vars().is_empty()
    }

    /// Every integer term of Γ → Δ is a variable and Λ is arithmetic.
    pub fn is_well_formed(&self) -> bool {
        fn pure(t: &Term) -> bool {
            if t.is_int() {
                return t.is_var();
            }
            t.args().iter().all(pure)
        }
        self.constraints.iter().all(Atom::is_arithmetic)
            && self
                .clause_atoms()
                .all(|a| !a.is_arithmetic() && a.terms().into_iter().all(pure))
    }

    pub fn normalize(&self) -> ZClause {
        ZClause {
            constraints: self.constraints.iter().map(Atom::normalize).collect(),
            ante: self.ante.iter().map(Atom::normalize).collect(),
            succ: self.succ.iter().map(Atom::normalize).collect(),
            origin: self.origin.clone(),
        }
    }

    /// Same clause up to the provenance tag.
    pub fn same_content(&self, other: &ZClause) -> bool {
        self.constraints == other.constraints && self.ante == other.ante && self.succ == other.succ
    }
}

impl Substitutable for ZClause {
    fn apply(&self, sigma: &Substitution) -> Self {
        ZClause {
            constraints: self.constraints.apply(sigma),
            ante: self.ante.apply(sigma),
            succ: self.succ.apply(sigma),
            origin: self.origin.clone(),
        }
    }
}

fn write_atoms(f: &mut fmt::Formatter<'_>, atoms: &[Atom]) -> fmt::Result {
    for (i, a) in atoms.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{a}")?;
    }
    Ok(())
}

impl fmt::Display for ZClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("⟨")?;
        write_atoms(f, &self.constraints)?;
        f.write_str(" ∥ ")?;
        write_atoms(f, &self.ante)?;
        f.write_str(" → ")?;
        write_atoms(f, &self.succ)?;
        f.write_str("⟩")
    }
}

impl fmt::Debug for ZClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")?;
        if !self.origin.is_empty() {
            write!(f, " [{}]", self.origin)?;
        }
        Ok(())
    }
}

/// `⟨Λ′, Λ ∥ Γ → Δ⟩`.
pub fn add_constraints(extra: &[Atom], c: &ZClause) -> ZClause {
    let mut constraints = extra.to_vec();
    constraints.extend(c.constraints.iter().cloned());
    ZClause {
        constraints,
        ante: c.ante.clone(),
        succ: c.succ.clone(),
        origin: c.origin.clone(),
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VarClassification {
    pub abs_vars: BTreeSet<Var>,
    pub ineq_vars: BTreeSet<Var>,
}

/// Computes AbsVar/IneqVar and appends `x ⩽ x` for every integer variable in
/// neither set.
pub fn classify_and_complete(c: &ZClause) -> (ZClause, VarClassification) {
    let mut class = classify(c);
    let mut out = c.clone();
    for v in c.int_vars() {
        if !class.abs_vars.contains(&v) && !class.ineq_vars.contains(&v) {
            out.constraints
                .push(Atom::leq(Term::var(v.clone()), Term::var(v.clone())));
            class.ineq_vars.insert(v);
        }
    }
    (out, class)
}

pub fn classify(c: &ZClause) -> VarClassification {
    let mut class = VarClassification::default();
    for a in &c.constraints {
        match a {
            Atom::Eq(l, r) => {
                for side in [l, r] {
                    if let Term::Var(x) = side {
                        if x.sort.is_int() {
                            class.abs_vars.insert(x.clone());
                        }
                    }
                }
            }
            Atom::Leq(l, r) => {
                for side in [l, r] {
                    if let Term::Var(x) = side {
                        class.ineq_vars.insert(x.clone());
                    }
                }
            }
            Atom::InImage(..) => {}
        }
    }
    class
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Theory {
    ArraysInt,
    Stratified,
    St2,
    Generic,
}

impl Theory {
    pub const ALL: [Theory; 4] = [
        Theory::ArraysInt,
        Theory::Stratified,
        Theory::St2,
        Theory::Generic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Theory::ArraysInt => "arrays-int",
            Theory::Stratified => "stratified",
            Theory::St2 => "st2",
            Theory::Generic => "generic",
        }
    }
}

impl fmt::Display for Theory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Theory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Theory::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::UnknownStrategy {
                kind: "theory",
                name: s.to_string(),
            })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Problem {
    pub signature: Signature,
    pub clauses: Vec<ZClause>,
    pub theory: Theory,
}

impl Problem {
    pub fn new(signature: Signature, clauses: Vec<ZClause>, theory: Theory) -> Self {
        Problem {
            signature,
            clauses,
            theory,
        }
    }

    /// Ground terms of the problem (integer-sorted subterms included).
    pub fn ground_subterms(&self) -> BTreeSet<Term> {
        let mut out = BTreeSet::new();
        for c in &self.clauses {
            for a in c.atoms() {
                for t in a.terms() {
                    t.visit(&mut |s| {
                        if s.is_ground() {
                            out.insert(s.clone());
                        }
                    });
                }
            }
        }
        out
    }

    pub fn contains_symbol(&self, name: &str) -> bool {
        self.signature.has_function(name) || self.clauses.iter().any(|c| c.contains_symbol(name))
    }

    pub fn instance_count(&self) -> usize {
        self.clauses.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::Sort;

    fn x() -> Term {
        Term::int_var("x")
    }
    fn y() -> Term {
        Term::int_var("y")
    }

    #[test]
    fn abstraction_and_inequality_variables() {
        let c = ZClause::new(
            vec![
                Atom::eq(x(), Term::int_const("a")),
                Atom::leq(y(), Term::int_const("b")),
            ],
            vec![],
            vec![],
        );
        let (_, class) = classify_and_complete(&c);
        assert_eq!(class.abs_vars, BTreeSet::from([Var::int("x")]));
        assert_eq!(class.ineq_vars, BTreeSet::from([Var::int("y")]));
    }

    #[test]
    fn unconstrained_variable_is_completed() {
        let s = Sort::new("S");
        let c = ZClause::new(
            vec![],
            vec![Atom::eq(
                Term::app("p", vec![Term::int_var("z")], s.clone()),
                Term::constant("tt", s),
            )],
            vec![],
        );
        let (out, class) = classify_and_complete(&c);
        assert_eq!(
            out.constraints,
            vec![Atom::leq(Term::int_var("z"), Term::int_var("z"))]
        );
        assert_eq!(class.ineq_vars, BTreeSet::from([Var::int("z")]));
    }

    #[test]
    fn classification_sets_overlap() {
        let c = ZClause::new(
            vec![
                Atom::eq(x(), Term::int_const("a")),
                Atom::leq(x(), Term::int_const("b")),
            ],
            vec![],
            vec![],
        );
        let (_, class) = classify_and_complete(&c);
        assert!(class.abs_vars.contains(&Var::int("x")));
        assert!(class.ineq_vars.contains(&Var::int("x")));
    }

    #[test]
    fn completion_is_idempotent() {
        let c = ZClause::new(
            vec![],
            vec![],
            vec![Atom::eq(
                Term::app("f", vec![x()], Sort::new("S")),
                Term::constant("c", Sort::new("S")),
            )],
        );
        let (once, _) = classify_and_complete(&c);
        let (twice, _) = classify_and_complete(&once);
        assert_eq!(once, twice);
    }

    #[test]
    fn add_constraints_prepends() {
        let elem = Sort::new("Elem");
        let c = ZClause::new(
            vec![Atom::leq(y(), Term::int_const("b"))],
            vec![],
            vec![Atom::eq(
                Term::app(
                    "select",
                    vec![Term::constant("a", Sort::new("Array")), y()],
                    elem.clone(),
                ),
                Term::constant("e2", elem),
            )],
        );
        let out = add_constraints(&[Atom::eq(y(), Term::int_const("i"))], &c);
        assert_eq!(out.constraints[0], Atom::eq(y(), Term::int_const("i")));
        assert_eq!(out.constraints[1], c.constraints[0]);
        assert_eq!(add_constraints(&[], &c), c);
    }

    #[test]
    fn z_closed_predicate() {
        let closed = ZClause::new(vec![Atom::eq(x(), Term::int_const("a"))], vec![], vec![]);
        assert!(closed.is_z_closed());
        let open = ZClause::new(vec![Atom::leq(x(), Term::int_const("a"))], vec![], vec![]);
        assert!(!open.is_z_closed());
    }

    #[test]
    fn theory_names_round_trip() {
        for t in Theory::ALL {
            assert_eq!(t.name().parse::<Theory>().unwrap(), t);
        }
        assert!("bogus".parse::<Theory>().is_err());
    }
}
