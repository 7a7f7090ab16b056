use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::grounder::BoundSet;
use crate::term::{Atom, Substitutable, Substitution, Term};
use crate::zclause::{Problem, ZClause};

use super::InstantiationScheme;

/// One of the two admissibility conditions, on a concrete input.
#[derive(Clone, Debug)]
pub enum Probe {
    /// `γ(S) ⊆ γ(S ∪ {extra})`.
    Monotonic { extra: ZClause },
    /// `γ(S ∪ {t ≐ s}) = γ(S) ∪ {t ≐ s}` for ground `t`, `s` disc from `S`.
    DiscEquality { t: Term, s: Term },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbeOutcome {
    pub passed: bool,
    pub counterexample: Option<ZClause>,
}

/// Matches `pattern` against `target`, extending `sigma`.
fn match_into(pattern: &Term, target: &Term, sigma: &mut BTreeMap<crate::term::Var, Term>) -> bool {
    match pattern {
        Term::Var(v) => {
            if v.sort != target.sort() {
                return false;
            }
            match sigma.get(v) {
                Some(bound) => bound == target,
                None => {
                    sigma.insert(v.clone(), target.clone());
                    true
                }
            }
        }
        Term::Num(_) => pattern == target,
        Term::App { head, args, .. } => {
            target.head() == Some(head.as_ref())
                && target.args().len() == args.len()
                && args
                    .iter()
                    .zip(target.args())
                    .all(|(p, t)| match_into(p, t, sigma))
        }
    }
}

/// A substitution `σ` with `pattern σ = target`, if one exists.
pub fn matches(pattern: &Term, target: &Term) -> Option<Substitution> {
    let mut sigma = BTreeMap::new();
    if match_into(pattern, target, &mut sigma) {
        Substitution::from_pairs(sigma).ok()
    } else {
        None
    }
}

fn non_variable_subterms(p: &Problem) -> BTreeSet<Term> {
    let mut out = BTreeSet::new();
    for c in &p.clauses {
        for a in c.atoms() {
            for t in a.terms() {
                t.visit(&mut |s| {
                    if !s.is_var() {
                        out.insert(s.clone());
                    }
                });
            }
        }
    }
    out
}

/// A ground `t` is disc from `S` when every non-variable term of `S` that
/// unifies with `t` is `t` itself.
pub fn is_disc(t: &Term, s: &Problem) -> bool {
    t.is_ground()
        && non_variable_subterms(s)
            .iter()
            .all(|u| u == t || matches(u, t).is_none())
}

type Key = (Vec<Atom>, Vec<Atom>, Vec<Atom>);

fn key_set(clauses: &[ZClause]) -> BTreeSet<Key> {
    clauses
        .iter()
        .map(|c| {
            let c = c.normalize();
            (c.constraints, c.ante, c.succ)
        })
        .collect()
}

fn from_key(k: &Key) -> ZClause {
    ZClause::new(k.0.clone(), k.1.clone(), k.2.clone())
}

fn with_clause(s: &Problem, c: ZClause) -> Problem {
    let mut out = s.clone();
    out.clauses.push(c);
    out
}

/// Runs one admissibility probe of `scheme` on `s`. The counterexample is a
/// clause in the symmetric difference of the two sides.
pub fn admissibility_probe(
    scheme: &dyn InstantiationScheme,
    s: &Problem,
    b: &BoundSet,
    probe: &Probe,
) -> Result<ProbeOutcome> {
    let before = key_set(&scheme.ground(s, b)?);
    match probe {
        Probe::Monotonic { extra } => {
            let after = key_set(&scheme.ground(&with_clause(s, extra.clone()), b)?);
            let missing = before.difference(&after).next().map(from_key);
            Ok(ProbeOutcome {
                passed: missing.is_none(),
                counterexample: missing,
            })
        }
        Probe::DiscEquality { t, s: u } => {
            for side in [t, u] {
                if !is_disc(side, s) {
                    return Err(Error::Precondition(format!(
                        "`{side}` is not disc from the input"
                    )));
                }
            }
            if t.sort() != u.sort() || t.is_int() {
                return Err(Error::Precondition(format!(
                    "`{t}` and `{u}` must share a non-integer sort"
                )));
            }
            let unit = ZClause::new(vec![], vec![], vec![Atom::eq(t.clone(), u.clone())]);
            let after = key_set(&scheme.ground(&with_clause(s, unit.clone()), b)?);
            let mut expected = before;
            expected.extend(key_set(&[unit]));
            let diff = after.symmetric_difference(&expected).next().map(from_key);
            Ok(ProbeOutcome {
                passed: diff.is_none(),
                counterexample: diff,
            })
        }
    }
}

/// Instantiates clauses by matching their non-ground terms against ground
/// terms of the input modulo the ground unit equations it contains. Kept as
/// a reference for what the probe rejects; it is not admissible.
pub struct EMatchingScheme;

impl EMatchingScheme {
    /// Maps each term of a nontrivial class to the least member of its class.
    fn classes(p: &Problem) -> BTreeMap<Term, Term> {
        let mut groups: Vec<BTreeSet<Term>> = Vec::new();
        for c in &p.clauses {
            let ([], [], [Atom::Eq(l, r)]) = (&c.constraints[..], &c.ante[..], &c.succ[..]) else {
                continue;
            };
            if !l.is_ground() || !r.is_ground() {
                continue;
            }
            let mut merged: BTreeSet<Term> = [l.clone(), r.clone()].into();
            groups.retain(|g| {
                if g.contains(l) || g.contains(r) {
                    merged.extend(g.iter().cloned());
                    false
                } else {
                    true
                }
            });
            groups.push(merged);
        }
        let mut out = BTreeMap::new();
        for g in groups {
            let least = g.iter().next().cloned().expect("classes are nonempty");
            for t in g {
                out.insert(t, least.clone());
            }
        }
        out
    }

    fn match_modulo(
        pattern: &Term,
        target: &Term,
        eq: &BTreeMap<Term, Term>,
        sigma: &mut BTreeMap<crate::term::Var, Term>,
    ) -> bool {
        let class = |t: &Term| eq.get(t).cloned().unwrap_or_else(|| t.clone());
        if pattern.is_ground() {
            return class(pattern) == class(target);
        }
        match pattern {
            Term::Var(_) => match_into(pattern, target, sigma),
            Term::App { head, args, .. } => {
                target.head() == Some(head.as_ref())
                    && target.args().len() == args.len()
                    && args
                        .iter()
                        .zip(target.args())
                        .all(|(p, t)| Self::match_modulo(p, t, eq, sigma))
            }
            Term::Num(_) => false,
        }
    }
}

impl InstantiationScheme for EMatchingScheme {
    fn name(&self) -> &'static str {
        "e-matching"
    }

    fn description(&self) -> &'static str {
        "trigger matching modulo ground unit equations"
    }

    fn ground(&self, p: &Problem, _b: &BoundSet) -> Result<Vec<ZClause>> {
        let eq = Self::classes(p);
        let ground_terms: Vec<Term> = non_variable_subterms(p)
            .into_iter()
            .filter(Term::is_ground)
            .collect();
        let mut out = Vec::new();
        for c in &p.clauses {
            if c.vars().is_empty() {
                out.push(c.clone());
                continue;
            }
            for a in c.clause_atoms() {
                for pattern in a.terms() {
                    if pattern.is_ground() || pattern.is_var() {
                        continue;
                    }
                    for g in &ground_terms {
                        let mut sigma = BTreeMap::new();
                        if Self::match_modulo(pattern, g, &eq, &mut sigma) {
                            let sigma = Substitution::from_pairs(sigma)?;
                            let inst = c.apply(&sigma);
                            if inst.vars().is_empty() && !out.contains(&inst) {
                                out.push(inst);
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}
