use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Signed;

use super::BoundSet;
use crate::term::{normalize_numerals, split_offset, Atom, Substitutable, Substitution, Term, Var};
use crate::zclause::{Problem, ZClause};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EscapeDecision {
    True,
    False,
    /// Mentions `χ` but cannot be decided from `χ > t` for ground `t`.
    Unknown,
    /// Does not mention `χ`.
    Unaffected,
}

enum Side {
    Escape(BigInt),
    Ground,
    Other,
}

fn classify_side(t: &Term, chi: &Term) -> Side {
    let (base, k) = split_offset(t);
    match base {
        Some(b) if &b == chi => Side::Escape(k),
        _ if t.contains_symbol(chi.head().unwrap_or_default()) => Side::Other,
        _ if t.is_ground() => Side::Ground,
        _ => Side::Other,
    }
}

/// Decides an arithmetic atom whose sides are already resolved to ground
/// terms, using only that `χ` exceeds every other ground term.
pub fn decide_escape_atom(atom: &Atom, chi: &Term) -> EscapeDecision {
    let name = chi.head().unwrap_or_default();
    if !atom.contains_symbol(name) {
        return EscapeDecision::Unaffected;
    }
    use EscapeDecision::*;
    let (l, r) = match atom {
        Atom::Eq(l, r) | Atom::Leq(l, r) => (
            classify_side(&normalize_numerals(l), chi),
            classify_side(&normalize_numerals(r), chi),
        ),
        Atom::InImage(..) => return Unknown,
    };
    let is_leq = matches!(atom, Atom::Leq(..));
    match (l, r) {
        (Side::Escape(k), Side::Escape(j)) => {
            let holds = if is_leq { k <= j } else { k == j };
            if holds {
                True
            } else {
                False
            }
        }
        // χ + k ⩽ g and χ + k ≐ g are false once k ⩾ 0.
        (Side::Escape(k), Side::Ground) if !k.is_negative() => False,
        // g ⩽ χ + k holds for k ⩾ −1 since χ ⩾ g + 1.
        (Side::Ground, Side::Escape(k)) if is_leq && k >= BigInt::from(-1) => True,
        (Side::Ground, Side::Escape(k)) if !is_leq && !k.is_negative() => False,
        _ => Unknown,
    }
}

/// Applies the escape simplification to one clause. Returns `None` when the
/// clause is deleted, plus any atoms left undecided.
pub fn simplify_clause(c: &ZClause, chi: &Term) -> (Option<ZClause>, Vec<Atom>) {
    let mut sigma = Substitution::new();
    let mut rest: Vec<Atom> = Vec::with_capacity(c.constraints.len());
    for a in &c.constraints {
        match a {
            Atom::Eq(Term::Var(x), t) | Atom::Eq(t, Term::Var(x)) if t == chi => {
                sigma
                    .bind(x.clone(), chi.clone())
                    .expect("escape constant is integer-sorted");
            }
            other => rest.push(other.clone()),
        }
    }
    let c = ZClause {
        constraints: rest,
        ante: c.ante.clone(),
        succ: c.succ.clone(),
        origin: c.origin.clone(),
    }
    .apply(&sigma);

    let mut unique: BTreeMap<Var, Option<Term>> = BTreeMap::new();
    for (x, t) in c.grounding_abstractions() {
        unique
            .entry(x)
            .and_modify(|e| {
                if e.as_ref() != Some(&t) {
                    *e = None
                }
            })
            .or_insert(Some(t));
    }
    let resolve =
        Substitution::from_pairs(unique.into_iter().filter_map(|(x, t)| t.map(|t| (x, t))))
            .expect("abstraction atoms are integer-sorted");

    let mut kept = Vec::with_capacity(c.constraints.len());
    let mut undecided = Vec::new();
    for a in &c.constraints {
        if a.as_grounding_abstraction().is_some() {
            kept.push(a.clone());
            continue;
        }
        match decide_escape_atom(&a.apply(&resolve), chi) {
            EscapeDecision::False => return (None, Vec::new()),
            EscapeDecision::True => {}
            EscapeDecision::Unaffected => kept.push(a.clone()),
            EscapeDecision::Unknown => {
                undecided.push(a.clone());
                kept.push(a.clone());
            }
        }
    }
    (
        Some(ZClause {
            constraints: kept,
            ..c
        }),
        undecided,
    )
}

/// Replaces escape atoms by their truth value: clauses with a false atom are
/// deleted, true atoms are dropped. Returns the simplified problem, the
/// index of the source instance for each kept clause, and warnings.
pub fn simplify_escape(p: &Problem, b: &BoundSet) -> (Problem, Vec<usize>, Vec<String>) {
    let mut clauses = Vec::with_capacity(p.clauses.len());
    let mut kept_from = Vec::with_capacity(p.clauses.len());
    let mut warnings = Vec::new();
    for (i, c) in p.clauses.iter().enumerate() {
        let (out, undecided) = simplify_clause(c, b.escape());
        for a in undecided {
            warnings.push(format!("escape atom {a} left undecided in {c}"));
        }
        if let Some(out) = out {
            clauses.push(out);
            kept_from.push(i);
        }
    }
    (
        Problem {
            signature: p.signature.clone(),
            clauses,
            theory: p.theory,
        },
        kept_from,
        warnings,
    )
}
