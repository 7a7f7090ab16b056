//! Stage one: upper-bound set, instantiation of inequality variables over
//! `B ∪ {χ}`, and escape-constant simplification.

mod escape;
mod instantiate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::term::{normalize_numerals, Atom, Term};
use crate::zclause::{abstraction_defs, ground_completions, Problem, ZClause};

pub use escape::{decide_escape_atom, simplify_clause, simplify_escape, EscapeDecision};
pub use instantiate::{
    instantiate_integer_vars, replay_check, InstantiateOptions, InstantiationTrace, TraceEntry,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum BoundMode {
    Arrays,
    Generic,
}

/// The upper-bound set `B`, the escape constant `χ`, and where each term came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundSet {
    base: Vec<Term>,
    escape: Term,
    pub provenance: BTreeMap<Term, BTreeSet<&'static str>>,
    pub warnings: Vec<String>,
}

impl BoundSet {
    /// Builds a bound set from arbitrary ground integer terms; they are
    /// normalized, deduplicated and put in canonical order.
    pub fn new(terms: impl IntoIterator<Item = Term>, escape: Term) -> Result<Self> {
        let mut b = BoundSet {
            base: Vec::new(),
            escape,
            provenance: BTreeMap::new(),
            warnings: Vec::new(),
        };
        for t in terms {
            b.insert(t, "given")?;
        }
        Ok(b)
    }

    fn insert(&mut self, t: Term, rule: &'static str) -> Result<()> {
        if !t.is_ground() || !t.is_int() {
            return Err(Error::MalformedBound(format!(
                "`{t}` is not a ground integer term"
            )));
        }
        let t = normalize_numerals(&t);
        if t == self.escape {
            return Err(Error::MalformedBound(format!(
                "escape constant `{t}` cannot be a bound"
            )));
        }
        if let Err(pos) = self.base.binary_search(&t) {
            self.base.insert(pos, t.clone());
        }
        self.provenance.entry(t).or_default().insert(rule);
        Ok(())
    }

    /// `B` in canonical order.
    pub fn base(&self) -> &[Term] {
        &self.base
    }

    pub fn escape(&self) -> &Term {
        &self.escape
    }

    pub fn escape_name(&self) -> &str {
        self.escape.head().unwrap_or("chi")
    }

    /// `B′ = B ∪ {χ}`, with `χ` last.
    pub fn extended(&self) -> Vec<Term> {
        let mut out = self.base.clone();
        out.push(self.escape.clone());
        out
    }

    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    pub fn contains(&self, t: &Term) -> bool {
        self.base.binary_search(&normalize_numerals(t)).is_ok()
    }

    pub fn as_set(&self) -> BTreeSet<Term> {
        self.base.iter().cloned().collect()
    }
}

impl fmt::Display for BoundSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, t) in self.extended().iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{t}")?;
        }
        f.write_str("}")
    }
}

/// A fresh integer constant for `χ`, named `chi` unless taken.
pub fn fresh_escape(p: &Problem) -> Term {
    let name = if !p.contains_symbol("chi") {
        "chi".to_string()
    } else {
        (0..)
            .map(|i| format!("chi!{i}"))
            .find(|n| !p.contains_symbol(n))
            .expect("unbounded name supply")
    };
    Term::int_const(&name)
}

/// Collects `B`. In both modes every ground completion of `t` for an atom
/// `x ⩽ t` of Λ is included. Arrays mode adds select indices and, for each
/// store index `u ≐ t`, both `t` and `t − 1`.
pub fn compute_bound(p: &Problem, mode: BoundMode) -> Result<BoundSet> {
    let mut b = BoundSet::new([], fresh_escape(p))?;
    for c in &p.clauses {
        let defs = abstraction_defs(c);
        for a in &c.constraints {
            let Atom::Leq(Term::Var(_), t) = a else {
                continue;
            };
            if t.is_var() {
                continue;
            }
            let completions = ground_completions(t, &defs);
            if completions.is_empty() {
                let msg = format!("bound `{t}` of {c} has no ground completion");
                match mode {
                    BoundMode::Arrays => return Err(Error::MalformedBound(msg)),
                    BoundMode::Generic => {
                        b.warnings.push(msg);
                        continue;
                    }
                }
            }
            for (g, _) in completions {
                b.insert(g, "upper-bound")?;
            }
        }
        if mode == BoundMode::Arrays {
            collect_array_indices(c, &defs, &mut b)?;
        }
    }
    Ok(b)
}

fn collect_array_indices(
    c: &ZClause,
    defs: &BTreeMap<crate::term::Var, Vec<Term>>,
    b: &mut BoundSet,
) -> Result<()> {
    let mut selects = Vec::new();
    let mut stores = Vec::new();
    for a in c.clause_atoms() {
        for t in a.terms() {
            t.visit(&mut |s| match s.head() {
                Some("select") if s.args().len() == 2 => selects.push(s.args()[1].clone()),
                Some("store") if s.args().len() == 3 => stores.push(s.args()[1].clone()),
                _ => {}
            });
        }
    }
    for idx in selects {
        for (g, _) in ground_completions(&idx, defs) {
            b.insert(g, "select-index")?;
        }
    }
    for idx in stores {
        let completions = ground_completions(&idx, defs);
        if completions.is_empty() {
            return Err(Error::MalformedBound(format!(
                "store index `{idx}` of {c} has no grounding abstraction"
            )));
        }
        for (g, _) in completions {
            b.insert(Term::offset(g.clone(), -1), "store-index-pred")?;
            b.insert(g, "store-index")?;
        }
    }
    Ok(())
}

/// Drops bound terms that a unit constraint of the problem makes equal to a
/// term kept earlier in canonical order. Equalities are read from pairs of
/// constraint-only unit clauses `⟨l ⩽ r ∥ →⟩` that together force `t = s`.
pub fn minimize_bound(b: &BoundSet, p: &Problem) -> BoundSet {
    // ⟨l ⩽ r ∥ →⟩ asserts r + 1 ⩽ l, i.e. r ⩽ l − 1.
    let mut facts: BTreeSet<(Term, Term)> = BTreeSet::new();
    for c in &p.clauses {
        if !c.ante.is_empty() || !c.succ.is_empty() || c.constraints.len() != 1 {
            continue;
        }
        if let Atom::Leq(l, r) = &c.constraints[0] {
            if l.is_ground() && r.is_ground() {
                facts.insert((normalize_numerals(r), Term::offset(l.clone(), -1)));
            }
        }
    }
    let equal = |s: &Term, t: &Term| {
        facts.contains(&(s.clone(), t.clone())) && facts.contains(&(t.clone(), s.clone()))
    };
    let mut out = b.clone();
    out.base.clear();
    for t in &b.base {
        let merged = out.base.iter().any(|s| equal(s, t));
        if !merged {
            out.base.push(t.clone());
        } else {
            out.provenance.remove(t);
        }
    }
    out
}
