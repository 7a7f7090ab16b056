use std::collections::{BTreeMap, BTreeSet};

use super::{Signature, Sort, Term};
use crate::error::{Error, Result};

/// Default ceiling on the number of ground terms of a single sort.
pub const DEFAULT_UNIVERSE_CAP: usize = 1 << 20;

/// Minimal levels with `lev(range) > lev(arg)` for every function whose range
/// is not `Int`. `Int` sits at level 0; integer-valued functions are part of
/// the arithmetic layer and impose no constraint.
pub fn stratification_levels(sig: &Signature) -> Result<BTreeMap<Sort, usize>> {
    let mut deps: BTreeMap<Sort, BTreeSet<Sort>> = BTreeMap::new();
    for s in sig.sorts() {
        deps.entry(s.clone()).or_default();
    }
    for (_, p) in sig.functions() {
        if p.range.is_int() {
            continue;
        }
        let entry = deps.entry(p.range.clone()).or_default();
        entry.extend(p.args.iter().cloned());
    }

    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Active,
        Done,
    }
    let mut marks: BTreeMap<Sort, Mark> = BTreeMap::new();
    let mut levels: BTreeMap<Sort, usize> = BTreeMap::new();
    let mut stack: Vec<Sort> = Vec::new();

    fn visit(
        s: &Sort,
        deps: &BTreeMap<Sort, BTreeSet<Sort>>,
        marks: &mut BTreeMap<Sort, Mark>,
        levels: &mut BTreeMap<Sort, usize>,
        stack: &mut Vec<Sort>,
    ) -> Result<usize> {
        if s.is_int() {
            return Ok(0);
        }
        match marks.get(s) {
            Some(Mark::Done) => return Ok(levels[s]),
            Some(Mark::Active) => {
                let start = stack.iter().position(|t| t == s).unwrap_or(0);
                let mut cycle: Vec<Sort> = stack[start..].to_vec();
                cycle.push(s.clone());
                return Err(Error::NotStratified(cycle));
            }
            None => {}
        }
        marks.insert(s.clone(), Mark::Active);
        stack.push(s.clone());
        let mut level = 0;
        if let Some(args) = deps.get(s) {
            for a in args {
                level = level.max(visit(a, deps, marks, levels, stack)? + 1);
            }
        }
        stack.pop();
        marks.insert(s.clone(), Mark::Done);
        levels.insert(s.clone(), level);
        Ok(level)
    }

    let sorts: Vec<Sort> = deps.keys().cloned().collect();
    for s in &sorts {
        visit(s, &deps, &mut marks, &mut levels, &mut stack)?;
    }
    levels.insert(Sort::int(), 0);
    Ok(levels)
}

/// The finite set of ground terms of each sort of a stratified signature.
/// Integer argument positions range over a fixed pool of ground integer terms.
#[derive(Clone, Debug)]
pub struct GroundUniverse {
    pub levels: BTreeMap<Sort, usize>,
    terms: BTreeMap<Sort, Vec<Term>>,
}

impl GroundUniverse {
    pub fn build(sig: &Signature, int_pool: Vec<Term>) -> Result<Self> {
        Self::build_capped(sig, int_pool, DEFAULT_UNIVERSE_CAP)
    }

    pub fn build_capped(sig: &Signature, mut int_pool: Vec<Term>, cap: usize) -> Result<Self> {
        let levels = stratification_levels(sig)?;
        int_pool.sort();
        int_pool.dedup();
        let mut terms: BTreeMap<Sort, Vec<Term>> = BTreeMap::new();
        terms.insert(Sort::int(), int_pool);

        let mut order: Vec<(&Sort, &usize)> = levels.iter().filter(|(s, _)| !s.is_int()).collect();
        order.sort_by_key(|(s, l)| (**l, (*s).clone()));
        for (sort, _) in order {
            let mut out: Vec<Term> = Vec::new();
            for (name, p) in sig.functions() {
                if &p.range != sort {
                    continue;
                }
                let columns: Vec<&[Term]> = p
                    .args
                    .iter()
                    .map(|a| terms.get(a).map(Vec::as_slice).unwrap_or(&[]))
                    .collect();
                let total = columns
                    .iter()
                    .try_fold(1usize, |acc, c| acc.checked_mul(c.len()));
                match total {
                    Some(n) if out.len().saturating_add(n) <= cap => {}
                    _ => {
                        return Err(Error::Precondition(format!(
                            "ground terms of sort {sort} exceed the cap of {cap}"
                        )))
                    }
                }
                for combo in cartesian(&columns) {
                    out.push(Term::app(name, combo, sort.clone()));
                }
            }
            out.sort();
            out.dedup();
            terms.insert(sort.clone(), out);
        }
        Ok(GroundUniverse { levels, terms })
    }

    pub fn terms(&self, sort: &Sort) -> &[Term] {
        self.terms.get(sort).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn level(&self, sort: &Sort) -> usize {
        self.levels.get(sort).copied().unwrap_or(0)
    }
}

/// All tuples picking one element per column, in lexicographic order.
pub fn cartesian<T: Clone>(columns: &[&[T]]) -> Vec<Vec<T>> {
    let mut out: Vec<Vec<T>> = vec![Vec::new()];
    for col in columns {
        let mut next = Vec::with_capacity(out.len() * col.len());
        for prefix in &out {
            for item in col.iter() {
                let mut row = prefix.clone();
                row.push(item.clone());
                next.push(row);
            }
        }
        out = next;
    }
    out
}

/// `T_Σ^σ` with integer positions drawn from the signature's integer
/// constants, or from `{0}` when there are none.
pub fn enumerate_ground_terms(sig: &Signature, sort: &Sort) -> Result<Vec<Term>> {
    let mut pool = sig.constants_of(&Sort::int());
    if pool.is_empty() {
        pool.push(Term::num(0));
    }
    let universe = GroundUniverse::build(sig, pool)?;
    Ok(universe.terms(sort).to_vec())
}

/// Depth with integer subterms counted as leaves.
pub fn sorted_depth(t: &Term) -> usize {
    if t.is_int() {
        return 0;
    }
    match t {
        Term::App { args, .. } if !args.is_empty() => {
            1 + args.iter().map(sorted_depth).max().unwrap_or(0)
        }
        _ => 0,
    }
}
