//! A bounded decision procedure used as an independent reference.
//!
//! Integer constants range over `[-k, k]`. Uninterpreted sorts get small
//! finite carriers, and every size up to the cap is tried for sorts that
//! are quantified over. `select`/`store` are read-over-write on arrays that are
//! a lazily filled base table plus a list of writes, and array equality is
//! compared on an index window around the box. Quantified integer variables
//! range over the same window. When an escape constant is named, it is not
//! searched: it takes one more than the largest pure integer term, which is
//! the reading the escape simplification relies on.
//!
//! `Sat` comes with a model that has been re-checked clause by clause.
//! `UnsatWithinBound` only says no model exists inside these limits.

mod check;
mod eval;
mod generate;
mod search;

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

pub use check::check_model;
pub use eval::{Frame, Value};
pub use generate::{
    generate_random_az, generate_st2_problem, generate_stratified_problem,
    generate_stratified_signature, AzParams, StratifiedParams,
};

use crate::error::{Error, Result};
use crate::term::{cartesian, Atom, GroundUniverse, Signature, Sort, Symbol, Term};
use crate::zclause::Problem;

pub const DEFAULT_BUDGET: u64 = 10_000_000;
/// Largest carrier given to an uninterpreted sort.
pub const CARRIER_CAP: u32 = 4;
/// How far the index window extends past the box on each side.
pub const DEFAULT_MARGIN: i64 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleVerdict {
    Sat,
    UnsatWithinBound,
    Unknown,
}

impl OracleVerdict {
    pub fn name(self) -> &'static str {
        match self {
            OracleVerdict::Sat => "sat",
            OracleVerdict::UnsatWithinBound => "unsat-within-bound",
            OracleVerdict::Unknown => "unknown",
        }
    }

    pub fn is_conclusive(self) -> bool {
        self != OracleVerdict::Unknown
    }
}

#[derive(Clone, Debug)]
pub struct OracleConfig {
    pub radius: i64,
    pub margin: i64,
    /// Clause-instance evaluations before giving up with `Unknown`.
    pub budget: u64,
    pub escape: Option<String>,
}

impl OracleConfig {
    pub fn new(radius: i64) -> Self {
        OracleConfig {
            radius,
            margin: DEFAULT_MARGIN,
            budget: DEFAULT_BUDGET,
            escape: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Model {
    pub frame: Frame,
    pub ints: BTreeMap<String, i64>,
    pub funcs: BTreeMap<(Symbol, Vec<Value>), Value>,
    pub bases: BTreeMap<(u32, i64), Value>,
}

#[derive(Clone, Debug)]
pub struct OracleOutcome {
    pub verdict: OracleVerdict,
    pub model: Option<Model>,
    pub evaluations: u64,
}

/// `(array, element)` sorts when `select` and `store` have array profiles.
fn array_sorts(sig: &Signature) -> Option<(Sort, Sort)> {
    let sel = sig.function("select")?;
    let st = sig.function("store")?;
    match (sel.args.as_slice(), st.args.as_slice()) {
        ([a, i], [a2, i2, e])
            if i.is_int() && i2.is_int() && a == a2 && &st.range == a && &sel.range == e =>
        {
            Some((a.clone(), e.clone()))
        }
        _ => None,
    }
}

fn carriers(sig: &Signature, array: Option<&(Sort, Sort)>) -> BTreeMap<Sort, u32> {
    let universe = GroundUniverse::build_capped(sig, vec![Term::num(0)], CARRIER_CAP as usize).ok();
    let mut out = BTreeMap::new();
    for s in sig.sorts() {
        if s.is_int() || array.is_some_and(|(a, _)| a == s) {
            continue;
        }
        let n = match &universe {
            Some(u) => u.terms(s).len() as u32,
            None => sig.constants_of(s).len() as u32 + 1,
        };
        out.insert(s.clone(), n.clamp(1, CARRIER_CAP));
    }
    out
}

/// Uninterpreted sorts that some clause quantifies over, directly or through
/// the arguments of an image atom.
fn quantified_sorts(p: &Problem) -> BTreeSet<Sort> {
    let mut out = BTreeSet::new();
    for c in &p.clauses {
        out.extend(c.non_int_vars().into_iter().map(|v| v.sort));
        for a in c.atoms() {
            if let Atom::InImage(_, f) = a {
                if let Some(profile) = p.signature.function(f) {
                    out.extend(profile.args.iter().filter(|s| !s.is_int()).cloned());
                }
            }
        }
    }
    out
}

pub fn build_frame(p: &Problem, config: &OracleConfig) -> Result<Frame> {
    let sig = &p.signature;
    let array = array_sorts(sig);
    let mut int_consts: Vec<Symbol> = Vec::new();
    let mut array_consts = BTreeMap::new();
    for (name, profile) in sig.functions() {
        if profile.arity() > 0 {
            if array.as_ref().is_some_and(|(a, _)| &profile.range == a) && &**name != "store" {
                return Err(Error::Unsupported(format!(
                    "array-valued function `{name}`"
                )));
            }
            continue;
        }
        if profile.range.is_int() {
            int_consts.push(name.clone());
        } else if array.as_ref().is_some_and(|(a, _)| &profile.range == a) {
            let id = array_consts.len() as u32;
            array_consts.insert(name.clone(), id);
        }
    }
    let int_index: BTreeMap<Symbol, usize> = int_consts
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, s)| (s, i))
        .collect();
    // An escape constant that was simplified away is simply absent.
    let escape = config
        .escape
        .as_ref()
        .and_then(|name| int_index.get(name.as_str()).copied());
    let w = config.radius + config.margin;
    Ok(Frame {
        radius: config.radius,
        window: (-w..=w).collect(),
        carriers: carriers(sig, array.as_ref()),
        array,
        int_consts,
        int_index,
        array_consts,
        escape,
    })
}

/// Decides `p` within the box `[-k, k]` using the default budget.
pub fn bounded_decide(p: &Problem, k: i64, escape: Option<&str>) -> Result<OracleOutcome> {
    let mut config = OracleConfig::new(k);
    config.escape = escape.map(str::to_string);
    bounded_decide_with(p, &config)
}

pub fn bounded_decide_with(p: &Problem, config: &OracleConfig) -> Result<OracleOutcome> {
    if config.radius < 0 {
        return Err(Error::Precondition("negative oracle bound".into()));
    }
    let frame = build_frame(p, config)?;
    let quantified = quantified_sorts(p);
    // Models with fewer elements in a quantified sort are not embedded in
    // larger ones, so every carrier size up to the cap is tried.
    let columns: Vec<Vec<u32>> = frame
        .carriers
        .iter()
        .map(|(s, &n)| {
            if quantified.contains(s) {
                (1..=n).collect()
            } else {
                vec![n]
            }
        })
        .collect();
    let refs: Vec<&[u32]> = columns.iter().map(Vec::as_slice).collect();
    let mut evaluations = 0;
    let mut exhausted = true;
    let mut found = None;
    for sizes in cartesian(&refs) {
        let mut f = frame.clone();
        for (n, slot) in sizes.into_iter().zip(f.carriers.values_mut()) {
            *slot = n;
        }
        let mut s = search::Search::new(
            &f,
            &p.signature,
            &p.clauses,
            config.budget.saturating_sub(evaluations),
        )?;
        let result = s.run()?;
        evaluations += s.evaluations;
        match result {
            search::Found::Sat(partial) => {
                found = Some((f, partial));
                break;
            }
            search::Found::Exhausted => {}
            search::Found::OutOfBudget => {
                exhausted = false;
                break;
            }
        }
    }
    let (verdict, model) = match found {
        Some((frame, partial)) => {
            let ints = frame
                .int_consts
                .iter()
                .zip(&partial.ints)
                .map(|(name, v)| (name.to_string(), v.unwrap_or(0)))
                .collect();
            let model = Model {
                frame,
                ints,
                funcs: partial.funcs,
                bases: partial.bases,
            };
            check_model(p, &model)
                .map_err(|e| Error::Invariant(format!("oracle model rejected: {e}")))?;
            (OracleVerdict::Sat, Some(model))
        }
        None if exhausted => (OracleVerdict::UnsatWithinBound, None),
        None => (OracleVerdict::Unknown, None),
    };
    Ok(OracleOutcome {
        verdict,
        model,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_native;

    #[test]
    fn arithmetic_contradiction_is_unsat() {
        let p = parse_native(
            "(sorts) (functions (a Int) (b Int)) (theory arrays-int)
             (zclause (constraints (le a b)))
             (zclause (constraints (le b a)))",
        )
        .unwrap();
        assert_eq!(
            bounded_decide(&p, 3, None).unwrap().verdict,
            OracleVerdict::UnsatWithinBound
        );
    }

    #[test]
    fn read_over_write_holds_natively() {
        let p = parse_native(
            "(sorts Elem Array) (functions (select Array Int Elem) (store Array Int Elem Array)
               (a Array) (i Int) (e Elem)) (theory arrays-int)
             (zclause (ante (eq (select (store a i e) i) e)))",
        )
        .unwrap();
        assert_eq!(
            bounded_decide(&p, 2, None).unwrap().verdict,
            OracleVerdict::UnsatWithinBound
        );
    }

    #[test]
    fn sat_model_passes_recheck() {
        let p = parse_native(
            "(sorts Elem Array) (functions (select Array Int Elem) (store Array Int Elem Array)
               (a Array) (i Int) (e Elem) (d Elem)) (theory arrays-int)
             (zclause (ante (eq e d)))
             (zclause (succ (eq (select a i) e)))",
        )
        .unwrap();
        let out = bounded_decide(&p, 2, None).unwrap();
        assert_eq!(out.verdict, OracleVerdict::Sat);
        check_model(&p, out.model.as_ref().unwrap()).unwrap();
    }

    #[test]
    fn quantified_sort_may_collapse() {
        // Forces a single element; the largest carrier alone would refute it.
        let p = parse_native(
            "(sorts S) (functions (c S) (d S)) (zclause (vars (x S)) (succ (eq x c)))",
        )
        .unwrap();
        let out = bounded_decide(&p, 0, None).unwrap();
        assert_eq!(out.verdict, OracleVerdict::Sat);
        assert_eq!(out.model.unwrap().frame.carriers[&Sort::new("S")], 1);
    }

    #[test]
    fn zero_budget_is_unknown() {
        let p = crate::corpus::interval_example(1, true).unwrap();
        let mut config = OracleConfig::new(2);
        config.budget = 0;
        assert_eq!(
            bounded_decide_with(&p, &config).unwrap().verdict,
            OracleVerdict::Unknown
        );
    }
}
