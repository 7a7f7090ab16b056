//! Integer constants first, with conflict-directed backjumping, then a
//! depth-first search over the function table entries the clauses touch.

use std::collections::{BTreeMap, BTreeSet};

use super::eval::{int_consts_of, Ev, Evaluator, Frame, Key, Partial, Value};
use crate::error::{Error, Result};
use crate::term::{cartesian, Atom, Signature, Term, Var};
use crate::zclause::ZClause;

pub(crate) enum Found {
    Sat(Partial),
    Exhausted,
    OutOfBudget,
}

enum Step {
    Sat,
    Conflict(BTreeSet<usize>),
}

struct Abort;

pub(crate) struct Search<'a> {
    frame: &'a Frame,
    sig: &'a Signature,
    clauses: &'a [ZClause],
    instances: Vec<(usize, BTreeMap<Var, Value>)>,
    clause_ints: Vec<BTreeSet<usize>>,
    order: Vec<usize>,
    // Ground clauses whose integer constants are all assigned once the
    // variable at this position of `order` is.
    checks: Vec<Vec<usize>>,
    pure_terms: Vec<Term>,
    shift_invariant: bool,
    // Refuted leaves of a shift-invariant problem, keyed by what the table
    // search can observe of the integers.
    memo: BTreeMap<Vec<bool>, BTreeSet<usize>>,
    arith_atoms: Vec<Atom>,
    index_terms: Vec<Term>,
    partial: Partial,
    failed: BTreeSet<usize>,
    pub evaluations: u64,
    budget: u64,
}

/// Ground integer subterms built from numerals, `+`, `-` and integer
/// constants other than the escape constant.
fn pure_int_terms(clauses: &[ZClause], frame: &Frame) -> Vec<Term> {
    fn pure(t: &Term, frame: &Frame) -> bool {
        match t {
            Term::Num(_) => true,
            Term::Var(_) => false,
            Term::App { head, args, .. } if args.is_empty() => frame
                .int_index
                .get(head)
                .is_some_and(|&i| Some(i) != frame.escape),
            Term::App { head, args, .. } => {
                matches!(&**head, "+" | "-") && args.iter().all(|a| pure(a, frame))
            }
        }
    }
    let mut out = BTreeSet::new();
    for c in clauses {
        for a in c.atoms() {
            for t in a.terms() {
                t.visit(&mut |s| {
                    if s.is_int() && pure(s, frame) {
                        out.insert(s.clone());
                    }
                });
            }
        }
    }
    out.into_iter().collect()
}

/// True when shifting every integer constant by the same amount maps models
/// to models: the problem is ground and numerals occur only as offsets.
fn shift_invariant(clauses: &[ZClause], sig: &Signature, frame: &Frame) -> bool {
    fn offsets_only(t: &Term) -> bool {
        match t {
            Term::Num(_) => false,
            Term::Var(_) => true,
            Term::App { head, args, .. } if &**head == "+" && args.len() == 2 => {
                offsets_only(&args[0])
                    && (matches!(args[1], Term::Num(_)) || offsets_only(&args[1]))
            }
            Term::App { args, .. } => args.iter().all(offsets_only),
        }
    }
    let int_tables = sig.functions().any(|(f, p)| {
        p.range.is_int() && p.arity() > 0 && !matches!(&**f, "+" | "-")
            || frame.array.as_ref().is_some_and(|(_, e)| e.is_int())
    });
    !int_tables
        && clauses
            .iter()
            .all(|c| c.is_ground() && c.atoms().all(|a| a.terms().into_iter().all(offsets_only)))
}

fn arith_atoms(clauses: &[ZClause]) -> Vec<Atom> {
    let set: BTreeSet<Atom> = clauses
        .iter()
        .flat_map(|c| c.atoms())
        .filter(|a| a.is_arithmetic() && a.is_ground())
        .cloned()
        .collect();
    set.into_iter().collect()
}

/// Ground integer arguments of uninterpreted symbols, `select` and `store`.
fn index_terms(clauses: &[ZClause]) -> Vec<Term> {
    let mut set = BTreeSet::new();
    for c in clauses {
        for a in c.atoms() {
            for t in a.terms() {
                t.visit(&mut |s| {
                    if !s.is_arith_head() {
                        set.extend(
                            s.args()
                                .iter()
                                .filter(|x| x.is_int() && x.is_ground())
                                .cloned(),
                        );
                    }
                });
            }
        }
    }
    set.into_iter().collect()
}

impl<'a> Search<'a> {
    pub fn new(
        frame: &'a Frame,
        sig: &'a Signature,
        clauses: &'a [ZClause],
        budget: u64,
    ) -> Result<Self> {
        let mut instances = Vec::new();
        for (ci, c) in clauses.iter().enumerate() {
            let vars: Vec<Var> = c.vars().into_iter().collect();
            let columns = vars
                .iter()
                .map(|v| frame.var_range(&v.sort))
                .collect::<Result<Vec<_>>>()?;
            let refs: Vec<&[Value]> = columns.iter().map(Vec::as_slice).collect();
            for vals in cartesian(&refs) {
                instances.push((ci, vars.iter().cloned().zip(vals).collect()));
            }
        }
        let clause_ints: Vec<BTreeSet<usize>> =
            clauses.iter().map(|c| int_consts_of(c, frame)).collect();

        let mut order = Vec::new();
        for ints in &clause_ints {
            for &i in ints {
                if Some(i) != frame.escape && !order.contains(&i) {
                    order.push(i);
                }
            }
        }
        let position: BTreeMap<usize, usize> =
            order.iter().enumerate().map(|(p, &i)| (i, p)).collect();
        let mut checks = vec![Vec::new(); order.len()];
        for (ci, c) in clauses.iter().enumerate() {
            let ints = &clause_ints[ci];
            if !c.is_ground() || ints.is_empty() || frame.escape.is_some_and(|e| ints.contains(&e))
            {
                continue;
            }
            let last = ints.iter().map(|i| position[i]).max().expect("nonempty");
            checks[last].push(ci);
        }

        let mut partial = Partial {
            ints: vec![None; frame.int_consts.len()],
            ..Default::default()
        };
        // Constants no clause mentions are irrelevant.
        for i in 0..frame.int_consts.len() {
            if !position.contains_key(&i) && Some(i) != frame.escape {
                partial.ints[i] = Some(0);
            }
        }
        Ok(Search {
            frame,
            sig,
            clauses,
            instances,
            pure_terms: pure_int_terms(clauses, frame),
            shift_invariant: shift_invariant(clauses, sig, frame),
            memo: BTreeMap::new(),
            arith_atoms: arith_atoms(clauses),
            index_terms: index_terms(clauses),
            clause_ints,
            order,
            checks,
            partial,
            failed: BTreeSet::new(),
            evaluations: 0,
            budget,
        })
    }

    pub fn run(&mut self) -> Result<Found> {
        match self.assign_ints(0) {
            Ok(Ok(Step::Sat)) => Ok(Found::Sat(self.partial.clone())),
            Ok(Ok(Step::Conflict(_))) => Ok(Found::Exhausted),
            Ok(Err(Abort)) => Ok(Found::OutOfBudget),
            Err(e) => Err(e),
        }
    }

    fn tick(&mut self) -> std::result::Result<(), Abort> {
        self.evaluations += 1;
        if self.evaluations > self.budget {
            Err(Abort)
        } else {
            Ok(())
        }
    }

    fn evaluator(&self) -> Evaluator<'_> {
        Evaluator::new(self.frame, self.sig, &self.partial)
    }

    fn conflict_of(&self, clause: usize) -> BTreeSet<usize> {
        let ints = &self.clause_ints[clause];
        if self.frame.escape.is_some_and(|e| ints.contains(&e)) {
            // The escape value is derived from every other constant.
            return self.order.iter().copied().collect();
        }
        ints.clone()
    }

    fn assign_ints(&mut self, level: usize) -> Result<std::result::Result<Step, Abort>> {
        if level == self.order.len() {
            return self.leaf();
        }
        let var = self.order[level];
        let r = self.frame.radius;
        let mut acc = BTreeSet::new();
        // Under shift symmetry some constant must sit at -r.
        let last = level + 1 == self.order.len();
        let pinned = self.shift_invariant
            && last
            && !self.order[..level]
                .iter()
                .any(|&i| self.partial.ints[i] == Some(-r));
        if pinned {
            acc.extend(self.order[..level].iter().copied());
        }
        let hi = if pinned { -r } else { r };
        'values: for v in -r..=hi {
            self.partial.ints[var] = Some(v);
            for ci in self.checks[level].clone() {
                if let Err(a) = self.tick() {
                    return Ok(Err(a));
                }
                let env = BTreeMap::new();
                if let Ev::Val(false) = self.evaluator().clause(&self.clauses[ci], &env)? {
                    acc.extend(self.conflict_of(ci));
                    continue 'values;
                }
            }
            match self.assign_ints(level + 1)? {
                Err(a) => return Ok(Err(a)),
                Ok(Step::Sat) => return Ok(Ok(Step::Sat)),
                Ok(Step::Conflict(cs)) if !cs.contains(&var) => {
                    self.partial.ints[var] = None;
                    return Ok(Ok(Step::Conflict(cs)));
                }
                Ok(Step::Conflict(cs)) => acc.extend(cs),
            }
        }
        self.partial.ints[var] = None;
        acc.remove(&var);
        Ok(Ok(Step::Conflict(acc)))
    }

    fn memo_key(&self) -> Result<Vec<bool>> {
        let ev = self.evaluator();
        let env = BTreeMap::new();
        let mut key = Vec::new();
        for a in &self.arith_atoms {
            key.push(matches!(ev.atom(a, &env)?, Ev::Val(true)));
        }
        let mut vals = Vec::with_capacity(self.index_terms.len());
        for t in &self.index_terms {
            if let Ev::Val(Value::Int(n)) = ev.term(t, &env)? {
                vals.push(n);
            }
        }
        for (i, a) in vals.iter().enumerate() {
            for b in &vals[i + 1..] {
                key.push(a == b);
            }
        }
        let used: BTreeSet<i64> = vals.into_iter().collect();
        let free = self
            .frame
            .window
            .iter()
            .filter(|w| !used.contains(w))
            .count();
        key.extend((0..3).map(|i| free > i));
        Ok(key)
    }

    fn leaf(&mut self) -> Result<std::result::Result<Step, Abort>> {
        let everything: BTreeSet<usize> = self.order.iter().copied().collect();
        if self.shift_invariant && !self.order.is_empty() {
            let min = self
                .order
                .iter()
                .filter_map(|&i| self.partial.ints[i])
                .min();
            if min != Some(-self.frame.radius) {
                return Ok(Ok(Step::Conflict(everything)));
            }
        }
        if let Some(e) = self.frame.escape {
            let mut top = None::<i64>;
            for t in &self.pure_terms {
                if let Ev::Val(Value::Int(n)) = self.evaluator().term(t, &BTreeMap::new())? {
                    top = Some(top.map_or(n, |m| m.max(n)));
                }
            }
            self.partial.ints[e] = Some(top.map_or(0, |m| m + 1));
        }
        let key = if self.shift_invariant {
            Some(self.memo_key()?)
        } else {
            None
        };
        if let Some(cs) = key.as_ref().and_then(|k| self.memo.get(k)) {
            let cs = cs.clone();
            if let Some(e) = self.frame.escape {
                self.partial.ints[e] = None;
            }
            if let Err(a) = self.tick() {
                return Ok(Err(a));
            }
            return Ok(Ok(Step::Conflict(cs)));
        }
        self.failed.clear();
        let outcome = self.tables(0)?;
        match outcome {
            Ok(None) => Ok(Ok(Step::Sat)),
            Ok(Some(_)) => {
                let mut cs = BTreeSet::new();
                for &ci in &self.failed.clone() {
                    cs.extend(self.conflict_of(ci));
                }
                if let Some(e) = self.frame.escape {
                    self.partial.ints[e] = None;
                    cs.remove(&e);
                }
                if let Some(k) = key {
                    self.memo.insert(k, cs.clone());
                }
                Ok(Ok(Step::Conflict(cs)))
            }
            Err(a) => Ok(Err(a)),
        }
    }

    /// Table search with backjumping over entries; a refutation carries the
    /// entries it read.
    fn tables(
        &mut self,
        start: usize,
    ) -> Result<std::result::Result<Option<BTreeSet<Key>>, Abort>> {
        for i in start..self.instances.len() {
            if let Err(a) = self.tick() {
                return Ok(Err(a));
            }
            let ci = self.instances[i].0;
            let ev = self.evaluator();
            let verdict = ev.clause(&self.clauses[ci], &self.instances[i].1)?;
            let reads = ev.reads.into_inner();
            match verdict {
                Ev::Val(true) => {}
                Ev::Val(false) => {
                    self.failed.insert(ci);
                    return Ok(Ok(Some(reads.into_iter().collect())));
                }
                Ev::Need(key) => {
                    let values = match &key {
                        Key::Func(f, _) => {
                            let profile = self
                                .sig
                                .function(f)
                                .ok_or_else(|| Error::UnknownSymbol(f.clone()))?;
                            self.frame.range(&profile.range)?
                        }
                        Key::Base(..) => {
                            let (_, elem) = self.frame.array.as_ref().expect("array theory");
                            self.frame.range(elem)?
                        }
                        Key::Int(i) => {
                            return Err(Error::Invariant(format!(
                                "integer constant `{}` unassigned during table search",
                                self.frame.int_consts[*i]
                            )))
                        }
                    };
                    let mut acc = BTreeSet::new();
                    for v in values {
                        self.partial.assign(&key, v);
                        match self.tables(i)? {
                            Err(a) => return Ok(Err(a)),
                            Ok(None) => return Ok(Ok(None)),
                            Ok(Some(cs)) if !cs.contains(&key) => {
                                self.partial.unassign(&key);
                                return Ok(Ok(Some(cs)));
                            }
                            Ok(Some(cs)) => acc.extend(cs),
                        }
                    }
                    self.partial.unassign(&key);
                    acc.remove(&key);
                    return Ok(Ok(Some(acc)));
                }
            }
        }
        Ok(Ok(None))
    }
}
