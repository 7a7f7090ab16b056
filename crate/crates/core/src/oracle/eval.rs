//! Evaluation under a partial interpretation. Anything not yet fixed is
//! reported as the [`Key`] the search should branch on.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::term::{Atom, Signature, Sort, Symbol, Term, Var};
use crate::zclause::ZClause;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Int(i64),
    /// Element `i` of an uninterpreted sort's carrier.
    Elem(u32),
    /// A base array overwritten at some indices; later writes win.
    Array {
        base: u32,
        writes: Vec<(i64, Value)>,
    },
}

/// An unassigned piece of the interpretation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Key {
    Int(usize),
    Func(Symbol, Vec<Value>),
    Base(u32, i64),
}

pub enum Ev<T> {
    Val(T),
    Need(Key),
}

use Ev::{Need, Val};

macro_rules! need {
    ($e:expr) => {
        match $e? {
            Val(v) => v,
            Need(k) => return Ok(Need(k)),
        }
    };
}

/// Fixed parts of the search: carriers, the box, and the index window.
#[derive(Clone, Debug)]
pub struct Frame {
    pub radius: i64,
    /// Values for universally quantified integer variables and extensional
    /// array comparison.
    pub window: Vec<i64>,
    pub carriers: BTreeMap<Sort, u32>,
    /// `(array sort, element sort)` when `select`/`store` are the array theory.
    pub array: Option<(Sort, Sort)>,
    pub int_consts: Vec<Symbol>,
    pub int_index: BTreeMap<Symbol, usize>,
    pub array_consts: BTreeMap<Symbol, u32>,
    pub escape: Option<usize>,
}

impl Frame {
    pub fn is_array(&self, s: &Sort) -> bool {
        self.array.as_ref().is_some_and(|(a, _)| a == s)
    }

    /// Possible values of a term of sort `s`: the box for integers, the
    /// carrier otherwise.
    pub fn range(&self, s: &Sort) -> Result<Vec<Value>> {
        if s.is_int() {
            return Ok((-self.radius..=self.radius).map(Value::Int).collect());
        }
        if self.is_array(s) {
            return Err(Error::Unsupported(format!(
                "array-valued function into {s}"
            )));
        }
        let n = self.carriers.get(s).copied().unwrap_or(1);
        Ok((0..n).map(Value::Elem).collect())
    }

    /// Values a quantified variable of sort `s` ranges over.
    pub fn var_range(&self, s: &Sort) -> Result<Vec<Value>> {
        if s.is_int() {
            return Ok(self.window.iter().copied().map(Value::Int).collect());
        }
        self.range(s)
    }
}

/// The interpretation built so far.
#[derive(Clone, Debug, Default)]
pub struct Partial {
    pub ints: Vec<Option<i64>>,
    pub funcs: BTreeMap<(Symbol, Vec<Value>), Value>,
    pub bases: BTreeMap<(u32, i64), Value>,
}

impl Partial {
    pub fn assign(&mut self, key: &Key, v: Value) {
        match (key, v) {
            (Key::Int(i), Value::Int(n)) => self.ints[*i] = Some(n),
            (Key::Func(f, args), v) => {
                self.funcs.insert((f.clone(), args.clone()), v);
            }
            (Key::Base(b, i), v) => {
                self.bases.insert((*b, *i), v);
            }
            (k, v) => unreachable!("value {v:?} for {k:?}"),
        }
    }

    pub fn unassign(&mut self, key: &Key) {
        match key {
            Key::Int(i) => self.ints[*i] = None,
            Key::Func(f, args) => {
                self.funcs.remove(&(f.clone(), args.clone()));
            }
            Key::Base(b, i) => {
                self.bases.remove(&(*b, *i));
            }
        }
    }
}

fn int(v: Value) -> Result<i64> {
    match v {
        Value::Int(n) => Ok(n),
        other => Err(Error::Invariant(format!(
            "expected an integer, got {other:?}"
        ))),
    }
}

fn overflow() -> Error {
    Error::Unsupported("integer overflow during evaluation".into())
}

pub struct Evaluator<'a> {
    pub frame: &'a Frame,
    pub sig: &'a Signature,
    pub partial: &'a Partial,
    /// Table entries a decided result depended on.
    pub reads: RefCell<Vec<Key>>,
}

impl<'a> Evaluator<'a> {
    pub fn new(frame: &'a Frame, sig: &'a Signature, partial: &'a Partial) -> Self {
        Evaluator {
            frame,
            sig,
            partial,
            reads: RefCell::new(Vec::new()),
        }
    }

    fn read(&self, key: Key) {
        self.reads.borrow_mut().push(key);
    }

    pub fn term(&self, t: &Term, env: &BTreeMap<Var, Value>) -> Result<Ev<Value>> {
        match t {
            Term::Num(n) => i64::try_from(n)
                .map(|n| Val(Value::Int(n)))
                .map_err(|_| overflow()),
            Term::Var(v) => env
                .get(v)
                .cloned()
                .map(Val)
                .ok_or_else(|| Error::Invariant(format!("unbound variable `{}`", v.name))),
            Term::App { head, args, sort } => {
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(need!(self.term(a, env)));
                }
                self.apply(head, vals, sort)
            }
        }
    }

    fn apply(&self, head: &Symbol, vals: Vec<Value>, sort: &Sort) -> Result<Ev<Value>> {
        let arrays = self.frame.array.is_some();
        match (&**head, vals.len()) {
            ("+", 2) => {
                let (a, b) = (int(vals[0].clone())?, int(vals[1].clone())?);
                a.checked_add(b)
                    .map(|n| Val(Value::Int(n)))
                    .ok_or_else(overflow)
            }
            ("-", 1) => int(vals[0].clone())?
                .checked_neg()
                .map(|n| Val(Value::Int(n)))
                .ok_or_else(overflow),
            ("-", 2) => {
                let (a, b) = (int(vals[0].clone())?, int(vals[1].clone())?);
                a.checked_sub(b)
                    .map(|n| Val(Value::Int(n)))
                    .ok_or_else(overflow)
            }
            ("select", 2) if arrays => {
                let Value::Array { base, writes } = &vals[0] else {
                    return Err(Error::Invariant("select on a non-array".into()));
                };
                let i = int(vals[1].clone())?;
                if let Some((_, v)) = writes.iter().rev().find(|(j, _)| *j == i) {
                    return Ok(Val(v.clone()));
                }
                Ok(match self.partial.bases.get(&(*base, i)) {
                    Some(v) => {
                        self.read(Key::Base(*base, i));
                        Val(v.clone())
                    }
                    None => Need(Key::Base(*base, i)),
                })
            }
            ("store", 3) if arrays => {
                let mut it = vals.into_iter();
                let Some(Value::Array { base, mut writes }) = it.next() else {
                    return Err(Error::Invariant("store on a non-array".into()));
                };
                let i = int(it.next().expect("index"))?;
                writes.retain(|(j, _)| *j != i);
                writes.push((i, it.next().expect("value")));
                Ok(Val(Value::Array { base, writes }))
            }
            (_, 0) if sort.is_int() => {
                let idx = *self
                    .frame
                    .int_index
                    .get(head)
                    .ok_or_else(|| Error::UnknownSymbol(head.clone()))?;
                Ok(match self.partial.ints[idx] {
                    Some(n) => Val(Value::Int(n)),
                    None => Need(Key::Int(idx)),
                })
            }
            (_, 0) if self.frame.is_array(sort) => {
                let base = *self
                    .frame
                    .array_consts
                    .get(head)
                    .ok_or_else(|| Error::UnknownSymbol(head.clone()))?;
                Ok(Val(Value::Array {
                    base,
                    writes: vec![],
                }))
            }
            _ => {
                if vals.iter().any(|v| matches!(v, Value::Array { .. })) {
                    return Err(Error::Unsupported(format!("array argument to `{head}`")));
                }
                Ok(
                    match self.partial.funcs.get(&(head.clone(), vals.clone())) {
                        Some(v) => {
                            self.read(Key::Func(head.clone(), vals));
                            Val(v.clone())
                        }
                        None => Need(Key::Func(head.clone(), vals)),
                    },
                )
            }
        }
    }

    /// The value at `i` and the base entry it came from, if any.
    fn select_value(&self, v: &Value, i: i64) -> (Ev<Value>, Option<Key>) {
        let Value::Array { base, writes } = v else {
            unreachable!("array value expected")
        };
        if let Some((_, w)) = writes.iter().rev().find(|(j, _)| *j == i) {
            return (Val(w.clone()), None);
        }
        match self.partial.bases.get(&(*base, i)) {
            Some(w) => (Val(w.clone()), Some(Key::Base(*base, i))),
            None => (Need(Key::Base(*base, i)), None),
        }
    }

    pub fn atom(&self, a: &Atom, env: &BTreeMap<Var, Value>) -> Result<Ev<bool>> {
        match a {
            Atom::Leq(l, r) => {
                let l = int(need!(self.term(l, env)))?;
                let r = int(need!(self.term(r, env)))?;
                Ok(Val(l <= r))
            }
            Atom::Eq(l, r) if self.frame.is_array(&l.sort()) => {
                let (l, r) = (need!(self.term(l, env)), need!(self.term(r, env)));
                // Extensional over the window: any known difference decides.
                // Only the differing index explains a disequality.
                let mut pending = None;
                let mut equal_reads = Vec::new();
                for &i in &self.frame.window {
                    let ((x, kx), (y, ky)) = (self.select_value(&l, i), self.select_value(&r, i));
                    match (x, y) {
                        (Val(x), Val(y)) if x != y => {
                            kx.into_iter().chain(ky).for_each(|k| self.read(k));
                            return Ok(Val(false));
                        }
                        (Val(_), Val(_)) => equal_reads.extend(kx.into_iter().chain(ky)),
                        (Need(k), _) | (_, Need(k)) => {
                            pending.get_or_insert(k);
                        }
                    }
                }
                match pending {
                    Some(k) => Ok(Need(k)),
                    None => {
                        equal_reads.into_iter().for_each(|k| self.read(k));
                        Ok(Val(true))
                    }
                }
            }
            Atom::Eq(l, r) => {
                let l = need!(self.term(l, env));
                let r = need!(self.term(r, env));
                Ok(Val(l == r))
            }
            Atom::InImage(t, f) => {
                let t = need!(self.term(t, env));
                let profile = self
                    .sig
                    .function(f)
                    .ok_or_else(|| Error::UnknownSymbol(f.clone()))?;
                let columns = profile
                    .args
                    .iter()
                    .map(|s| self.frame.var_range(s))
                    .collect::<Result<Vec<_>>>()?;
                let refs: Vec<&[Value]> = columns.iter().map(Vec::as_slice).collect();
                let mut pending = None;
                let mut misses = Vec::new();
                for args in crate::term::cartesian(&refs) {
                    let key = Key::Func(f.clone(), args.clone());
                    match self.partial.funcs.get(&(f.clone(), args)) {
                        Some(v) if v == &t => {
                            self.read(key);
                            return Ok(Val(true));
                        }
                        Some(_) => misses.push(key),
                        None => {
                            pending.get_or_insert(key);
                        }
                    }
                }
                match pending {
                    Some(k) => Ok(Need(k)),
                    None => {
                        misses.into_iter().for_each(|k| self.read(k));
                        Ok(Val(false))
                    }
                }
            }
        }
    }

    /// `Val(true)` when the instance is satisfied.
    pub fn clause(&self, c: &ZClause, env: &BTreeMap<Var, Value>) -> Result<Ev<bool>> {
        let mut pending = None;
        for a in c.constraints.iter().chain(&c.ante) {
            match self.atom(a, env)? {
                Val(false) => return Ok(Val(true)),
                Val(true) => {}
                Need(k) => {
                    pending.get_or_insert(k);
                }
            }
        }
        for a in &c.succ {
            match self.atom(a, env)? {
                Val(true) => return Ok(Val(true)),
                Val(false) => {}
                Need(k) => {
                    pending.get_or_insert(k);
                }
            }
        }
        Ok(pending.map_or(Val(false), Need))
    }
}

/// Integer constants occurring in a clause, by index.
pub fn int_consts_of(c: &ZClause, frame: &Frame) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    for a in c.atoms() {
        for t in a.terms() {
            t.visit(&mut |s| {
                if let Some(h) = s.head() {
                    if let Some(&i) = frame.int_index.get(h) {
                        out.insert(i);
                    }
                }
            });
        }
    }
    out
}
