//! Many-sorted terms, atoms and substitutions.
//!
//! The integer sort is distinguished by name (`Int`). The built-in symbols
//! `+` (binary) and `-` (unary) together with signed numerals make up the
//! arithmetic fragment; every other symbol is declared in a [`Signature`].

mod signature;
mod strata;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub use signature::{is_reserved, Profile, Signature, SignatureReport};
pub use strata::{
    cartesian, enumerate_ground_terms, sorted_depth, stratification_levels, GroundUniverse,
    DEFAULT_UNIVERSE_CAP,
};

pub type Symbol = Arc<str>;

pub const PLUS: &str = "+";
pub const MINUS: &str = "-";
pub const INT: &str = "Int";

pub fn sym(name: &str) -> Symbol {
    Arc::from(name)
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sort(Symbol);

impl Sort {
    pub fn new(name: &str) -> Self {
        Sort(sym(name))
    }

    pub fn int() -> Self {
        Sort::new(INT)
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    pub fn is_int(&self) -> bool {
        &*self.0 == INT
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub name: Symbol,
    pub sort: Sort,
}

impl Var {
    pub fn new(name: &str, sort: Sort) -> Self {
        Var {
            name: sym(name),
            sort,
        }
    }

    pub fn int(name: &str) -> Self {
        Var::new(name, Sort::int())
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.name, self.sort)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// A position in a term: the sequence of argument indices leading to a subterm.
pub type Position = Vec<usize>;

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Num(BigInt),
    Var(Var),
    App {
        head: Symbol,
        args: Vec<Term>,
        sort: Sort,
    },
}

impl Term {
    pub fn num(value: i64) -> Self {
        Term::Num(BigInt::from(value))
    }

    pub fn var(v: Var) -> Self {
        Term::Var(v)
    }

    pub fn int_var(name: &str) -> Self {
        Term::Var(Var::int(name))
    }

    pub fn constant(name: &str, sort: Sort) -> Self {
        Term::App {
            head: sym(name),
            args: Vec::new(),
            sort,
        }
    }

    pub fn int_const(name: &str) -> Self {
        Term::constant(name, Sort::int())
    }

    /// Unchecked application; use [`Signature::app`] for sort-checked construction.
    pub fn app(head: &str, args: Vec<Term>, sort: Sort) -> Self {
        Term::App {
            head: sym(head),
            args,
            sort,
        }
    }

    pub fn add(lhs: Term, rhs: Term) -> Self {
        Term::App {
            head: sym(PLUS),
            args: vec![lhs, rhs],
            sort: Sort::int(),
        }
    }

    pub fn neg(t: Term) -> Self {
        Term::App {
            head: sym(MINUS),
            args: vec![t],
            sort: Sort::int(),
        }
    }

    /// `t + k` in normal form.
    pub fn offset(t: Term, k: i64) -> Self {
        normalize_numerals(&Term::add(t, Term::num(k)))
    }

    pub fn sort(&self) -> Sort {
        match self {
            Term::Num(_) => Sort::int(),
            Term::Var(v) => v.sort.clone(),
            Term::App { sort, .. } => sort.clone(),
        }
    }

    pub fn is_int(&self) -> bool {
        match self {
            Term::Num(_) => true,
            Term::Var(v) => v.sort.is_int(),
            Term::App { sort, .. } => sort.is_int(),
        }
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Term::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn head(&self) -> Option<&str> {
        match self {
            Term::App { head, .. } => Some(head),
            _ => None,
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::App { args, .. } => args,
            _ => &[],
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Term::App { args, .. } if args.is_empty())
    }

    pub fn is_arith_head(&self) -> bool {
        matches!(self.head(), Some(PLUS) | Some(MINUS))
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Num(_) => true,
            Term::Var(_) => false,
            Term::App { args, .. } => args.iter().all(Term::is_ground),
        }
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Term::Num(_) => {}
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::App { args, .. } => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn contains_var(&self, v: &Var) -> bool {
        match self {
            Term::Num(_) => false,
            Term::Var(w) => w == v,
            Term::App { args, .. } => args.iter().any(|a| a.contains_var(v)),
        }
    }

    pub fn contains_symbol(&self, name: &str) -> bool {
        match self {
            Term::Num(_) | Term::Var(_) => false,
            Term::App { head, args, .. } => {
                &**head == name || args.iter().any(|a| a.contains_symbol(name))
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::App { args, .. } if !args.is_empty() => {
                1 + args.iter().map(Term::depth).max().unwrap_or(0)
            }
            _ => 0,
        }
    }

    pub fn subterm(&self, pos: &[usize]) -> Option<&Term> {
        match pos.split_first() {
            None => Some(self),
            Some((&i, rest)) => self.args().get(i)?.subterm(rest),
        }
    }

    pub fn replace_at(&self, pos: &[usize], by: &Term) -> Term {
        match pos.split_first() {
            None => by.clone(),
            Some((&i, rest)) => match self {
                Term::App { head, args, sort } => {
                    let mut args = args.clone();
                    args[i] = args[i].replace_at(rest, by);
                    Term::App {
                        head: head.clone(),
                        args,
                        sort: sort.clone(),
                    }
                }
                _ => self.clone(),
            },
        }
    }

    /// Variable positions in left-to-right order.
    pub fn var_positions(&self) -> Vec<(Position, Var)> {
        fn go(t: &Term, path: &mut Position, out: &mut Vec<(Position, Var)>) {
            match t {
                Term::Var(v) => out.push((path.clone(), v.clone())),
                Term::App { args, .. } => {
                    for (i, a) in args.iter().enumerate() {
                        path.push(i);
                        go(a, path, out);
                        path.pop();
                    }
                }
                Term::Num(_) => {}
            }
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    /// Visits every subterm, outermost first.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Term)) {
        f(self);
        if let Term::App { args, .. } = self {
            for a in args {
                a.visit(f);
            }
        }
    }

    /// Rebuilds the term bottom-up, letting `f` rewrite each node after its
    /// arguments have been rewritten.
    pub fn map_bottom_up(&self, f: &mut impl FnMut(Term) -> Term) -> Term {
        let rebuilt = match self {
            Term::App { head, args, sort } => Term::App {
                head: head.clone(),
                args: args.iter().map(|a| a.map_bottom_up(f)).collect(),
                sort: sort.clone(),
            },
            other => other.clone(),
        };
        f(rebuilt)
    }

    pub fn as_i64(&self) -> Option<i64> {
        match self {
            Term::Num(n) => n.to_i64(),
            _ => None,
        }
    }
}

fn rank(t: &Term) -> u8 {
    match t {
        Term::Num(_) => 0,
        Term::Var(_) => 1,
        Term::App { .. } => 2,
    }
}

// Numerals first, then variables, then applications ordered by
// (symbol, arity, arguments).
impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Term::Num(a), Term::Num(b)) => a.cmp(b),
            (Term::Var(a), Term::Var(b)) => a.cmp(b),
            (
                Term::App {
                    head: h1,
                    args: a1,
                    sort: s1,
                },
                Term::App {
                    head: h2,
                    args: a2,
                    sort: s2,
                },
            ) => h1
                .cmp(h2)
                .then(a1.len().cmp(&a2.len()))
                .then_with(|| a1.cmp(a2))
                .then_with(|| s1.cmp(s2)),
            _ => rank(self).cmp(&rank(other)),
        }
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Num(n) => write!(f, "{n}"),
            Term::Var(v) => write!(f, "{}", v.name),
            Term::App { head, args, .. } if args.is_empty() => f.write_str(head),
            Term::App { head, args, .. } => {
                write!(f, "({head}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    Eq(Term, Term),
    Leq(Term, Term),
    InImage(Term, Symbol),
}

impl Atom {
    pub fn eq(lhs: Term, rhs: Term) -> Self {
        Atom::Eq(lhs, rhs)
    }

    pub fn leq(lhs: Term, rhs: Term) -> Self {
        Atom::Leq(lhs, rhs)
    }

    /// Equalities between integer terms and all inequalities.
    pub fn is_arithmetic(&self) -> bool {
        match self {
            Atom::Eq(l, _) => l.is_int(),
            Atom::Leq(..) => true,
            Atom::InImage(..) => false,
        }
    }

    pub fn terms(&self) -> Vec<&Term> {
        match self {
            Atom::Eq(l, r) | Atom::Leq(l, r) => vec![l, r],
            Atom::InImage(t, _) => vec![t],
        }
    }

    pub fn map_terms(&self, mut f: impl FnMut(&Term) -> Term) -> Atom {
        match self {
            Atom::Eq(l, r) => Atom::Eq(f(l), f(r)),
            Atom::Leq(l, r) => Atom::Leq(f(l), f(r)),
            Atom::InImage(t, g) => Atom::InImage(f(t), g.clone()),
        }
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        for t in self.terms() {
            t.collect_vars(out);
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn is_ground(&self) -> bool {
        self.terms().iter().all(|t| t.is_ground())
    }

    pub fn contains_symbol(&self, name: &str) -> bool {
        self.terms().iter().any(|t| t.contains_symbol(name))
    }

    pub fn normalize(&self) -> Atom {
        self.map_terms(normalize_numerals)
    }

    /// `x ≐ t` with `x` a variable (either orientation). Returns the variable
    /// and the defining term.
    pub fn as_abstraction(&self) -> Option<(&Var, &Term)> {
        match self {
            Atom::Eq(Term::Var(x), t) if x.sort.is_int() => Some((x, t)),
            Atom::Eq(t, Term::Var(x)) if x.sort.is_int() => Some((x, t)),
            _ => None,
        }
    }

    /// An abstraction atom whose defining term is ground.
    pub fn as_grounding_abstraction(&self) -> Option<(&Var, &Term)> {
        match self {
            Atom::Eq(Term::Var(x), t) if x.sort.is_int() && t.is_ground() => Some((x, t)),
            Atom::Eq(t, Term::Var(x)) if x.sort.is_int() && t.is_ground() => Some((x, t)),
            _ => None,
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Eq(l, r) => write!(f, "(eq {l} {r})"),
            Atom::Leq(l, r) => write!(f, "(le {l} {r})"),
            Atom::InImage(t, g) => write!(f, "(in-image {t} {g})"),
        }
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A finite, sort-preserving map from variables to terms.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Substitution {
    bindings: BTreeMap<Var, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bind(&mut self, var: Var, term: Term) -> Result<()> {
        let found = term.sort();
        if found != var.sort {
            return Err(Error::SubstitutionSort {
                var: var.name.clone(),
                expected: var.sort.clone(),
                found,
            });
        }
        self.bindings.insert(var, term);
        Ok(())
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Var, Term)>) -> Result<Self> {
        let mut s = Substitution::new();
        for (v, t) in pairs {
            s.bind(v, t)?;
        }
        Ok(s)
    }

    pub fn get(&self, v: &Var) -> Option<&Term> {
        self.bindings.get(v)
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.bindings.iter()
    }

    pub fn apply_term(&self, t: &Term) -> Term {
        if self.bindings.is_empty() {
            return t.clone();
        }
        match t {
            Term::Var(v) => self.bindings.get(v).cloned().unwrap_or_else(|| t.clone()),
            Term::Num(_) => t.clone(),
            Term::App { head, args, sort } => Term::App {
                head: head.clone(),
                args: args.iter().map(|a| self.apply_term(a)).collect(),
                sort: sort.clone(),
            },
        }
    }

    pub fn apply_atom(&self, a: &Atom) -> Atom {
        a.map_terms(|t| self.apply_term(t))
    }
}

impl fmt::Debug for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (v, t)) in self.bindings.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{} ↦ {}", v.name, t)?;
        }
        f.write_str("}")
    }
}

/// Expressions a substitution can be applied to.
pub trait Substitutable: Sized {
    fn apply(&self, sigma: &Substitution) -> Self;
}

impl Substitutable for Term {
    fn apply(&self, sigma: &Substitution) -> Self {
        sigma.apply_term(self)
    }
}

impl Substitutable for Atom {
    fn apply(&self, sigma: &Substitution) -> Self {
        sigma.apply_atom(self)
    }
}

impl<T: Substitutable> Substitutable for Vec<T> {
    fn apply(&self, sigma: &Substitution) -> Self {
        self.iter().map(|e| e.apply(sigma)).collect()
    }
}

pub fn apply_substitution<T: Substitutable>(e: &T, sigma: &Substitution) -> T {
    e.apply(sigma)
}

/// Canonical form of integer arithmetic: a sum of non-arithmetic summands in
/// canonical order followed by a single numeral offset (dropped when zero).
/// Non-integer terms have their arguments normalized.
pub fn normalize_numerals(t: &Term) -> Term {
    if !t.is_int() {
        return match t {
            Term::App { head, args, sort } => Term::App {
                head: head.clone(),
                args: args.iter().map(normalize_numerals).collect(),
                sort: sort.clone(),
            },
            other => other.clone(),
        };
    }
    let mut summands: BTreeMap<Term, BigInt> = BTreeMap::new();
    let mut constant = BigInt::zero();
    linearize(t, &BigInt::one(), &mut summands, &mut constant);

    let mut acc: Option<Term> = None;
    for (summand, coeff) in summands {
        if coeff.is_zero() {
            continue;
        }
        let piece = if coeff.is_negative() {
            Term::neg(summand)
        } else {
            summand
        };
        let reps = coeff.abs().to_usize().unwrap_or(usize::MAX);
        for _ in 0..reps {
            acc = Some(match acc {
                None => piece.clone(),
                Some(prev) => Term::add(prev, piece.clone()),
            });
        }
    }
    match acc {
        None => Term::Num(constant),
        Some(sum) if constant.is_zero() => sum,
        Some(sum) => Term::add(sum, Term::Num(constant)),
    }
}

fn linearize(t: &Term, coeff: &BigInt, acc: &mut BTreeMap<Term, BigInt>, constant: &mut BigInt) {
    match t {
        Term::Num(n) => *constant += coeff * n,
        Term::App { head, args, .. } if &**head == PLUS => {
            for a in args {
                linearize(a, coeff, acc, constant);
            }
        }
        Term::App { head, args, .. } if &**head == MINUS && args.len() == 1 => {
            linearize(&args[0], &-coeff, acc, constant);
        }
        Term::App { head, args, .. } if &**head == MINUS && args.len() == 2 => {
            linearize(&args[0], coeff, acc, constant);
            linearize(&args[1], &-coeff, acc, constant);
        }
        other => {
            let key = match other {
                Term::App { head, args, sort } => Term::App {
                    head: head.clone(),
                    args: args.iter().map(normalize_numerals).collect(),
                    sort: sort.clone(),
                },
                v => v.clone(),
            };
            *acc.entry(key).or_insert_with(BigInt::zero) += coeff;
        }
    }
}

/// Splits a normalized integer term into its non-numeral part and offset.
pub fn split_offset(t: &Term) -> (Option<Term>, BigInt) {
    match t {
        Term::Num(n) => (None, n.clone()),
        Term::App { head, args, .. } if &**head == PLUS && args.len() == 2 => match &args[1] {
            Term::Num(n) => (Some(args[0].clone()), n.clone()),
            _ => (Some(t.clone()), BigInt::zero()),
        },
        _ => (Some(t.clone()), BigInt::zero()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn su(t: Term) -> Term {
        Term::add(t, Term::num(1))
    }

    fn prc(t: Term) -> Term {
        Term::add(t, Term::neg(Term::num(1)))
    }

    #[test]
    fn successor_chain_folds_to_numeral() {
        assert_eq!(normalize_numerals(&su(su(Term::num(0)))), Term::num(2));
    }

    #[test]
    fn predecessor_of_successor_cancels() {
        let a = Term::int_const("a");
        assert_eq!(normalize_numerals(&prc(su(a.clone()))), a);
    }

    #[test]
    fn zero_offset_dropped() {
        let a = Term::int_const("a");
        assert_eq!(normalize_numerals(&Term::add(a.clone(), Term::num(0))), a);
    }

    #[test]
    fn normal_form_is_sum_then_offset() {
        let a = Term::int_const("a");
        let b = Term::int_const("b");
        let t = Term::add(
            Term::add(Term::num(3), b.clone()),
            Term::add(a.clone(), Term::num(-5)),
        );
        assert_eq!(
            normalize_numerals(&t),
            Term::add(Term::add(a, b), Term::num(-2))
        );
    }

    #[test]
    fn non_integer_arguments_are_normalized() {
        let arr = Sort::new("Array");
        let elem = Sort::new("Elem");
        let a = Term::constant("a", arr);
        let i = Term::int_const("i");
        let t = Term::app("select", vec![a.clone(), prc(su(i.clone()))], elem.clone());
        assert_eq!(
            normalize_numerals(&t),
            Term::app("select", vec![a, i], elem)
        );
    }

    #[test]
    fn substitution_replaces_single_binding() {
        let arr = Sort::new("Array");
        let elem = Sort::new("Elem");
        let a = Term::constant("a", arr);
        let t = Term::app("select", vec![a.clone(), Term::int_var("x")], elem.clone());
        let sigma = Substitution::from_pairs([(Var::int("x"), Term::int_const("u1"))]).unwrap();
        assert_eq!(
            t.apply(&sigma),
            Term::app("select", vec![a, Term::int_const("u1")], elem)
        );
    }

    #[test]
    fn empty_substitution_is_identity() {
        let s = Sort::new("S");
        let t = Term::app(
            "f",
            vec![
                Term::var(Var::new("x", s.clone())),
                Term::var(Var::new("y", s.clone())),
            ],
            s,
        );
        assert_eq!(t.apply(&Substitution::new()), t);
    }

    #[test]
    fn substitution_into_inequality() {
        let atom = Atom::leq(Term::int_var("x"), Term::int_const("u"));
        let sigma = Substitution::from_pairs([(Var::int("x"), Term::int_const("chi"))]).unwrap();
        assert_eq!(
            atom.apply(&sigma),
            Atom::leq(Term::int_const("chi"), Term::int_const("u"))
        );
    }

    #[test]
    fn substitution_rejects_sort_mismatch() {
        let mut sigma = Substitution::new();
        let err = sigma
            .bind(Var::int("x"), Term::constant("a", Sort::new("Array")))
            .unwrap_err();
        assert!(matches!(err, Error::SubstitutionSort { .. }));
    }

    #[test]
    fn canonical_order_puts_numerals_first() {
        let mut v = vec![Term::int_const("a"), Term::int_var("x"), Term::num(7)];
        v.sort();
        assert_eq!(
            v,
            vec![Term::num(7), Term::int_var("x"), Term::int_const("a")]
        );
    }

    #[test]
    fn split_offset_reads_normal_form() {
        let a = Term::int_const("a");
        let (base, k) = split_offset(&Term::offset(a.clone(), -1));
        assert_eq!(base, Some(a));
        assert_eq!(k, BigInt::from(-1));
    }
}
