use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num_bigint::BigInt;

use super::sexpr::{parse_sexprs, SExpr};
use crate::error::{Error, Result};
use crate::term::{is_reserved, Atom, Profile, Signature, Sort, Term, Var};
use crate::zclause::{purify, separate_arithmetic, Problem, Theory, ZClause};

fn list<'a>(e: &'a SExpr, what: &str) -> Result<&'a [SExpr]> {
    e.as_list()
        .ok_or_else(|| e.error(format!("expected a list for {what}")))
}

fn atom<'a>(e: &'a SExpr, what: &str) -> Result<&'a str> {
    e.as_atom()
        .ok_or_else(|| e.error(format!("expected a symbol for {what}")))
}

fn sort_of(sig: &Signature, e: &SExpr) -> Result<Sort> {
    let s = Sort::new(atom(e, "sort")?);
    if !sig.has_sort(&s) {
        return Err(e.error(format!("undeclared sort `{s}`")));
    }
    Ok(s)
}

/// Term reader shared by the native and SMT-LIB front ends.
pub(crate) struct TermReader<'a> {
    pub sig: &'a Signature,
    pub vars: BTreeMap<String, Var>,
}

impl TermReader<'_> {
    pub fn term(&self, e: &SExpr) -> Result<Term> {
        if let Some(text) = e.as_atom() {
            if let Ok(n) = text.parse::<BigInt>() {
                return Ok(Term::Num(n));
            }
            if let Some(v) = self.vars.get(text) {
                return Ok(Term::var(v.clone()));
            }
            return self.sig.constant(text).map_err(|err| match err {
                Error::UnknownSymbol(s) => e.error(format!("unknown symbol `{s}`")),
                other => other,
            });
        }
        let items = list(e, "term")?;
        let head = items.first().ok_or_else(|| e.error("empty application"))?;
        let head = atom(head, "function symbol")?;
        let args = items[1..]
            .iter()
            .map(|a| self.term(a))
            .collect::<Result<Vec<_>>>()?;
        let int_args = |n: Option<usize>| -> Result<()> {
            if n.is_some_and(|n| n != args.len()) || args.is_empty() {
                return Err(e.error(format!("wrong number of arguments to `{head}`")));
            }
            if let Some(a) = args.iter().find(|a| !a.is_int()) {
                return Err(e.error(format!("`{a}` under `{head}` is not an integer")));
            }
            Ok(())
        };
        match head {
            "+" => {
                int_args(None)?;
                Ok(args.into_iter().reduce(Term::add).expect("nonempty"))
            }
            "-" if args.len() == 1 => {
                int_args(Some(1))?;
                Ok(Term::neg(args.into_iter().next().expect("one argument")))
            }
            "-" => {
                int_args(Some(2))?;
                let mut it = args.into_iter();
                let (a, b) = (it.next().expect("lhs"), it.next().expect("rhs"));
                Ok(Term::add(a, Term::neg(b)))
            }
            "su" | "prc" => {
                int_args(Some(1))?;
                let k = if head == "su" { 1 } else { -1 };
                Ok(Term::add(
                    args.into_iter().next().expect("one argument"),
                    Term::num(k),
                ))
            }
            _ => self.sig.app(head, args).map_err(|err| match err {
                Error::UnknownSymbol(s) => e.error(format!("unknown symbol `{s}`")),
                Error::Sort(m) => e.error(m),
                other => other,
            }),
        }
    }

    /// An atom and whether it was negated.
    pub fn literal(&self, e: &SExpr) -> Result<(Atom, bool)> {
        let items = list(e, "atom")?;
        match e.head() {
            Some("not") if items.len() == 2 => {
                let (a, neg) = self.literal(&items[1])?;
                Ok((a, !neg))
            }
            Some("le" | "<=") if items.len() == 3 => {
                let (l, r) = (self.term(&items[1])?, self.term(&items[2])?);
                if !l.is_int() || !r.is_int() {
                    return Err(e.error("`le` needs integer arguments"));
                }
                Ok((Atom::leq(l, r), false))
            }
            Some("eq" | "=") if items.len() == 3 => {
                let (l, r) = (self.term(&items[1])?, self.term(&items[2])?);
                if l.sort() != r.sort() {
                    return Err(e.error(format!("`{l}` and `{r}` have different sorts")));
                }
                Ok((Atom::eq(l, r), false))
            }
            Some("in-image") if items.len() == 3 => {
                let t = self.term(&items[1])?;
                let f = atom(&items[2], "function symbol")?;
                let p = self
                    .sig
                    .function(f)
                    .ok_or_else(|| items[2].error(format!("unknown symbol `{f}`")))?;
                if p.range != t.sort() {
                    return Err(e.error(format!("`{t}` cannot be in the image of `{f}`")));
                }
                Ok((Atom::InImage(t, f.into()), false))
            }
            _ => Err(e.error(format!("unsupported atom `{e}`"))),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum Part {
    Constraints,
    Ante,
    Succ,
}

/// Places a literal in a clause under construction. A negated atom switches
/// side; `¬(a ⩽ b)` on the left becomes `b ⩽ a − 1` in Λ.
pub(crate) fn place(c: &mut ZClause, part: Part, atom: Atom, negated: bool) {
    let left = matches!(part, Part::Constraints | Part::Ante);
    match (atom, negated, left) {
        (Atom::Leq(a, b), true, true) => c.constraints.push(Atom::leq(b, Term::offset(a, -1))),
        (a, false, true) if part == Part::Constraints || a.is_arithmetic() => c.constraints.push(a),
        (a, false, true) => c.ante.push(a),
        (a, true, true) => c.succ.push(a),
        (a, false, false) => c.succ.push(a),
        (a, true, false) if a.is_arithmetic() => c.constraints.push(a),
        (a, true, false) => c.ante.push(a),
    }
}

/// Splits arithmetic out of Γ → Δ and purifies each resulting clause.
pub(crate) fn to_z_clauses(c: &ZClause) -> Vec<ZClause> {
    separate_arithmetic(c).iter().map(purify).collect()
}

fn parse_clause(sig: &Signature, e: &SExpr) -> Result<Vec<ZClause>> {
    let items = list(e, "zclause")?;
    let mut reader = TermReader {
        sig,
        vars: BTreeMap::new(),
    };
    let mut c = ZClause::new(vec![], vec![], vec![]);
    for section in &items[1..] {
        let parts = list(section, "clause section")?;
        match section.head() {
            Some("name") if parts.len() == 2 => {
                c.origin = atom(&parts[1], "clause name")?.to_string()
            }
            Some("vars") => {
                for d in &parts[1..] {
                    let pair = list(d, "variable declaration")?;
                    if pair.len() != 2 {
                        return Err(d.error("expected (name sort)"));
                    }
                    let name = atom(&pair[0], "variable")?;
                    let var = Var::new(name, sort_of(sig, &pair[1])?);
                    if reader.vars.insert(name.to_string(), var).is_some() {
                        return Err(d.error(format!("variable `{name}` declared twice")));
                    }
                }
            }
            Some(h @ ("constraints" | "ante" | "succ")) => {
                let part = match h {
                    "constraints" => Part::Constraints,
                    "ante" => Part::Ante,
                    _ => Part::Succ,
                };
                for a in &parts[1..] {
                    let (atom, neg) = reader.literal(a)?;
                    if part == Part::Constraints && !neg && !atom.is_arithmetic() {
                        return Err(a.error("constraints must be arithmetic"));
                    }
                    place(&mut c, part, atom, neg);
                }
            }
            _ => return Err(section.error(format!("unknown clause section `{section}`"))),
        }
    }
    Ok(to_z_clauses(&c))
}

/// Reads a problem in the native clausal format.
pub fn parse_native(text: &str) -> Result<Problem> {
    let mut sig = Signature::new();
    let mut theory = Theory::Generic;
    let mut clauses = Vec::new();
    for e in parse_sexprs(text)? {
        let items = list(&e, "top-level form")?;
        match e.head() {
            Some("sorts") => {
                for s in &items[1..] {
                    sig.declare_sort(Sort::new(atom(s, "sort")?));
                }
            }
            Some("functions") => {
                for d in &items[1..] {
                    let decl = list(d, "function declaration")?;
                    if decl.len() < 2 {
                        return Err(d.error("expected (name arg-sorts... range)"));
                    }
                    let name = atom(&decl[0], "function name")?;
                    let sorts = decl[1..]
                        .iter()
                        .map(|s| sort_of(&sig, s))
                        .collect::<Result<Vec<_>>>()?;
                    let (range, args) = sorts.split_last().expect("nonempty");
                    sig.declare_function(name, Profile::new(args.to_vec(), range.clone()))
                        .map_err(|err| d.error(err.to_string()))?;
                }
            }
            Some("theory") if items.len() == 2 => {
                theory = atom(&items[1], "theory")?
                    .parse()
                    .map_err(|_| items[1].error(format!("unknown theory `{}`", items[1])))?;
            }
            Some("zclause") => clauses.extend(parse_clause(&sig, &e)?),
            _ => return Err(e.error(format!("unknown form `{}`", e.head().unwrap_or("()")))),
        }
    }
    Ok(Problem::new(sig, clauses, theory))
}

fn quote(name: &str) -> String {
    if name.is_empty()
        || name
            .chars()
            .any(|c| c.is_whitespace() || "()|;".contains(c))
    {
        format!("|{name}|")
    } else {
        name.to_string()
    }
}

fn atoms_line(out: &mut String, head: &str, atoms: &[Atom]) {
    let _ = write!(out, " ({head}");
    for a in atoms {
        let _ = write!(out, " {a}");
    }
    out.push(')');
}

/// Symbols used by the clauses but missing from the signature, such as the
/// escape constant, with their inferred profiles.
fn undeclared(p: &Problem) -> BTreeMap<String, Profile> {
    let mut out = BTreeMap::new();
    for c in &p.clauses {
        for a in c.atoms() {
            for t in a.terms() {
                t.visit(&mut |s| {
                    if let Term::App { head, args, sort } = s {
                        if !is_reserved(head) && !p.signature.has_function(head) {
                            let profile =
                                Profile::new(args.iter().map(Term::sort).collect(), sort.clone());
                            out.entry(head.to_string()).or_insert(profile);
                        }
                    }
                });
            }
        }
    }
    out
}

/// Writes a problem in the native format; `parse_native` reads it back.
pub fn print_native(p: &Problem) -> String {
    let mut out = String::from("(sorts");
    for s in p.signature.sorts().filter(|s| !s.is_int()) {
        let _ = write!(out, " {s}");
    }
    out.push_str(")\n(functions");
    let mut functions: BTreeMap<String, Profile> = p
        .signature
        .functions()
        .map(|(n, p)| (n.to_string(), p.clone()))
        .collect();
    functions.extend(undeclared(p));
    for (name, profile) in &functions {
        let _ = write!(out, "\n  ({}", quote(name));
        for s in profile.args.iter().chain([&profile.range]) {
            let _ = write!(out, " {s}");
        }
        out.push(')');
    }
    let _ = writeln!(out, ")\n(theory {})", p.theory);
    for c in &p.clauses {
        out.push_str("(zclause");
        if !c.origin.is_empty() {
            let _ = write!(out, " (name {})", quote(&c.origin));
        }
        let vars: BTreeSet<Var> = c.vars();
        if !vars.is_empty() {
            out.push_str(" (vars");
            for v in vars {
                let _ = write!(out, " ({} {})", v.name, v.sort);
            }
            out.push(')');
        }
        atoms_line(&mut out, "constraints", &c.constraints);
        atoms_line(&mut out, "ante", &c.ante);
        atoms_line(&mut out, "succ", &c.succ);
        out.push_str(")\n");
    }
    out
}
