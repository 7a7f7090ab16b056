use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num_traits::Signed;

use super::native::{place, to_z_clauses, Part, TermReader};
use super::sexpr::{parse_sexprs, SExpr};
use crate::error::{Error, Result};
use crate::term::{
    is_reserved, normalize_numerals, Atom, Profile, Signature, Sort, Substitutable, Substitution,
    Term, Var,
};
use crate::zclause::{Problem, Theory, ZClause};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Logic {
    QfAuflia,
    QfUflia,
}

impl Logic {
    pub fn name(self) -> &'static str {
        match self {
            Logic::QfAuflia => "QF_AUFLIA",
            Logic::QfUflia => "QF_UFLIA",
        }
    }
}

/// Variable-free clauses ready for a solver, with every symbol declared.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundProblem {
    pub signature: Signature,
    pub clauses: Vec<ZClause>,
    pub logic: Logic,
    /// `(array sort, element sort)` when `select`/`store` map to the built-in theory.
    pub array: Option<(Sort, Sort)>,
}

fn array_sorts(sig: &Signature) -> Option<(Sort, Sort)> {
    let sel = sig.function("select")?;
    let st = sig.function("store")?;
    let (arr, elem) = (sel.args.first()?.clone(), sel.range.clone());
    let ok = sel.args.len() == 2
        && sel.args[1].is_int()
        && st.args == vec![arr.clone(), Sort::int(), elem.clone()]
        && st.range == arr;
    ok.then_some((arr, elem))
}

/// Replaces each variable by its first grounding definition and drops that
/// definition atom.
fn inline_definitions(c: &ZClause) -> Result<ZClause> {
    let mut sigma = Substitution::new();
    let mut used = BTreeSet::new();
    for (i, a) in c.constraints.iter().enumerate() {
        if let Some((x, t)) = a.as_grounding_abstraction() {
            if sigma.get(x).is_none() {
                sigma.bind(x.clone(), t.clone())?;
                used.insert(i);
            }
        }
    }
    let kept = c
        .constraints
        .iter()
        .enumerate()
        .filter(|(i, _)| !used.contains(i))
        .map(|(_, a)| a.clone())
        .collect();
    let out = ZClause {
        constraints: kept,
        ..c.clone()
    }
    .apply(&sigma);
    if let Some(v) = out.vars().into_iter().next() {
        return Err(Error::Invariant(format!(
            "variable `{}` left in ground clause {c}",
            v.name
        )));
    }
    Ok(out)
}

impl GroundProblem {
    /// Inlines grounding abstractions and declares every symbol the clauses use.
    pub fn from_clauses(signature: &Signature, clauses: &[ZClause]) -> Result<Self> {
        let mut sig = signature.clone();
        let clauses = clauses
            .iter()
            .map(inline_definitions)
            .collect::<Result<Vec<_>>>()?;
        for c in &clauses {
            for a in c.atoms() {
                for t in a.terms() {
                    let mut missing = Vec::new();
                    t.visit(&mut |s| {
                        if let Term::App { head, args, sort } = s {
                            if !is_reserved(head) && !sig.has_function(head) {
                                missing.push((
                                    head.to_string(),
                                    Profile::new(
                                        args.iter().map(Term::sort).collect(),
                                        sort.clone(),
                                    ),
                                ));
                            }
                        }
                    });
                    for (name, p) in missing {
                        for s in p.args.iter().chain([&p.range]) {
                            sig.declare_sort(s.clone());
                        }
                        sig.declare_function(&name, p)?;
                    }
                }
            }
        }
        let array = array_sorts(&sig);
        Ok(GroundProblem {
            signature: sig,
            clauses,
            logic: if array.is_some() {
                Logic::QfAuflia
            } else {
                Logic::QfUflia
            },
            array,
        })
    }
}

const SMT_RESERVED: &[&str] = &[
    "and", "or", "not", "=>", "xor", "=", "distinct", "ite", "true", "false", "Bool", "Int",
    "Array", "div", "mod", "abs", "*", "<=", "<", ">=", ">", "let", "forall", "exists", "!", "_",
    "as", "par", "NUMERAL", "DECIMAL", "STRING", "select", "store",
];

fn symbol(name: &str) -> String {
    if SMT_RESERVED.contains(&name) {
        format!("{name}!s")
    } else if name
        .chars()
        .any(|c| c.is_whitespace() || "()|;\"'".contains(c))
    {
        format!("|{}|", name.replace('|', "!"))
    } else {
        name.to_string()
    }
}

struct Emitter<'a> {
    g: &'a GroundProblem,
}

impl Emitter<'_> {
    fn sort(&self, s: &Sort) -> String {
        match &self.g.array {
            _ if s.is_int() => "Int".into(),
            Some((arr, elem)) if arr == s => format!("(Array Int {})", self.sort(elem)),
            _ => symbol(s.name()),
        }
    }

    fn builtin(&self, head: &str) -> bool {
        self.g.array.is_some() && (head == "select" || head == "store")
    }

    fn term(&self, t: &Term, out: &mut String) {
        match t {
            Term::Num(n) if n.is_negative() => {
                let _ = write!(out, "(- {})", -n);
            }
            Term::Num(n) => {
                let _ = write!(out, "{n}");
            }
            Term::Var(v) => out.push_str(&symbol(&v.name)),
            Term::App { head, args, .. } if &**head == "+" && args.len() == 2 => match &args[1] {
                Term::Num(k) if k.is_negative() => {
                    out.push_str("(- ");
                    self.term(&args[0], out);
                    let _ = write!(out, " {})", -k);
                }
                _ => {
                    out.push_str("(+ ");
                    self.term(&args[0], out);
                    out.push(' ');
                    self.term(&args[1], out);
                    out.push(')');
                }
            },
            Term::App { head, args, .. } => {
                let name = if self.builtin(head) || is_reserved(head) {
                    head.to_string()
                } else {
                    symbol(head)
                };
                if args.is_empty() {
                    out.push_str(&name);
                    return;
                }
                let _ = write!(out, "({name}");
                for a in args {
                    out.push(' ');
                    self.term(a, out);
                }
                out.push(')');
            }
        }
    }

    fn atom(&self, a: &Atom, out: &mut String) -> Result<()> {
        let (op, l, r) = match a {
            Atom::Eq(l, r) => ("=", l, r),
            Atom::Leq(l, r) => ("<=", l, r),
            Atom::InImage(..) => {
                return Err(Error::Invariant(format!(
                    "image atom {a} reached the emitter"
                )))
            }
        };
        let _ = write!(out, "({op} ");
        self.term(&normalize_numerals(l), out);
        out.push(' ');
        self.term(&normalize_numerals(r), out);
        out.push(')');
        Ok(())
    }

    fn clause(&self, c: &ZClause, out: &mut String) -> Result<()> {
        let mut lits = Vec::new();
        for a in c.constraints.iter().chain(&c.ante) {
            let mut s = String::from("(not ");
            self.atom(a, &mut s)?;
            s.push(')');
            lits.push(s);
        }
        for a in &c.succ {
            let mut s = String::new();
            self.atom(a, &mut s)?;
            lits.push(s);
        }
        match lits.len() {
            0 => out.push_str("(assert false)\n"),
            1 => {
                let _ = writeln!(out, "(assert {})", lits[0]);
            }
            _ => {
                let _ = writeln!(out, "(assert (or {}))", lits.join(" "));
            }
        }
        Ok(())
    }
}

/// SMT-LIB2 text for a ground problem, ending in `(check-sat)`.
pub fn emit_smtlib(g: &GroundProblem) -> Result<String> {
    let e = Emitter { g };
    let mut out = format!("(set-logic {})\n", g.logic.name());
    for s in g.signature.sorts() {
        if s.is_int() || g.array.as_ref().is_some_and(|(a, _)| a == s) {
            continue;
        }
        let _ = writeln!(out, "(declare-sort {} 0)", symbol(s.name()));
    }
    for (name, p) in g.signature.functions() {
        if e.builtin(name) {
            continue;
        }
        let args: Vec<String> = p.args.iter().map(|s| e.sort(s)).collect();
        let _ = writeln!(
            out,
            "(declare-fun {} ({}) {})",
            symbol(name),
            args.join(" "),
            e.sort(&p.range)
        );
    }
    for c in &g.clauses {
        e.clause(c, &mut out)?;
    }
    out.push_str("(check-sat)\n");
    Ok(out)
}

fn smt_sort(sig: &Signature, e: &SExpr) -> Result<Sort> {
    let name = e
        .as_atom()
        .ok_or_else(|| e.error("only named sorts are supported"))?;
    let s = Sort::new(name);
    if !sig.has_sort(&s) {
        return Err(e.error(format!("undeclared sort `{name}`")));
    }
    Ok(s)
}

/// Rewrites `<`, `>`, `>=` and `=>` into the native connectives.
fn desugar(e: &SExpr) -> SExpr {
    let (line, column) = e.position();
    let mk = |items: Vec<SExpr>| SExpr::List {
        items,
        line,
        column,
    };
    let sym = |t: &str| SExpr::Atom {
        text: t.into(),
        line,
        column,
    };
    let Some(items) = e.as_list() else {
        return e.clone();
    };
    let items: Vec<SExpr> = items.iter().map(desugar).collect();
    let plus1 = |t: &SExpr| mk(vec![sym("+"), t.clone(), sym("1")]);
    match (e.head(), items.len()) {
        (Some("<"), 3) => mk(vec![sym("<="), plus1(&items[1]), items[2].clone()]),
        (Some(">"), 3) => mk(vec![sym("<="), plus1(&items[2]), items[1].clone()]),
        (Some(">="), 3) => mk(vec![sym("<="), items[2].clone(), items[1].clone()]),
        (Some("=>"), 3) => mk(vec![
            sym("or"),
            mk(vec![sym("not"), items[1].clone()]),
            items[2].clone(),
        ]),
        _ => mk(items),
    }
}

/// Disjuncts of a clause body as (literal, negated) pairs.
fn disjuncts(e: &SExpr, negated: bool, out: &mut Vec<(SExpr, bool)>) -> Result<()> {
    let items = e.as_list().unwrap_or(&[]);
    match (e.head(), negated) {
        (Some("or"), false) | (Some("and"), true) => {
            for it in &items[1..] {
                disjuncts(it, negated, out)?;
            }
        }
        (Some("not"), _) if items.len() == 2 => disjuncts(&items[1], !negated, out)?,
        (Some("and"), false) | (Some("or"), true) => {
            return Err(e.error("conjunctions must be split into separate assertions"))
        }
        _ => out.push((e.clone(), negated)),
    }
    Ok(())
}

/// Reads the accepted SMT-LIB2 subset: sort and function declarations and
/// assertions that are clauses, optionally under a top-level `forall`.
pub fn parse_smtlib(text: &str) -> Result<Problem> {
    let mut sig = Signature::new();
    let mut clauses = Vec::new();
    for e in parse_sexprs(text)? {
        let items = e.as_list().ok_or_else(|| e.error("expected a command"))?;
        match e.head() {
            Some("set-logic" | "set-info" | "set-option" | "check-sat" | "exit" | "get-model") => {}
            Some("declare-sort") => {
                let name = items
                    .get(1)
                    .and_then(SExpr::as_atom)
                    .ok_or_else(|| e.error("expected a sort name"))?;
                sig.declare_sort(Sort::new(name));
            }
            Some("declare-const") if items.len() == 3 => {
                let name = items[1]
                    .as_atom()
                    .ok_or_else(|| e.error("expected a name"))?;
                let range = smt_sort(&sig, &items[2])?;
                sig.declare_function(name, Profile::constant(range))
                    .map_err(|err| e.error(err.to_string()))?;
            }
            Some("declare-fun") if items.len() == 4 => {
                let name = items[1]
                    .as_atom()
                    .ok_or_else(|| e.error("expected a name"))?;
                let args = items[2]
                    .as_list()
                    .ok_or_else(|| items[2].error("expected argument sorts"))?
                    .iter()
                    .map(|s| smt_sort(&sig, s))
                    .collect::<Result<Vec<_>>>()?;
                let range = smt_sort(&sig, &items[3])?;
                sig.declare_function(name, Profile::new(args, range))
                    .map_err(|err| e.error(err.to_string()))?;
            }
            Some("assert") if items.len() == 2 => {
                let mut vars = BTreeMap::new();
                let mut body = &items[1];
                if body.head() == Some("forall") {
                    let parts = body.as_list().expect("list");
                    if parts.len() != 3 {
                        return Err(body.error("malformed forall"));
                    }
                    for d in parts[1]
                        .as_list()
                        .ok_or_else(|| parts[1].error("expected bindings"))?
                    {
                        let pair = d
                            .as_list()
                            .filter(|p| p.len() == 2)
                            .ok_or_else(|| d.error("expected (name sort)"))?;
                        let name = pair[0]
                            .as_atom()
                            .ok_or_else(|| pair[0].error("expected a name"))?;
                        vars.insert(name.to_string(), Var::new(name, smt_sort(&sig, &pair[1])?));
                    }
                    body = &parts[2];
                }
                let reader = TermReader { sig: &sig, vars };
                let mut lits = Vec::new();
                disjuncts(&desugar(body), false, &mut lits)?;
                let mut c = ZClause::new(vec![], vec![], vec![]);
                for (lit, neg) in lits {
                    if lit.as_atom() == Some("false") {
                        continue;
                    }
                    if lit.head().is_some_and(|h| h == "exists" || h == "forall") {
                        return Err(lit.error("nested quantifiers are not supported"));
                    }
                    let (atom, inner) = reader.literal(&lit)?;
                    place(&mut c, Part::Succ, atom, neg != inner);
                }
                clauses.extend(to_z_clauses(&c));
            }
            _ => return Err(e.error(format!("unsupported command `{e}`"))),
        }
    }
    let theory = if sig.has_function("select") || sig.has_function("store") {
        Theory::ArraysInt
    } else {
        Theory::Generic
    };
    Ok(Problem::new(sig, clauses, theory))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arrays_sig() -> Signature {
        let mut sig = Signature::new();
        let (arr, elem) = (Sort::new("Array"), Sort::new("Elem"));
        sig.declare_sort(arr.clone());
        sig.declare_sort(elem.clone());
        sig.declare_function(
            "select",
            Profile::new(vec![arr.clone(), Sort::int()], elem.clone()),
        )
        .unwrap();
        sig.declare_function(
            "store",
            Profile::new(vec![arr.clone(), Sort::int(), elem.clone()], arr.clone()),
        )
        .unwrap();
        for (n, s) in [("a", arr), ("e", elem)] {
            sig.declare_function(n, Profile::constant(s)).unwrap();
        }
        sig.declare_function("u", Profile::constant(Sort::int()))
            .unwrap();
        sig
    }

    #[test]
    fn read_over_write_unit() {
        let sig = arrays_sig();
        let (arr, elem) = (Sort::new("Array"), Sort::new("Elem"));
        let u = Term::int_const("u");
        let st = Term::app(
            "store",
            vec![
                Term::constant("a", arr),
                u.clone(),
                Term::constant("e", elem.clone()),
            ],
            Sort::new("Array"),
        );
        let c = ZClause::new(
            vec![],
            vec![],
            vec![Atom::eq(
                Term::app("select", vec![st, u], elem),
                Term::constant("e", Sort::new("Elem")),
            )],
        );
        let g = GroundProblem::from_clauses(&sig, &[c]).unwrap();
        let text = emit_smtlib(&g).unwrap();
        assert!(text.starts_with("(set-logic QF_AUFLIA)\n(declare-sort Elem 0)\n"));
        assert!(text.contains("(declare-fun a () (Array Int Elem))"));
        assert!(text.contains("(assert (= (select (store a u e) u) e))"));
    }

    #[test]
    fn grounding_atoms_are_inlined() {
        let x = Term::int_var("x");
        let s = Term::int_const("s");
        let t = Term::int_const("t");
        let c = ZClause::new(
            vec![Atom::leq(s, Term::offset(x.clone(), -1)), Atom::eq(x, t)],
            vec![],
            vec![],
        );
        let g = GroundProblem::from_clauses(&Signature::new(), &[c]).unwrap();
        let text = emit_smtlib(&g).unwrap();
        assert!(text.contains("(assert (not (<= s (- t 1))))"), "{text}");
        assert!(text.contains("(declare-fun t () Int)"));
    }

    #[test]
    fn empty_problem_is_header_only() {
        let g = GroundProblem::from_clauses(&Signature::new(), &[]).unwrap();
        assert_eq!(
            emit_smtlib(&g).unwrap(),
            "(set-logic QF_UFLIA)\n(check-sat)\n"
        );
    }

    #[test]
    fn residual_variable_is_an_invariant_breach() {
        let y = Term::int_var("y");
        let c = ZClause::new(vec![Atom::leq(y.clone(), y)], vec![], vec![]);
        assert!(matches!(
            GroundProblem::from_clauses(&Signature::new(), &[c]),
            Err(Error::Invariant(_))
        ));
    }

    #[test]
    fn smtlib_subset_reads_clauses() {
        let text = "
            (declare-sort S 0)
            (declare-fun c () S)
            (declare-fun f (Int) S)
            (declare-const k Int)
            (assert (forall ((x Int)) (=> (and (<= 0 x) (< x k)) (= (f x) c))))
            (check-sat)
        ";
        let p = parse_smtlib(text).unwrap();
        assert_eq!(p.clauses.len(), 1);
        let c = &p.clauses[0];
        assert_eq!(c.constraints.len(), 2);
        assert!(c.is_well_formed());
    }
}
