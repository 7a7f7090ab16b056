//! Seeded random problems for differential testing. Each generator writes
//! native text and parses it, so the output goes through the same
//! purification as user input.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::frontend::parse_native;
use crate::term::Signature;
use crate::zclause::{validate_az_problem, Problem};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AzParams {
    /// At most 3.
    pub arrays: usize,
    /// At most 4.
    pub clauses: usize,
    /// Quantified integer variables per clause, at most 2.
    pub vars_per_clause: usize,
    pub int_consts: usize,
    pub elems: usize,
}

impl Default for AzParams {
    fn default() -> Self {
        AzParams {
            arrays: 2,
            clauses: 3,
            vars_per_clause: 1,
            int_consts: 2,
            elems: 2,
        }
    }
}

fn offset(rng: &mut ChaCha8Rng, t: &str) -> String {
    match rng.gen_range(0..4) {
        0 => format!("(su {t})"),
        1 => format!("(prc {t})"),
        _ => t.to_string(),
    }
}

fn az_clause(rng: &mut ChaCha8Rng, p: &AzParams, out: &mut String) {
    let arr = |rng: &mut ChaCha8Rng| format!("a{}", rng.gen_range(0..p.arrays));
    let int = |rng: &mut ChaCha8Rng| format!("c{}", rng.gen_range(0..p.int_consts));
    let elem = |rng: &mut ChaCha8Rng| format!("e{}", rng.gen_range(0..p.elems));
    match rng.gen_range(0..3) {
        0 => {
            let (l, r) = (int(rng), int(rng));
            let r = offset(rng, &r);
            let _ = write!(out, "(zclause (constraints (le {l} {r})))");
        }
        1 if p.vars_per_clause > 0 => {
            let n = rng.gen_range(1..=p.vars_per_clause);
            let vars: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
            out.push_str("(zclause (vars");
            for v in &vars {
                let _ = write!(out, " ({v} Int)");
            }
            out.push_str(") (constraints");
            for v in &vars {
                if rng.gen_bool(0.7) {
                    let c = int(rng);
                    let _ = write!(out, " (le {} {v})", offset(rng, &c));
                }
                if rng.gen_bool(0.7) {
                    let c = int(rng);
                    let _ = write!(out, " (le {v} {})", offset(rng, &c));
                }
            }
            let read = |rng: &mut ChaCha8Rng| {
                let v = vars.choose(rng).expect("a variable");
                let a = arr(rng);
                if rng.gen_bool(0.3) {
                    let (b, w) = (arr(rng), vars.choose(rng).expect("a variable"));
                    format!("(eq (select {a} {v}) (select {b} {w}))")
                } else {
                    format!("(eq (select {a} {v}) {})", elem(rng))
                }
            };
            out.push_str(") (ante");
            if rng.gen_bool(0.4) {
                let _ = write!(out, " {}", read(rng));
            }
            out.push_str(") (succ");
            for _ in 0..rng.gen_range(1..=2) {
                let _ = write!(out, " {}", read(rng));
            }
            out.push_str("))");
        }
        _ => {
            let lit = |rng: &mut ChaCha8Rng| match rng.gen_range(0..3) {
                0 => format!("(eq (select {} {}) {})", arr(rng), int(rng), elem(rng)),
                1 => format!(
                    "(eq {} (store {} {} {}))",
                    arr(rng),
                    arr(rng),
                    int(rng),
                    elem(rng)
                ),
                _ => format!("(eq {} {})", elem(rng), elem(rng)),
            };
            let ante: Vec<String> = (0..rng.gen_range(0..=1)).map(|_| lit(rng)).collect();
            let succ: Vec<String> = (0..rng.gen_range(1..=2)).map(|_| lit(rng)).collect();
            let _ = write!(
                out,
                "(zclause (ante {}) (succ {}))",
                ante.join(" "),
                succ.join(" ")
            );
        }
    }
    out.push('\n');
}

/// A random problem in the decidable array fragment. Draws that fail
/// validation are redrawn from the same stream.
pub fn generate_random_az(seed: u64, params: &AzParams) -> Result<Problem> {
    if params.arrays == 0 || params.arrays > 3 || params.clauses > 4 || params.vars_per_clause > 2 {
        return Err(Error::Precondition(format!(
            "generator parameters out of range: {params:?}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut header = String::from(
        "(sorts Elem Array)\n(functions (select Array Int Elem) (store Array Int Elem Array)",
    );
    for i in 0..params.arrays {
        let _ = write!(header, " (a{i} Array)");
    }
    for i in 0..params.int_consts.max(1) {
        let _ = write!(header, " (c{i} Int)");
    }
    for i in 0..params.elems.max(1) {
        let _ = write!(header, " (e{i} Elem)");
    }
    header.push_str(")\n(theory arrays-int)\n");
    let params = AzParams {
        int_consts: params.int_consts.max(1),
        elems: params.elems.max(1),
        ..*params
    };
    for _ in 0..64 {
        let mut text = header.clone();
        for _ in 0..params.clauses {
            az_clause(&mut rng, &params, &mut text);
        }
        let p = parse_native(&text)?;
        if validate_az_problem(&p).is_valid() {
            return Ok(p);
        }
    }
    Err(Error::Invariant(format!(
        "no valid problem drawn for seed {seed}"
    )))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StratifiedParams {
    /// At most 4.
    pub sorts: usize,
    /// At most 6, constants included.
    pub functions: usize,
    pub clauses: usize,
}

impl Default for StratifiedParams {
    fn default() -> Self {
        StratifiedParams {
            sorts: 2,
            functions: 4,
            clauses: 3,
        }
    }
}

/// `(sort, functions)` text of a stratified signature: sort `S{i}` only
/// receives functions from lower-numbered sorts, and `S0` gets a constant.
fn stratified_decls(
    rng: &mut ChaCha8Rng,
    p: &StratifiedParams,
) -> (String, Vec<(String, Vec<usize>, usize)>) {
    let mut funcs = vec![("k0".to_string(), vec![], 0)];
    for s in 1..p.sorts {
        if funcs.len() >= p.functions {
            break;
        }
        let arity = rng.gen_range(1..=2);
        let args = (0..arity).map(|_| rng.gen_range(0..s)).collect();
        funcs.push((format!("f{s}"), args, s));
    }
    while funcs.len() < p.functions {
        let range = rng.gen_range(0..p.sorts);
        let i = funcs.len();
        if range == 0 || rng.gen_bool(0.3) {
            funcs.push((format!("k{i}"), vec![], range));
        } else {
            let args = (0..rng.gen_range(1..=2))
                .map(|_| rng.gen_range(0..range))
                .collect();
            funcs.push((format!("g{i}"), args, range));
        }
    }
    let mut text = String::from("(sorts");
    for s in 0..p.sorts {
        let _ = write!(text, " S{s}");
    }
    text.push_str(")\n(functions");
    for (name, args, range) in &funcs {
        let _ = write!(text, " ({name}");
        for a in args {
            let _ = write!(text, " S{a}");
        }
        let _ = write!(text, " S{range})");
    }
    text.push_str(")\n");
    (text, funcs)
}

fn check_stratified(p: &StratifiedParams) -> Result<()> {
    if p.sorts == 0 || p.sorts > 4 || p.functions == 0 || p.functions > 6 || p.functions < p.sorts {
        return Err(Error::Precondition(format!(
            "generator parameters out of range: {p:?}"
        )));
    }
    Ok(())
}

pub fn generate_stratified_signature(seed: u64, params: &StratifiedParams) -> Result<Signature> {
    check_stratified(params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (text, _) = stratified_decls(&mut rng, params);
    Ok(parse_native(&format!("{text}(theory stratified)\n"))?.signature)
}

/// A term of sort `s` of depth at most `depth`, using variable `v{s}`.
fn strat_term(
    rng: &mut ChaCha8Rng,
    funcs: &[(String, Vec<usize>, usize)],
    s: usize,
    depth: usize,
) -> String {
    let options: Vec<&(String, Vec<usize>, usize)> = funcs
        .iter()
        .filter(|(_, args, r)| *r == s && (depth > 0 || args.is_empty()))
        .collect();
    if options.is_empty() || rng.gen_bool(0.35) {
        return format!("v{s}");
    }
    let (name, args, _) = options.choose(rng).expect("nonempty");
    if args.is_empty() {
        return name.clone();
    }
    let parts: Vec<String> = args
        .iter()
        .map(|&a| strat_term(rng, funcs, a, depth - 1))
        .collect();
    format!("({name} {})", parts.join(" "))
}

fn strat_clauses(
    rng: &mut ChaCha8Rng,
    funcs: &[(String, Vec<usize>, usize)],
    sorts: usize,
    n: usize,
) -> String {
    let mut text = String::new();
    for _ in 0..n {
        let lit = |rng: &mut ChaCha8Rng| {
            let s = rng.gen_range(0..sorts);
            format!(
                "(eq {} {})",
                strat_term(rng, funcs, s, 2),
                strat_term(rng, funcs, s, 2)
            )
        };
        let ante: Vec<String> = (0..rng.gen_range(0..=1)).map(|_| lit(rng)).collect();
        let succ: Vec<String> = (0..rng.gen_range(1..=2)).map(|_| lit(rng)).collect();
        let body = format!("{} {}", ante.join(" "), succ.join(" "));
        let mut vars = String::new();
        for s in 0..sorts {
            if body.contains(&format!("v{s}")) {
                let _ = write!(vars, " (v{s} S{s})");
            }
        }
        let _ = writeln!(
            text,
            "(zclause (vars{vars}) (ante {}) (succ {}))",
            ante.join(" "),
            succ.join(" ")
        );
    }
    text
}

pub fn generate_stratified_problem(seed: u64, params: &StratifiedParams) -> Result<Problem> {
    check_stratified(params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut text, funcs) = stratified_decls(&mut rng, params);
    text.push_str("(theory stratified)\n");
    text.push_str(&strat_clauses(
        &mut rng,
        &funcs,
        params.sorts,
        params.clauses,
    ));
    parse_native(&text)
}

/// A problem over `A` and `B` where `B` is only reached through two
/// functions `f, g : A → B`, so the image side condition holds.
pub fn generate_st2_problem(seed: u64, clauses: usize) -> Result<Problem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut text =
        String::from("(sorts A B)\n(functions (a0 A) (a1 A) (f A B) (g A B))\n(theory st2)\n");
    let b_term = |rng: &mut ChaCha8Rng| match rng.gen_range(0..3) {
        0 => "y".to_string(),
        1 => format!("(f {})", ["a0", "a1", "x"].choose(rng).expect("nonempty")),
        _ => format!("(g {})", ["a0", "a1", "x"].choose(rng).expect("nonempty")),
    };
    for _ in 0..clauses {
        let lit = |rng: &mut ChaCha8Rng| match rng.gen_range(0..3) {
            0 => format!(
                "(in-image {} {})",
                b_term(rng),
                ["f", "g"].choose(rng).expect("nonempty")
            ),
            1 => format!("(eq {} {})", b_term(rng), b_term(rng)),
            _ => format!(
                "(eq {} {})",
                ["a0", "a1", "x"].choose(rng).expect("nonempty"),
                ["a0", "a1", "x"].choose(rng).expect("nonempty")
            ),
        };
        let ante: Vec<String> = (0..rng.gen_range(0..=1)).map(|_| lit(&mut rng)).collect();
        let succ: Vec<String> = (0..rng.gen_range(1..=2)).map(|_| lit(&mut rng)).collect();
        let body = format!("{} {}", ante.join(" "), succ.join(" "));
        let mut vars = String::new();
        if body.contains(" x)") || body.contains(" x ") {
            vars.push_str(" (x A)");
        }
        if body.contains(" y)") || body.contains(" y ") {
            vars.push_str(" (y B)");
        }
        let _ = writeln!(
            text,
            "(zclause (vars{vars}) (ante {}) (succ {}))",
            ante.join(" "),
            succ.join(" ")
        );
    }
    parse_native(&text)
}
