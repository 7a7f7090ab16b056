use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::grounder::BoundSet;
use crate::term::{Atom, Profile, Symbol, Term, Var};
use crate::zclause::{separate_arithmetic, FreshNames, Problem, ZClause};

use super::stratified::{ground_stratified, integer_pool};
use super::InstantiationScheme;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct St2Options {
    /// Append `f(x̄) ≐ g(ȳ) ⇒ xᵢ ≐ yᵢ` for every image symbol `f` and `g ∈ Σ_f`.
    pub add_injectivity: bool,
}

impl Default for St2Options {
    fn default() -> Self {
        St2Options {
            add_injectivity: true,
        }
    }
}

/// `Σ_f` for each symbol used in an image atom, after checking that every
/// function with the range of `f` has the profile of `f`.
fn image_families(p: &Problem) -> Result<BTreeMap<Symbol, (Profile, Vec<Symbol>)>> {
    let mut used = BTreeSet::new();
    for c in &p.clauses {
        for a in c.atoms() {
            if let Atom::InImage(_, f) = a {
                used.insert(f.clone());
            }
        }
    }
    let mut out = BTreeMap::new();
    for f in used {
        let profile = p
            .signature
            .function(&f)
            .ok_or_else(|| Error::UnknownSymbol(f.clone()))?
            .clone();
        if profile.range.is_int() {
            return Err(Error::Unsupported(format!("image of integer-valued `{f}`")));
        }
        let mut family = Vec::new();
        for (g, q) in p.signature.functions() {
            if q.range != profile.range {
                continue;
            }
            if q != &profile {
                return Err(Error::ProfileMismatch(format!(
                    "`{g}` has range {} like `{f}` but a different profile",
                    q.range
                )));
            }
            family.push(g.clone());
        }
        out.insert(f, (profile, family));
    }
    Ok(out)
}

fn fresh_args(profile: &Profile, names: &mut FreshNames) -> Vec<Term> {
    profile
        .args
        .iter()
        .map(|s| Term::var(Var::new(&names.next_name(), s.clone())))
        .collect()
}

fn is_tautology(c: &ZClause) -> bool {
    c.succ.iter().any(|a| match a {
        Atom::Eq(l, r) => l == r,
        _ => c.ante.contains(a),
    })
}

/// Rewrites one clause until it has no image atoms.
fn rewrite_clause(
    c: ZClause,
    families: &BTreeMap<Symbol, (Profile, Vec<Symbol>)>,
    names: &mut FreshNames,
) -> Vec<ZClause> {
    let mut done = Vec::new();
    let mut work = vec![c];
    while let Some(mut c) = work.pop() {
        if let Some(i) = c.ante.iter().position(|a| matches!(a, Atom::InImage(..))) {
            // t ∉ Im(f) becomes t ≉ f(x̄) for fresh x̄.
            let Atom::InImage(t, f) = c.ante[i].clone() else {
                unreachable!()
            };
            let (profile, _) = &families[&f];
            let image = Term::app(&f, fresh_args(profile, names), profile.range.clone());
            c.ante[i] = Atom::eq(t, image);
            work.push(c);
            continue;
        }
        let Some(i) = c.succ.iter().position(|a| matches!(a, Atom::InImage(..))) else {
            if !is_tautology(&c) {
                done.push(c);
            }
            continue;
        };
        let Atom::InImage(t, f) = c.succ[i].clone() else {
            unreachable!()
        };
        let (profile, family) = &families[&f];
        if t.is_var() {
            // Rule 1, one clause per g ∈ Σ_f; pushed in reverse so output follows Σ_f order.
            for g in family.iter().rev() {
                let image = Term::app(g, fresh_args(profile, names), profile.range.clone());
                let mut d = c.clone();
                d.ante.push(Atom::eq(t.clone(), image.clone()));
                d.succ[i] = Atom::InImage(image, f.clone());
                work.push(d);
            }
        } else {
            // Rule 2: g(t̄) ∈ Im(f) becomes g(t̄) ≐ f(t̄).
            let other = Term::app(&f, t.args().to_vec(), profile.range.clone());
            c.succ[i] = Atom::eq(t, other);
            work.push(c);
        }
    }
    done.reverse();
    done
}

/// `f(x̄) ≐ g(ȳ) ⇒ xᵢ ≐ yᵢ` for every image symbol `f`, every `g ∈ Σ_f` and
/// every argument position.
pub fn injectivity_axioms(p: &Problem) -> Result<Vec<ZClause>> {
    let families = image_families(p)?;
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (f, (profile, family)) in &families {
        for g in family {
            let key = if f <= g {
                (f.clone(), g.clone())
            } else {
                (g.clone(), f.clone())
            };
            if profile.args.is_empty() || !seen.insert(key) {
                continue;
            }
            let xs: Vec<Term> = profile
                .args
                .iter()
                .enumerate()
                .map(|(i, s)| Term::var(Var::new(&format!("x{i}"), s.clone())))
                .collect();
            let ys: Vec<Term> = profile
                .args
                .iter()
                .enumerate()
                .map(|(i, s)| Term::var(Var::new(&format!("y{i}"), s.clone())))
                .collect();
            let hyp = Atom::eq(
                Term::app(f, xs.clone(), profile.range.clone()),
                Term::app(g, ys.clone(), profile.range.clone()),
            );
            for (x, y) in xs.iter().zip(&ys) {
                let c = ZClause::new(
                    vec![],
                    vec![hyp.clone()],
                    vec![Atom::eq(x.clone(), y.clone())],
                )
                .with_origin("axiom:injectivity");
                out.extend(separate_arithmetic(&c));
            }
        }
    }
    Ok(out)
}

/// Eliminates image atoms, giving a problem over the same stratified signature.
pub fn transform_st2(p: &Problem, opts: St2Options) -> Result<Problem> {
    let families = image_families(p)?;
    if families.is_empty() {
        return Ok(p.clone());
    }
    let taken = p
        .clauses
        .iter()
        .flat_map(|c| c.vars())
        .map(|v| v.name.to_string());
    let mut names = FreshNames::new("v", taken);
    let mut clauses = Vec::new();
    for c in &p.clauses {
        clauses.extend(rewrite_clause(c.clone(), &families, &mut names));
    }
    if opts.add_injectivity {
        clauses.extend(injectivity_axioms(p)?);
    }
    Ok(Problem {
        signature: p.signature.clone(),
        clauses,
        theory: p.theory,
    })
}

#[derive(Default)]
pub struct St2Scheme {
    pub options: St2Options,
}

impl InstantiationScheme for St2Scheme {
    fn name(&self) -> &'static str {
        "st2"
    }

    fn description(&self) -> &'static str {
        "image atoms rewritten to equations, then stratified enumeration"
    }

    fn preprocess(&self, p: &Problem) -> Result<Problem> {
        transform_st2(p, self.options)
    }

    fn ground(&self, p: &Problem, b: &BoundSet) -> Result<Vec<ZClause>> {
        ground_stratified(p, integer_pool(p, Some(b)))
    }
}
