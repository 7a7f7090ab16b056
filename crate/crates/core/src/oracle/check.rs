//! Clause-by-clause re-check of a finished model. Written against total
//! tables so that it shares no code with the search.

use std::collections::BTreeMap;

use super::eval::Value;
use super::Model;
use crate::term::{cartesian, Atom, Term, Var};
use crate::zclause::Problem;

fn default_of(m: &Model, sort: &crate::term::Sort) -> Value {
    if sort.is_int() {
        Value::Int(-m.frame.radius)
    } else {
        Value::Elem(0)
    }
}

fn read(m: &Model, arr: &Value, i: i64) -> Value {
    let Value::Array { base, writes } = arr else {
        panic!("array expected")
    };
    match writes.iter().rev().find(|(j, _)| *j == i) {
        Some((_, v)) => v.clone(),
        None => m.bases.get(&(*base, i)).cloned().unwrap_or_else(|| {
            let (_, elem) = m.frame.array.as_ref().expect("array theory");
            default_of(m, elem)
        }),
    }
}

fn value(m: &Model, t: &Term, env: &BTreeMap<Var, Value>) -> Result<Value, String> {
    let as_int = |v: Value| match v {
        Value::Int(n) => Ok(n),
        other => Err(format!("non-integer {other:?} in arithmetic")),
    };
    Ok(match t {
        Term::Num(n) => Value::Int(i64::try_from(n).map_err(|e| e.to_string())?),
        Term::Var(v) => env.get(v).cloned().ok_or(format!("unbound {}", v.name))?,
        Term::App { head, args, sort } => {
            let vals = args
                .iter()
                .map(|a| value(m, a, env))
                .collect::<Result<Vec<_>, _>>()?;
            let arrays = m.frame.array.is_some();
            match (&**head, vals.as_slice()) {
                ("+", [a, b]) => Value::Int(as_int(a.clone())? + as_int(b.clone())?),
                ("-", [a]) => Value::Int(-as_int(a.clone())?),
                ("-", [a, b]) => Value::Int(as_int(a.clone())? - as_int(b.clone())?),
                ("select", [a, i]) if arrays => read(m, a, as_int(i.clone())?),
                ("store", [a, i, e]) if arrays => {
                    let Value::Array { base, writes } = a else {
                        return Err("store on non-array".into());
                    };
                    let i = as_int(i.clone())?;
                    let mut writes: Vec<_> =
                        writes.iter().filter(|(j, _)| *j != i).cloned().collect();
                    writes.push((i, e.clone()));
                    Value::Array {
                        base: *base,
                        writes,
                    }
                }
                (name, []) if sort.is_int() => {
                    Value::Int(*m.ints.get(name).ok_or(format!("no value for {name}"))?)
                }
                (name, []) if m.frame.is_array(sort) => Value::Array {
                    base: m.frame.array_consts[name],
                    writes: vec![],
                },
                _ => m
                    .funcs
                    .get(&(head.clone(), vals))
                    .cloned()
                    .unwrap_or_else(|| default_of(m, sort)),
            }
        }
    })
}

fn holds(m: &Model, p: &Problem, a: &Atom, env: &BTreeMap<Var, Value>) -> Result<bool, String> {
    Ok(match a {
        Atom::Leq(l, r) => match (value(m, l, env)?, value(m, r, env)?) {
            (Value::Int(x), Value::Int(y)) => x <= y,
            _ => return Err(format!("non-integer comparison in {a}")),
        },
        Atom::Eq(l, r) if m.frame.is_array(&l.sort()) => {
            let (x, y) = (value(m, l, env)?, value(m, r, env)?);
            m.frame
                .window
                .iter()
                .all(|&i| read(m, &x, i) == read(m, &y, i))
        }
        Atom::Eq(l, r) => value(m, l, env)? == value(m, r, env)?,
        Atom::InImage(t, f) => {
            let target = value(m, t, env)?;
            let profile = p.signature.function(f).ok_or(format!("undeclared {f}"))?;
            let columns = profile
                .args
                .iter()
                .map(|s| m.frame.var_range(s).map_err(|e| e.to_string()))
                .collect::<Result<Vec<_>, _>>()?;
            let refs: Vec<&[Value]> = columns.iter().map(Vec::as_slice).collect();
            cartesian(&refs).into_iter().any(|args| {
                m.funcs
                    .get(&(f.clone(), args))
                    .cloned()
                    .unwrap_or_else(|| default_of(m, &profile.range))
                    == target
            })
        }
    })
}

/// Checks every clause instance against the model; the error names the
/// first violated clause.
pub fn check_model(p: &Problem, m: &Model) -> Result<(), String> {
    for c in &p.clauses {
        let vars: Vec<Var> = c.vars().into_iter().collect();
        let columns = vars
            .iter()
            .map(|v| m.frame.var_range(&v.sort).map_err(|e| e.to_string()))
            .collect::<Result<Vec<_>, _>>()?;
        let refs: Vec<&[Value]> = columns.iter().map(Vec::as_slice).collect();
        for vals in cartesian(&refs) {
            let env: BTreeMap<Var, Value> = vars.iter().cloned().zip(vals).collect();
            let mut premise = true;
            for a in c.constraints.iter().chain(&c.ante) {
                if !holds(m, p, a, &env)? {
                    premise = false;
                    break;
                }
            }
            if !premise {
                continue;
            }
            let mut ok = false;
            for a in &c.succ {
                if holds(m, p, a, &env)? {
                    ok = true;
                    break;
                }
            }
            if !ok {
                return Err(format!("clause {} fails under {env:?}", c.origin));
            }
        }
    }
    Ok(())
}
