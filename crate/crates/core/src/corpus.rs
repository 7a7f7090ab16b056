//! Builders for the array examples used in tests and the shipped corpus.

use std::fmt::Write as _;

use crate::error::Result;
use crate::frontend::parse_native;
use crate::zclause::Problem;

const ARRAY_HEADER: &str =
    "(sorts Elem Array)\n(functions (select Array Int Elem) (store Array Int Elem Array)\n";

/// Native text of the interval example with `n` intervals: `a` is constant on
/// each `[lᵢ, uᵢ]`, the intervals overlap, `b` writes `e₁` at `u_{n+1} = uₙ + 1`,
/// and `k` lies in `[l₁, uₙ]`. With `read_clause` the problem also asserts
/// `select(b, k) ≠ e₁` and is unsatisfiable; without it, it is satisfiable.
pub fn interval_text(n: usize, read_clause: bool) -> String {
    assert!(n >= 1, "at least one interval");
    let mut s = String::from(ARRAY_HEADER);
    s.push_str("  (a Array) (b Array) (k Int)");
    for i in 1..=n {
        let _ = write!(s, " (l{i} Int) (u{i} Int) (e{i} Elem)");
    }
    let _ = writeln!(s, " (u{} Int))\n(theory arrays-int)", n + 1);
    for i in 1..=n {
        let _ = writeln!(
            s,
            "(zclause (name E{i}) (vars (x Int)) (constraints (le l{i} x) (le x u{i})) (succ (eq (select a x) e{i})))"
        );
    }
    for i in 1..=n {
        let _ = writeln!(
            s,
            "(zclause (name F{i}) (constraints (le u{i} (prc l{i}))))"
        );
    }
    for i in 1..n {
        let _ = writeln!(
            s,
            "(zclause (name G{i}) (constraints (le u{i} (prc l{}))))",
            i + 1
        );
    }
    let _ = writeln!(
        s,
        "(zclause (name H1) (vars (x Int)) (constraints (eq x u{})) (succ (eq b (store a x e1))))",
        n + 1
    );
    let _ = writeln!(s, "(zclause (name H2) (succ (eq u{} (su u{n}))))", n + 1);
    s.push_str("(zclause (name H3) (constraints (le k (prc l1))))\n");
    let _ = writeln!(s, "(zclause (name H4) (constraints (le u{n} (prc k))))");
    if read_clause {
        s.push_str("(zclause (name H5) (ante (eq (select b k) e1)))\n");
    }
    s
}

pub fn interval_example(n: usize, read_clause: bool) -> Result<Problem> {
    parse_native(&interval_text(n, read_clause))
}

/// Native text of `⟨i ⩽ x₁, …, i ⩽ xₙ, j ⩽ y ∥ select(a, x₁) ≐ c₁, … → select(a, y) ≐ e⟩`.
pub fn exponential_gap_text(n: usize) -> String {
    let mut s = String::from(ARRAY_HEADER);
    s.push_str("  (a Array) (e Elem) (i Int) (j Int)");
    for k in 1..=n {
        let _ = write!(s, " (c{k} Elem)");
    }
    s.push_str(")\n(theory arrays-int)\n(zclause (name S0) (vars");
    for k in 1..=n {
        let _ = write!(s, " (x{k} Int)");
    }
    s.push_str(" (y Int)) (constraints");
    for k in 1..=n {
        let _ = write!(s, " (le i x{k})");
    }
    s.push_str(" (le j y)) (ante");
    for k in 1..=n {
        let _ = write!(s, " (eq (select a x{k}) c{k})");
    }
    s.push_str(") (succ (eq (select a y) e)))\n");
    s
}

pub fn exponential_gap(n: usize) -> Result<Problem> {
    parse_native(&exponential_gap_text(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_sizes_at_two() {
        let p = interval_example(2, true).unwrap();
        let count = |prefix: &str| {
            p.clauses
                .iter()
                .filter(|c| c.origin.starts_with(prefix))
                .count()
        };
        // The ground equation of H splits into two strict inequalities.
        assert_eq!(
            (count("E"), count("F"), count("G"), count("H")),
            (2, 2, 1, 6)
        );
        assert_eq!(p.clauses.len(), 11);
    }

    #[test]
    fn gap_is_one_clause() {
        let p = exponential_gap(4).unwrap();
        assert_eq!(p.clauses.len(), 1);
        assert_eq!(p.clauses[0].int_vars().len(), 5);
    }
}
