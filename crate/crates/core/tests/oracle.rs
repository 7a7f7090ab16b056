use zground::corpus::interval_example;
use zground::frontend::{parse_native, print_native, run_pipeline, PipelineOptions};
use zground::oracle::{bounded_decide, check_model, generate_random_az, AzParams, OracleVerdict};
use zground::zclause::{validate_az_problem, Problem};

fn ground_output(p: &Problem) -> (Problem, String) {
    let (g, report) = run_pipeline(p, &PipelineOptions::default()).unwrap();
    (
        Problem::new(g.signature, g.clauses, p.theory),
        report.escape,
    )
}

const SEED_ZERO: &str = "\
(sorts Array Elem)
(functions
  (a0 Array)
  (a1 Array)
  (c0 Int)
  (c1 Int)
  (e0 Elem)
  (e1 Elem)
  (select Array Int Elem)
  (store Array Int Elem Array))
(theory arrays-int)
(zclause (vars (u!0 Int)) (constraints (eq u!0 c1)) (ante (eq a1 (store a0 u!0 e0))) (succ (eq a1 (store a0 u!0 e1)) (eq e0 e1)))
(zclause (vars (u!0 Int)) (constraints (eq u!0 c0)) (ante (eq a1 (store a0 u!0 e1))) (succ (eq e1 e0)))
(zclause (vars (x0 Int)) (constraints (le (+ c1 1) x0)) (ante) (succ (eq (select a1 x0) (select a1 x0)) (eq (select a0 x0) e0)))
";

#[test]
fn reflexive_equation_is_sat_at_any_radius() {
    let p = parse_native("(sorts S) (functions (c S)) (zclause (succ (eq c c)))").unwrap();
    for k in [0, 1, 5] {
        assert_eq!(
            bounded_decide(&p, k, None).unwrap().verdict,
            OracleVerdict::Sat
        );
    }
}

#[test]
fn empty_clause_is_unsat_at_any_radius() {
    let p = parse_native("(sorts S) (functions (c S)) (zclause)").unwrap();
    for k in [0, 1, 5] {
        assert_eq!(
            bounded_decide(&p, k, None).unwrap().verdict,
            OracleVerdict::UnsatWithinBound
        );
    }
}

#[test]
fn sat_verdicts_carry_checked_models() {
    let p = interval_example(2, false).unwrap();
    let out = bounded_decide(&p, 3, None).unwrap();
    assert_eq!(out.verdict, OracleVerdict::Sat);
    check_model(&p, out.model.as_ref().unwrap()).unwrap();
}

#[test]
fn interval_input_and_output_agree() {
    for (n, k) in [(1, 8), (2, 4)] {
        let p = interval_example(n, true).unwrap();
        let (g, chi) = ground_output(&p);
        let before = bounded_decide(&p, k, None).unwrap().verdict;
        let after = bounded_decide(&g, k, Some(&chi)).unwrap().verdict;
        assert_eq!(before, OracleVerdict::UnsatWithinBound, "n={n} k={k}");
        assert_eq!(after, before, "n={n} k={k}");
    }
}

#[test]
fn generator_seed_zero_is_pinned() {
    let p = generate_random_az(0, &AzParams::default()).unwrap();
    assert_eq!(print_native(&p), SEED_ZERO);
}

#[test]
fn generator_with_no_clauses_is_empty() {
    let params = AzParams {
        clauses: 0,
        ..Default::default()
    };
    assert!(generate_random_az(3, &params).unwrap().clauses.is_empty());
}

#[test]
fn two_hundred_generated_problems_validate() {
    for seed in 0..200 {
        let p = generate_random_az(seed, &AzParams::default()).unwrap();
        assert!(validate_az_problem(&p).is_valid(), "seed {seed}");
    }
}
