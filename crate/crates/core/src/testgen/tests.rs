use proptest::prelude::*;

use super::*;
use crate::corpus::{load_corpus, CorpusEntry};
use crate::dsl::{parse, FunctionDef, Outcome, ParamKind, PredicateId, DEFAULT_BUDGET};
use crate::mutation::{generate_mutants, MutationOperator};

fn func(src: &str) -> FunctionDef {
    parse(src).unwrap().functions.remove(0)
}

fn scalar_profile(lo: f64, hi: f64) -> InputProfile {
    let mut p = InputProfile::new(vec![ParamKind::Scalar]);
    p.values = (lo, hi);
    p.integers = true;
    p
}

fn scalars(xs: &[f64]) -> Vec<TestCase> {
    xs.iter().map(|x| TestCase::new(vec![Value::Scalar(*x)])).collect()
}

fn suite_of(name: &str, tests: Vec<TestCase>) -> TestSuite {
    TestSuite::new(name, tests, Provenance::File, 0)
}

const EQ6: &str = "fn f(x: scalar) { if (x == 6) { return 1; } return 0; }";

#[test]
fn normalize_values() {
    assert_eq!(normalize(0.0), 0.0);
    assert_eq!(normalize(2.0), 2.0 / 3.0);
    assert_eq!(normalize(1.0), 0.5);
    assert!(normalize(3.0) < normalize(3.5));
}

#[test]
#[should_panic]
fn normalize_rejects_negative() {
    normalize(-1.0);
}

#[test]
fn random_suites() {
    let c = load_corpus().unwrap();
    let e = crate::corpus::find(&c, "add_values").unwrap();
    let s = random_suite("add_values", &e.profile, 10, 4).unwrap();
    assert_eq!(s.len(), 10);
    assert_eq!(s.provenance, Provenance::Random);
    assert_eq!(s, random_suite("add_values", &e.profile, 10, 4).unwrap());
    assert_ne!(s, random_suite("add_values", &e.profile, 10, 5).unwrap());
    assert!(matches!(random_suite("add_values", &e.profile, 0, 4), Err(TestgenError::EmptyRequest)));
}

#[test]
fn branch_fitness_three_cases() {
    let f = func(EQ6);
    let one = fitness(FitnessKind::Bc, &suite_of("f", scalars(&[4.0])), &f, &[]);
    // False branch covered; the true branch's predicate ran once, so it counts 1.
    assert_eq!(one.value, normalize(0.0) + normalize(1.0));
    assert_eq!(one.residuals[&Goal::Branch(PredicateId(0), Outcome::True)], 0.5);
    // Twice executed: the true branch now uses v(d_min) = v(1) with d_min = |5 - 6|.
    let two = fitness(FitnessKind::Bc, &suite_of("f", scalars(&[4.0, 5.0])), &f, &[]);
    assert_eq!(two.value, normalize(normalize(1.0)));
    let full = fitness(FitnessKind::Bc, &suite_of("f", scalars(&[4.0, 6.0])), &f, &[]);
    assert_eq!(full.value, 0.0);
    assert!(full.is_complete());
}

#[test]
fn line_fitness() {
    let f = func("fn g(x: scalar) { y = 0; if (x > 10) { y = 1; } return y; }");
    let lc = |xs: &[f64]| fitness(FitnessKind::Lc, &suite_of("g", scalars(xs)), &f, &[]);
    // x = 7: one uncovered line, the `x > 10` true branch at distance 10 - 7 + 1.
    let r = lc(&[7.0]);
    assert_eq!(r.value, normalize(1.0) + normalize(4.0));
    assert_eq!(r.uncovered.len(), 1);
    assert_eq!(lc(&[11.0]).value, 0.0);
    assert_eq!(lc(&[]).value, normalize(4.0) + 1.0);
}

#[test]
fn full_coverage_zeroes_line_and_branch() {
    let f = func("fn h(x: scalar) { s = 0; while (x > 0) { x = x - 1; s = s + 2; } if (s == 4) { return 1; } return s; }");
    let suite = suite_of("h", scalars(&[2.0, 5.0]));
    assert_eq!(fitness(FitnessKind::Lc, &suite, &f, &[]).value, 0.0);
    assert_eq!(fitness(FitnessKind::Bc, &suite, &f, &[]).value, 0.0);
}

#[test]
fn weak_mutation_fitness() {
    let f = func(EQ6);
    let ms = generate_mutants(&f, &MutationOperator::ALL);
    let all = scalars(&[-3.0, 0.0, 1.0, 5.0, 6.0, 7.0, 100.0]);
    let r = fitness(FitnessKind::Wm, &suite_of("f", all), &f, &ms.mutants);
    assert_eq!(r.value, 0.0);
    assert_eq!(r.covered.len(), ms.len());
    let none = fitness(FitnessKind::Wm, &suite_of("f", vec![]), &f, &ms.mutants);
    assert_eq!(none.value, ms.len() as f64);
}

#[test]
fn erroring_tests_add_no_coverage() {
    let f = func("fn d(x: scalar) { y = 10 / x; return y; }");
    let r = fitness(FitnessKind::Lc, &suite_of("d", scalars(&[0.0])), &f, &[]);
    assert_eq!(r.covered.len(), 0);
    assert_eq!(r.value, normalize(2.0));
}

#[test]
fn search_straight_line() {
    let f = func("fn s(x: scalar) { y = x * 2; return y + 1; }");
    let res = evolve_suite(&f, &scalar_profile(-10.0, 10.0), FitnessKind::Lc, &SearchConfig::default(), &[]).unwrap();
    assert_eq!(res.report.value, 0.0);
    assert_eq!(res.generations, 0);
    let m = minimize_suite(&res.suite, &f, FitnessKind::Lc, &[], DEFAULT_BUDGET);
    assert_eq!(m.len(), 1);
}

#[test]
fn search_finds_equality() {
    let f = func(EQ6);
    let cfg = SearchConfig::default().with_seed(1);
    let res = evolve_suite(&f, &scalar_profile(-1000.0, 1000.0), FitnessKind::Bc, &cfg, &[]).unwrap();
    assert_eq!(res.report.value, 0.0);
    assert!(res.suite.tests.iter().any(|t| t.args[0] == Value::Scalar(6.0)));
    assert!(res.evaluations <= cfg.max_evaluations);
    let again = evolve_suite(&f, &scalar_profile(-1000.0, 1000.0), FitnessKind::Bc, &cfg, &[]).unwrap();
    assert_eq!(res.suite, again.suite);
    assert_eq!(res.generations, again.generations);
}

#[test]
fn search_respects_budget() {
    let f = func("fn z(x: scalar) { if (x == 123456.5) { return 1; } return 0; }");
    let mut p = scalar_profile(-1e6, 1e6);
    p.integers = false;
    let cfg = SearchConfig {
        max_evaluations: 300,
        ..SearchConfig::default()
    };
    let res = evolve_suite(&f, &p, FitnessKind::Bc, &cfg, &[]).unwrap();
    assert!(res.report.value > 0.0);
    assert_eq!(res.evaluations, 300);
}

#[test]
fn bad_search_config() {
    let f = func(EQ6);
    let cfg = SearchConfig {
        max_suite_size: 0,
        ..SearchConfig::default()
    };
    assert!(matches!(
        evolve_suite(&f, &scalar_profile(0.0, 9.0), FitnessKind::Bc, &cfg, &[]),
        Err(TestgenError::Config(_))
    ));
}

#[test]
fn minimize_examples() {
    let f = func(EQ6);
    let twins = suite_of("f", scalars(&[6.0, 6.0]));
    assert_eq!(minimize_suite(&twins, &f, FitnessKind::Lc, &[], DEFAULT_BUDGET).len(), 1);

    let g = func("fn s(x: scalar) { return x + 1; }");
    let mut tests = scalars(&[3.0]);
    tests.extend(scalars(&[1.0; 9]));
    let m = minimize_suite(&suite_of("s", tests), &g, FitnessKind::Lc, &[], DEFAULT_BUDGET);
    assert_eq!(m.tests, scalars(&[3.0]));

    // Reverse insertion order: the later redundant test goes first.
    let m = minimize_suite(&suite_of("f", scalars(&[6.0, 2.0, 4.0])), &f, FitnessKind::Bc, &[], DEFAULT_BUDGET);
    assert_eq!(m.tests, scalars(&[6.0, 2.0]));
}

#[test]
fn suite_io_round_trip() {
    let c = load_corpus().unwrap();
    let e = crate::corpus::find(&c, "count_k").unwrap();
    let mut s = random_suite("count_k", &e.profile, 3, 8).unwrap();
    s.tests.push(TestCase::new(vec![Value::Array(vec![0.1, -2.5e-7]), Value::Scalar(1.0 / 3.0)]));
    let mut buf = Vec::new();
    write_suite(&mut buf, &s).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with("{\"fn\":\"count_k\",\"provenance\":\"random\",\"seed\":8}\n"));
    assert!(text.lines().nth(1).unwrap().starts_with("{\"fn\":\"count_k\",\"args\":[["));
    let back = read_suite(buf.as_slice()).unwrap();
    assert_eq!(back, s);

    let wrong = text.replacen("\"fn\":\"count_k\",\"args\"", "\"fn\":\"other\",\"args\"", 1);
    let err = read_suite(wrong.as_bytes()).unwrap_err();
    assert!(err.to_string().starts_with("line 2"), "{err}");
}

fn small_corpus() -> Vec<CorpusEntry> {
    load_corpus().unwrap()
}

fn arb_case() -> impl Strategy<Value = (usize, u64, usize, usize)> {
    (0usize..64, any::<u64>(), 1usize..5, 1usize..5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn fitness_monotone_under_union((idx, seed, na, nb) in arb_case(), kind_idx in 0usize..3) {
        let c = small_corpus();
        let e = &c[idx % c.len()];
        let kind = FitnessKind::ALL[kind_idx];
        let ms = generate_mutants(&e.function, &MutationOperator::ALL);
        let a = random_suite(&e.name, &e.profile, na, seed).unwrap();
        let b = random_suite(&e.name, &e.profile, nb, seed ^ 0xabc).unwrap();
        let mut ab = a.clone();
        ab.tests.extend(b.tests.iter().cloned());
        let fa = fitness(kind, &a, &e.function, &ms.mutants);
        let fb = fitness(kind, &b, &e.function, &ms.mutants);
        let fab = fitness(kind, &ab, &e.function, &ms.mutants);
        prop_assert!(fab.value <= fa.value + 1e-12 && fab.value <= fb.value + 1e-12);
        prop_assert!(fab.covered.is_superset(&fa.covered) && fab.covered.is_superset(&fb.covered));
        prop_assert_eq!(fab.value == 0.0, fab.uncovered.is_empty());
    }

    #[test]
    fn minimization_keeps_fitness((idx, seed, n, _) in arb_case(), kind_idx in 0usize..3) {
        let c = small_corpus();
        let e = &c[idx % c.len()];
        let kind = FitnessKind::ALL[kind_idx];
        let ms = generate_mutants(&e.function, &MutationOperator::ALL);
        let s = random_suite(&e.name, &e.profile, n + 3, seed).unwrap();
        let m = minimize_suite(&s, &e.function, kind, &ms.mutants, DEFAULT_BUDGET);
        let before = fitness(kind, &s, &e.function, &ms.mutants);
        let after = fitness(kind, &m, &e.function, &ms.mutants);
        prop_assert_eq!(before.value, after.value);
        prop_assert_eq!(before.covered, after.covered);
        prop_assert!(m.tests.iter().all(|t| s.tests.contains(t)));
        prop_assert!(!m.is_empty());
    }

    #[test]
    fn covered_branches_have_zero_distance((idx, seed, n, _) in arb_case()) {
        let c = small_corpus();
        let e = &c[idx % c.len()];
        let s = random_suite(&e.name, &e.profile, n, seed).unwrap();
        let r = fitness(FitnessKind::Bc, &s, &e.function, &[]);
        for g in &r.covered {
            let Goal::Branch(p, o) = g else { unreachable!() };
            let hit = s.tests.iter().any(|t| {
                crate::dsl::evaluate(&e.function, &t.args, DEFAULT_BUDGET).unwrap().distance(*p, *o) == Some(0.0)
            });
            prop_assert!(hit);
        }
    }
}
