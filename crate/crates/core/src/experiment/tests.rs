use super::*;
use crate::corpus::corpus_from_parts;
use crate::dsl::Value;
use crate::testgen::TestCase;

const TOY_MANIFEST: &str = r#"
[[function]]
name = "first"
output = "scalar"
comparison = "scalar"
mrs = ["addition", "shuffle", "invertive"]
length = [1, 1]
values = [1, 10]
integers = true

[[function]]
name = "count"
output = "scalar"
comparison = "scalar"
mrs = ["addition"]
values = [1, 10]

[[function]]
name = "negated"
output = "scalar"
comparison = "scalar"
mrs = ["addition"]
values = [1, 10]
"#;

fn toy() -> Vec<CorpusEntry> {
    corpus_from_parts(
        TOY_MANIFEST,
        &[
            ("first", "fn first(a: array) {\n    x = a[0];\n    y = x;\n    return y;\n}\n"),
            ("count", "fn count(a: array) {\n    return len(a);\n}\n"),
            ("negated", "fn negated(a: array) {\n    return 0 - a[0];\n}\n"),
        ],
    )
    .unwrap()
}

fn method(name: &str, mrs: &[MrKind], origins: &[Provenance]) -> MethodPlan {
    MethodPlan {
        name: name.into(),
        num_tests: 4,
        mrs: mrs.iter().map(|k| MetamorphicRelation::new(*k)).collect(),
        sources: origins
            .iter()
            .map(|o| SourceSpec {
                origin: *o,
                seed: None,
                path: None,
            })
            .collect(),
    }
}

fn plan(methods: Vec<MethodPlan>) -> ExperimentPlan {
    ExperimentPlan {
        seed: 9,
        budget: 10_000,
        operators: vec![MutationOperator::Uoi],
        search: SearchConfig {
            population: 10,
            max_evaluations: 300,
            ..SearchConfig::default()
        },
        methods,
    }
}

#[test]
fn sign_flip_toy_is_fully_killed() {
    // UOI on `a[0]`, `x` and `y`: every mutant returns -a[0], and adding 2
    // to a positive input lowers the mutant's output.
    let p = plan(vec![method("first", &[MrKind::Addition], &[Provenance::Random])]);
    let r = run_experiment(&p, &toy()).unwrap();
    let k = &r.kills.functions[0];
    assert_eq!(k.mutants, 3);
    let originals: Vec<_> = r.functions[0].mutants.mutants.iter().map(|m| m.original.as_str()).collect();
    assert_eq!(originals, ["a[0]", "x", "y"]);
    assert_eq!(r.kills.totals(Provenance::Random), (3, 3));
    assert_eq!(kill_rate(3, 3).unwrap(), Some(100.0));
}

#[test]
fn only_invertive_sees_flip_on_singletons() {
    // Length-1 arrays make Shuffle an identity, so it can never fail.
    let p = plan(vec![method("first", &[MrKind::Shuffle, MrKind::Invertive], &[Provenance::Random])]);
    let r = run_experiment(&p, &toy()).unwrap();
    let s = &r.kills.functions[0].strategies[&Provenance::Random];
    assert!(s.per_mr[&MrKind::Shuffle].is_empty());
    assert_eq!(s.per_mr[&MrKind::Invertive], BTreeSet::from([0, 1, 2]));
    let b = per_mr_breakdown(&r.kills, &r.functions).unwrap();
    assert_eq!(b[&Provenance::Random][&MrKind::Invertive].rate, Some(100.0));
    assert_eq!(b[&Provenance::Random][&MrKind::Shuffle].rate, Some(0.0));
}

#[test]
fn single_relation_breakdown_matches_total() {
    let p = plan(vec![method("first", &[MrKind::Invertive], &[Provenance::Random, Provenance::Line])]);
    let r = run_experiment(&p, &toy()).unwrap();
    let b = per_mr_breakdown(&r.kills, &r.functions).unwrap();
    for s in [Provenance::Random, Provenance::Line] {
        let (k, n) = r.kills.totals(s);
        assert_eq!((b[&s][&MrKind::Invertive].killed, b[&s][&MrKind::Invertive].mutants), (k, n));
    }
}

#[test]
fn unsupported_relations_are_skipped_and_filtered_ones_flagged() {
    let p = plan(vec![method(
        "first",
        &[MrKind::Exclusive, MrKind::Invertive, MrKind::Multiplication],
        &[Provenance::Random],
    )]);
    let r = run_experiment(&p, &toy()).unwrap();
    // `first` does not list exclusive or multiplication.
    assert_eq!(r.functions[0].mrs, vec![MrKind::Invertive]);
    assert_eq!(r.functions[0].skipped_mrs, vec![MrKind::Exclusive, MrKind::Multiplication]);

    let mut toy = toy();
    toy[0].applicable_mrs.insert(MrKind::Exclusive);
    let r = run_experiment(&p, &toy).unwrap();
    let pairs = &r.functions[0].suites[&Provenance::Random].pairs[&MrKind::Exclusive];
    assert_eq!((pairs.planned, pairs.surviving, pairs.inapplicable), (4, 0, 4));
    let b = per_mr_breakdown(&r.kills, &r.functions).unwrap();
    let cell = b[&Provenance::Random][&MrKind::Exclusive];
    assert!(cell.flagged);
    assert_eq!(cell.rate, Some(0.0));
    assert!(!b[&Provenance::Random][&MrKind::Invertive].flagged);
}

#[test]
fn empty_population_reports_na() {
    let p = plan(vec![method("count", &[MrKind::Addition], &[Provenance::Random])]);
    let r = run_experiment(&p, &toy()).unwrap();
    assert_eq!(r.kills.functions[0].mutants, 0);
    assert_eq!(r.kills.totals(Provenance::Random), (0, 0));
    let t = report::fig4(&r).unwrap();
    assert_eq!(t.rows[0], ["random", "0", "0", "n/a"]);
}

#[test]
fn always_violating_function_is_excluded() {
    let p = plan(vec![
        method("negated", &[MrKind::Addition], &[Provenance::Random]),
        method("first", &[MrKind::Addition], &[Provenance::Random]),
    ]);
    let r = run_experiment(&p, &toy()).unwrap();
    assert!(r.functions[0].excluded && r.kills.functions[0].excluded);
    assert_eq!(r.functions[0].suites[&Provenance::Random].pairs[&MrKind::Addition].violated, 4);
    assert!(r.kills.functions[0].strategies[&Provenance::Random].killed.is_empty());
    assert!(!r.functions[1].excluded);
    // Pooled totals skip the excluded function.
    assert_eq!(r.kills.totals(Provenance::Random), (3, 3));
}

#[test]
fn deterministic_and_thread_count_independent() {
    let corpus = corpus::load_corpus().unwrap();
    let p = ExperimentPlan {
        operators: MutationOperator::ALL.to_vec(),
        ..plan(vec![
            method("find_max", &MrKind::ALL, &[Provenance::Random, Provenance::Branch, Provenance::WeakMutation]),
            method("bubble", &MrKind::ALL, &[Provenance::Random, Provenance::Line]),
        ])
    };
    let a = run_experiment(&p, &corpus).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = pool.install(|| run_experiment(&p, &corpus)).unwrap();
    assert_eq!(a, b);
    let (da, db) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for (r, d) in [(&a, &da), (&b, &db)] {
        write_results(r, d.path()).unwrap();
        emit_report(r, d.path(), ReportFormat::Csv).unwrap();
    }
    for name in ["results.json", "table2.csv", "table3.csv", "table4.csv", "fig6.csv", "best_sets.csv", "summary.md"] {
        let x = std::fs::read(da.path().join(name)).unwrap();
        assert_eq!(x, std::fs::read(db.path().join(name)).unwrap(), "{name}");
    }
    assert_eq!(read_results(da.path()).unwrap(), a);
}

#[test]
fn combining_is_a_union_over_one_population() {
    let corpus = corpus::load_corpus().unwrap();
    let p = ExperimentPlan {
        operators: MutationOperator::ALL.to_vec(),
        ..plan(vec![method(
            "find_min",
            &[MrKind::Addition, MrKind::Invertive],
            &[Provenance::Random, Provenance::WeakMutation],
        )])
    };
    let r = run_experiment(&p, &corpus).unwrap();
    let f = &r.kills.functions[0];
    let (a, b) = (&f.strategies[&Provenance::Random], &f.strategies[&Provenance::WeakMutation]);
    assert_eq!(&combine_suites(&[a, a]).unwrap(), a);
    let u = combine_suites(&[a, b]).unwrap();
    assert!(u.killed.is_superset(&a.killed) && u.killed.is_superset(&b.killed));
    assert_eq!(u.killed, a.killed.union(&b.killed).copied().collect());
    let mut other = b.clone();
    other.population ^= 1;
    assert!(combine_suites(&[a, &other]).is_err());
    assert!(combine_suites(&[]).is_err());
}

#[test]
fn file_sources_are_read_and_checked() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("first.jsonl");
    let suite = TestSuite::new(
        "first",
        vec![TestCase::new(vec![Value::Array(vec![4.0])])],
        Provenance::File,
        0,
    );
    let mut buf = Vec::new();
    testgen::write_suite(&mut buf, &suite).unwrap();
    std::fs::write(&path, &buf).unwrap();
    let mut m = method("first", &[MrKind::Addition], &[Provenance::File]);
    m.sources[0].path = Some(path.clone());
    let r = run_experiment(&plan(vec![m.clone()]), &toy()).unwrap();
    assert_eq!(r.functions[0].suites[&Provenance::File].suite.tests, suite.tests);
    assert_eq!(r.kills.totals(Provenance::File), (3, 3));

    // An input the profile does not admit.
    let bad = TestSuite::new("first", vec![TestCase::new(vec![Value::Array(vec![])])], Provenance::File, 0);
    let mut buf = Vec::new();
    testgen::write_suite(&mut buf, &bad).unwrap();
    std::fs::write(&path, &buf).unwrap();
    assert!(matches!(
        run_experiment(&plan(vec![m]), &toy()),
        Err(ExperimentError::SuiteFile { .. })
    ));
}

#[test]
fn invalid_plans() {
    let mut p = plan(vec![method("first", &[MrKind::Addition], &[Provenance::Random])]);
    p.methods[0].mrs.clear();
    assert!(matches!(run_experiment(&p, &toy()), Err(ExperimentError::Contract(_))));
    let p = plan(vec![]);
    assert!(matches!(run_experiment(&p, &toy()), Err(ExperimentError::Contract(_))));
    let p = plan(vec![method("first", &[MrKind::Addition], &[Provenance::Random, Provenance::Random])]);
    assert!(p.validate().is_err());
    let p = plan(vec![method("absent", &[MrKind::Addition], &[Provenance::Random])]);
    assert!(run_experiment(&p, &toy()).is_err());
}

#[test]
fn markdown_has_a_row_per_function() {
    let p = plan(vec![
        method("first", &[MrKind::Addition], &[Provenance::Random, Provenance::WeakMutation]),
        method("count", &[MrKind::Addition], &[Provenance::Random, Provenance::WeakMutation]),
    ]);
    let r = run_experiment(&p, &toy()).unwrap();
    let md = report::table2(&r).unwrap().render(ReportFormat::Markdown).unwrap();
    let lines: Vec<_> = md.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(
        lines[0],
        "| function | mutants | random_size | random_kill_rate | weak_mutation_size | weak_mutation_kill_rate | excluded |"
    );
    assert!(lines[2].starts_with("| first | 3 | 4 | 100.00 | "), "{}", lines[2]);
    assert!(lines[3].starts_with("| count | 0 | 4 | n/a | "), "{}", lines[3]);

    let mut empty = r.clone();
    empty.strategies.clear();
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(
        emit_report(&empty, &dir.path().join("out"), ReportFormat::Csv),
        Err(ExperimentError::Contract(_))
    ));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn relation_seeds_ignore_strategy() {
    assert_eq!(relation_seed(1, "f", MrKind::Shuffle), relation_seed(1, "f", MrKind::Shuffle));
    assert_ne!(relation_seed(1, "f", MrKind::Shuffle), relation_seed(1, "g", MrKind::Shuffle));
    assert_ne!(relation_seed(1, "f", MrKind::Shuffle), relation_seed(2, "f", MrKind::Shuffle));
    assert_ne!(suite_seed(1, "f", Provenance::Line), suite_seed(1, "f", Provenance::Branch));
}
