//! Source and follow-up tests on add_values, then all six relations on a
//! random suite, first against the original and then against a mutant.
//!
//! cargo run --example metamorphic

use mtw::corpus;
use mtw::dsl::{self, RunOutcome, Value, DEFAULT_BUDGET};
use mtw::mrengine::{self, MetamorphicRelation, MrKind, MtSetup};
use mtw::mutation::{self, MutationOperator};
use mtw::testgen::{self, TestCase};

fn output(f: &dsl::FunctionDef, t: &TestCase) -> Value {
    match dsl::evaluate(f, &t.args, DEFAULT_BUDGET).unwrap().outcome {
        RunOutcome::Normal(v) => v,
        other => panic!("{other}"),
    }
}

fn main() {
    let corpus = corpus::load_corpus().unwrap();
    let e = corpus::find(&corpus, "add_values").unwrap();

    let add = MetamorphicRelation::new(MrKind::Addition).with_constant(2.0);
    let source = TestCase::new(vec![Value::Array(vec![3.0, 43.0, 1.0, 54.0])]);
    let follow = mrengine::derive_followup(&add, &source, &e.profile).unwrap();
    let (a, b) = (output(&e.function, &source), output(&e.function, &follow));
    println!(
        "source {} -> {a}, follow-up {} -> {b}: {}",
        source.args[0],
        follow.args[0],
        mrengine::check_relation(&add, &a, &b, e.comparison_mode)
    );

    let suite = testgen::random_suite(&e.name, &e.profile, 5, 11).unwrap();
    let mrs: Vec<_> = MrKind::ALL.iter().map(|k| MetamorphicRelation::new(*k).with_seed(11)).collect();
    let setup = MtSetup {
        profile: &e.profile,
        mode: e.comparison_mode,
        budget: DEFAULT_BUDGET,
    };
    let mutant = mutation::generate_mutants(&e.function, &[MutationOperator::Aor]).mutants[0].clone();
    println!("\nmutant {} ({} -> {}):", mutant.path(), mutant.original, mutant.replacement.token());
    for (label, f) in [("original", e.function.clone()), ("mutant", mutant.apply(&e.function))] {
        let verdicts = mrengine::run_mt(&f, &suite.tests, &mrs, &setup);
        let failures = verdicts.iter().filter(|v| v.verdict.is_failure()).count();
        println!("  {label}: {failures}/{} pairs fail", verdicts.len());
        for v in verdicts.iter().filter(|v| v.verdict.is_failure()).take(3) {
            println!("    test {} {}: {}", v.test_index, v.mr, v.verdict);
        }
    }
}
