//! Random, line, branch and weak-mutation suites for one function, with
//! the fitness each one reaches under every criterion.
//!
//! cargo run --release --example generate_suites [-- FUNCTION SEED]

use mtw::corpus;
use mtw::mutation::{self, MutationOperator};
use mtw::testgen::{self, FitnessKind, SearchConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "sequential_search".into());
    let seed: u64 = args.next().map_or(42, |s| s.parse().expect("numeric seed"));
    let corpus = corpus::load_corpus().unwrap();
    let e = corpus::find(&corpus, &name).unwrap_or_else(|| panic!("no function `{name}`"));
    let mutants = mutation::generate_mutants(&e.function, &MutationOperator::ALL);

    let mut suites = vec![testgen::random_suite(&e.name, &e.profile, 10, seed).unwrap()];
    for kind in FitnessKind::ALL {
        let muts = if kind == FitnessKind::Wm { &mutants.mutants[..] } else { &[] };
        let cfg = SearchConfig::default().with_seed(seed);
        let res = testgen::evolve_suite(&e.function, &e.profile, kind, &cfg, muts).unwrap();
        println!(
            "{:<13} fitness {:.4} after {} evaluations ({} generations), {} tests",
            kind.name(),
            res.report.value,
            res.evaluations,
            res.generations,
            res.suite.len()
        );
        suites.push(testgen::minimize_suite(&res.suite, &e.function, kind, muts, cfg.step_budget));
    }

    println!("\n{:<13} {:>5} {:>8} {:>8} {:>8}", "suite", "size", "line", "branch", "weakmut");
    for s in &suites {
        let f: Vec<String> = FitnessKind::ALL
            .iter()
            .map(|k| format!("{:>8.4}", testgen::fitness(*k, s, &e.function, &mutants.mutants).value))
            .collect();
        println!("{:<13} {:>5} {}", s.provenance.name(), s.len(), f.join(" "));
    }
    println!();
    testgen::write_suite(std::io::stdout(), &suites[3]).unwrap();
}
