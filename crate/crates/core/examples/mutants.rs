//! Generate mutants of a corpus function, then check strong and weak kills
//! for one input.
//!
//! cargo run --example mutants [-- FUNCTION]

use mtw::corpus;
use mtw::dsl::{self, DEFAULT_BUDGET};
use mtw::mutation::{self, MutationOperator};

fn main() {
    let name = std::env::args().nth(1).unwrap_or_else(|| "find_max".into());
    let corpus = corpus::load_corpus().unwrap();
    let entry = corpus::find(&corpus, &name).unwrap_or_else(|| panic!("no function `{name}`"));
    let set = mutation::generate_mutants(&entry.function, &MutationOperator::ALL);
    set.write_catalog(std::io::stdout()).unwrap();

    let args = corpus::sample_input(&entry.profile, 1).unwrap();
    let original = dsl::evaluate(&entry.function, &args, DEFAULT_BUDGET).unwrap();
    let (_, weak) = mutation::weak_run(&entry.function, &set.mutants, &args, DEFAULT_BUDGET).unwrap();
    let mut strong = 0;
    for m in &set.mutants {
        let t = mutation::evaluate_mutant(&entry.function, m, &args, DEFAULT_BUDGET).unwrap();
        strong += mutation::strongly_killed(&original.outcome, &t.outcome) as usize;
    }
    let infected = weak.iter().filter(|w| w.is_infected()).count();
    println!(
        "\n{name} on {}: {} mutants, {infected} weakly infected, {strong} strongly killed",
        args.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(", "),
        set.len()
    );
}
