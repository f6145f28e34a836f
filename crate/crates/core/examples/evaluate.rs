//! Parse a function, run it, and look at the trace.
//!
//! cargo run --example evaluate

use mtw::dsl::{self, Outcome, PredicateId, RunOutcome, Value, DEFAULT_BUDGET};

const SRC: &str = "
fn clamp_sum(a: array, cap: scalar) {
    s = 0;
    for v in a {
        s = s + v;
    }
    if (s > cap) {
        s = cap;
    }
    return s;
}
";

fn main() {
    let unit = dsl::parse(SRC).expect("valid source");
    let f = unit.function("clamp_sum").unwrap();
    print!("{}", dsl::function_to_string(f));

    // Predicate 0 is the loop, predicate 1 the `if`.
    for cap in [100.0, 10.0] {
        let args = [Value::Array(vec![3.0, 4.0, 5.0]), Value::Scalar(cap)];
        let t = dsl::evaluate(f, &args, DEFAULT_BUDGET).unwrap();
        let RunOutcome::Normal(out) = &t.outcome else {
            panic!("unexpected outcome {:?}", t.outcome)
        };
        println!(
            "cap={cap}: output {out}, {} steps, statements covered {}/{}, d(s > cap -> true) = {:?}",
            t.steps,
            t.covered_statements().len(),
            t.statement_count(),
            t.distance(PredicateId(1), Outcome::True),
        );
    }

    // Out-of-range reads and runaway loops end the run without panicking.
    let g = &dsl::parse("fn g(a: array) { return a[5]; }").unwrap().functions[0];
    let t = dsl::evaluate(g, &[Value::Array(vec![1.0])], DEFAULT_BUDGET).unwrap();
    println!("a[5] on a length-1 array: {}", t.outcome);
}
