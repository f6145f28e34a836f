//! Branch distances for `x == 6` and the normalised fitness they feed.
//!
//! cargo run --example branch_distance

use mtw::dsl::{self, Outcome, PredicateId, Value, DEFAULT_BUDGET};
use mtw::testgen::normalize;

fn main() {
    let f = &dsl::parse("fn f(x: scalar) { if (x == 6) { return 1; } return 0; }")
        .unwrap()
        .functions[0];
    println!("{:>4} {:>8} {:>9} {:>10}", "x", "d(true)", "d(false)", "v(d(true))");
    for x in [0.0, 4.0, 5.0, 6.0, 7.5] {
        let t = dsl::evaluate(f, &[Value::Scalar(x)], DEFAULT_BUDGET).unwrap();
        let dt = t.distance(PredicateId(0), Outcome::True).unwrap();
        let df = t.distance(PredicateId(0), Outcome::False).unwrap();
        println!("{x:>4} {dt:>8} {df:>9} {:>10.4}", normalize(dt));
    }
}
