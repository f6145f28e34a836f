//! Suite-size statistics and paired t-tests over per-function sizes.
//!
//! cargo run --example size_statistics

use std::collections::BTreeMap;

use mtw::experiment::{kill_rate, paired_t_test, suite_size_stats};
use mtw::testgen::Provenance;

fn main() {
    let wm = vec![1.0, 3.0, 2.0, 5.0, 1.0, 2.0, 4.0, 1.0];
    let line = vec![1.0, 2.0, 1.0, 2.0, 1.0, 1.0, 3.0, 1.0];
    let mut sizes = BTreeMap::new();
    sizes.insert(Provenance::WeakMutation, wm.clone());
    sizes.insert(Provenance::Line, line.clone());
    sizes.insert(Provenance::Random, vec![10.0; wm.len()]);

    let s = suite_size_stats(&sizes).unwrap();
    for (p, st) in &s.strategies {
        println!(
            "{:<13} total {:>3} mean {:.3} median {} sd {:.3} vs wm {:?}",
            p.name(),
            st.total,
            st.mean,
            st.median,
            st.sd,
            st.vs_weak_mutation
        );
    }
    let t = paired_t_test(&wm, &line).unwrap();
    println!("wm - line: t = {:.4}, df = {}, p = {:.4e}", t.t, t.df, t.p);
    println!("7 of 11 killed: {:.2}%", kill_rate(7, 11).unwrap().unwrap());
}
