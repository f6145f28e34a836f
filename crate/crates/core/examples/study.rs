//! Runs the minimal study config and prints the markdown tables.
//!
//! cargo run --release --example study [-- CONFIG]

use std::path::PathBuf;

use mtw::corpus;
use mtw::experiment::{self, ReportFormat};

fn main() {
    let config = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/minimal.xml")
    });
    let corpus = corpus::load_corpus().unwrap();
    let plan = experiment::load_config(&config, &corpus).unwrap_or_else(|e| panic!("{}: {e}", config.display()));
    let results = experiment::run_experiment(&plan, &corpus).unwrap();
    let out = tempfile::tempdir().unwrap();
    for p in experiment::emit_report(&results, out.path(), ReportFormat::Markdown).unwrap() {
        println!("## {}\n", p.file_name().unwrap().to_string_lossy());
        println!("{}", std::fs::read_to_string(&p).unwrap());
    }
}
