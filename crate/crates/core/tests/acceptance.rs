//! Acceptance criteria 1-7, one PASS/FAIL line each.
//!
//! Lines go straight to the process stdout so they show up without
//! `--nocapture`. Run alone with `cargo test --release --test acceptance`.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use mtw::corpus::{self, corpus_from_parts, CorpusEntry, CORE_FUNCTIONS};
use mtw::dsl::{self, ExprKind, FunctionDef, Outcome, PredicateId, RunOutcome, Value, DEFAULT_BUDGET};
use mtw::experiment::{
    self, combine_suites, paired_t_test, suite_size_stats, ExperimentPlan, ExperimentResults, MethodPlan,
    SourceSpec,
};
use mtw::mrengine::{self, MetamorphicRelation, MrKind, Verdict};
use mtw::mutation::{self, Mutant, MutationOperator, Replacement};
use mtw::testgen::{self, FitnessKind, Provenance, SearchConfig, TestCase};

const STUDY_SEED_LOCK: u64 = 2019;
/// Observed on the first verified study run with seed 2019.
const LOCKED_WM_KILLED: usize = 562;
const LOCKED_RANDOM_KILLED: usize = 601;
const LOCKED_MUTANTS: usize = 962;

fn report(n: &str, ok: bool, detail: &str) -> bool {
    let line = format!("acceptance criterion {n}: {} - {detail}\n", if ok { "PASS" } else { "FAIL" });
    let mut out = std::io::stdout().lock();
    out.write_all(line.as_bytes()).unwrap();
    out.flush().unwrap();
    ok
}

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn scalar(t: &dsl::ExecutionTrace) -> f64 {
    match &t.outcome {
        RunOutcome::Normal(Value::Scalar(x)) => *x,
        other => panic!("expected a scalar, got {other:?}"),
    }
}

// ---------------------------------------------------------------- 1

fn worked_example() -> (bool, String) {
    let start = Instant::now();
    let corpus = corpus::load_corpus().unwrap();
    let e = corpus::find(&corpus, "add_values").unwrap();
    let src = TestCase::new(vec![Value::Array(vec![3.0, 43.0, 1.0, 54.0])]);
    let mr = MetamorphicRelation::new(MrKind::Addition).with_constant(2.0);
    let fu = mrengine::derive_followup(&mr, &src, &e.profile).unwrap();
    let a = scalar(&dsl::evaluate(&e.function, &src.args, DEFAULT_BUDGET).unwrap());
    let b = scalar(&dsl::evaluate(&e.function, &fu.args, DEFAULT_BUDGET).unwrap());
    let v = mrengine::check_relation(&mr, &Value::Scalar(a), &Value::Scalar(b), e.comparison_mode);
    let took = start.elapsed();
    let ok = a == 101.0
        && fu.args == [Value::Array(vec![5.0, 45.0, 3.0, 56.0])]
        && b == 109.0
        && v == Verdict::Pass
        && took < Duration::from_secs(1);
    (ok, format!("source 101 = {a}, follow-up {} -> {b}, verdict {v}, {took:.2?}", fu.args[0]))
}

// ---------------------------------------------------------------- 2

fn branch_distance() -> (bool, String) {
    let f = &dsl::parse("fn f(x: scalar) { if (x == 6) { return 1; } return 0; }").unwrap().functions[0];
    let d = |x: f64| {
        dsl::evaluate(f, &[Value::Scalar(x)], DEFAULT_BUDGET)
            .unwrap()
            .distance(PredicateId(0), Outcome::True)
            .unwrap()
    };
    let (d4, d5) = (d(4.0), d(5.0));
    (d4 == 2.0 && d5 == 1.0, format!("d_true(4) = {d4}, d_true(5) = {d5}"))
}

// ---------------------------------------------------------------- 3

fn reference_sizes() -> BTreeMap<Provenance, Vec<f64>> {
    let text = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/reference_suite_sizes.csv"))
        .unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let cols = [Provenance::Branch, Provenance::WeakMutation, Provenance::Line, Provenance::Random];
    let mut out: BTreeMap<Provenance, Vec<f64>> = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec.unwrap();
        for (i, p) in cols.iter().enumerate() {
            out.entry(*p).or_default().push(rec[i + 1].parse().unwrap());
        }
    }
    out
}

/// t for paired samples, straight from the definition.
fn brute_t(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = d.len() as f64;
    let mut sum = 0.0;
    for x in &d {
        sum += x;
    }
    let mean = sum / n;
    let mut ss = 0.0;
    for x in &d {
        ss += (x - mean) * (x - mean);
    }
    mean / ((ss / (n - 1.0)).sqrt() / n.sqrt())
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Two-tailed Student-t p-value by quadrature of the unnormalised density.
fn quadrature_p(t: f64, df: f64) -> f64 {
    let g = |x: f64| (1.0 + x * x / df).powf(-(df + 1.0) / 2.0);
    // Tail beyond `c` via x = c / u.
    let tail = |c: f64| simpson(|u| if u == 0.0 { 0.0 } else { g(c / u) * c / (u * u) }, 0.0, 1.0, 200_000);
    let total = 2.0 * (simpson(g, 0.0, 1.0, 200_000) + tail(1.0));
    2.0 * tail(t.abs()) / total
}

fn statistics() -> (bool, String) {
    let start = Instant::now();
    let sizes = reference_sizes();
    let s = suite_size_stats(&sizes).unwrap();
    let st = |p| &s.strategies[&p];
    let (wm, line, branch, random) = (
        st(Provenance::WeakMutation),
        st(Provenance::Line),
        st(Provenance::Branch),
        st(Provenance::Random),
    );
    let totals = [wm.total, line.total, branch.total, random.total];
    let means_ok = [(wm.mean, 1.75), (line.mean, 1.26), (branch.mean, 1.29), (random.mean, 10.0)]
        .iter()
        .all(|(m, want)| (m - want).abs() <= 0.005);
    let medians_ok = wm.median == 1.0 && line.median == 1.0 && branch.median == 1.0;
    let w = &sizes[&Provenance::WeakMutation];
    let tl = paired_t_test(w, &sizes[&Provenance::Line]).unwrap();
    let tb = paired_t_test(w, &sizes[&Provenance::Branch]).unwrap();
    let rel = |p: f64, want: f64| ((p - want) / want).abs();
    let t_ok = (tl.t - brute_t(w, &sizes[&Provenance::Line])).abs() < 1e-3
        && (tb.t - brute_t(w, &sizes[&Provenance::Branch])).abs() < 1e-3;
    let (ql, qb) = (quadrature_p(tl.t, tl.df), quadrature_p(tb.t, tb.df));
    let p_ok = rel(tl.p, 3.102e-07) <= 0.10
        && rel(tb.p, 1.375e-05) <= 0.10
        && rel(tl.p, ql) <= 1e-3
        && rel(tb.p, qb) <= 1e-3;
    let took = start.elapsed();
    let ok = totals == [135, 97, 99, 770] && means_ok && medians_ok && t_ok && p_ok && took < Duration::from_secs(1);
    (
        ok,
        format!(
            "totals {totals:?}, means {:.4}/{:.4}/{:.4}/{:.1}, p(wm-line) {:.4e} (quadrature {:.4e}), \
             p(wm-branch) {:.4e} (quadrature {:.4e}), t {:.6}/{:.6}, {took:.2?}",
            wm.mean, line.mean, branch.mean, random.mean, tl.p, ql, tb.p, qb, tl.t, tb.t
        ),
    )
}

// ---------------------------------------------------------------- 4

fn coverage_search() -> (bool, String) {
    let start = Instant::now();
    let corpus = corpus::load_corpus().unwrap();
    let mut both_zero = 0;
    let mut sizes_ok = true;
    let mut misses = Vec::new();
    for name in CORE_FUNCTIONS {
        let e = corpus::find(&corpus, name).unwrap();
        let mut zero = true;
        for kind in [FitnessKind::Lc, FitnessKind::Bc] {
            let cfg = SearchConfig::default().with_seed(STUDY_SEED_LOCK);
            let r = testgen::evolve_suite(&e.function, &e.profile, kind, &cfg, &[]).unwrap();
            let min = testgen::minimize_suite(&r.suite, &e.function, kind, &[], cfg.step_budget);
            zero &= r.report.value == 0.0 && r.evaluations <= 10_000;
            sizes_ok &= (1..=5).contains(&min.len());
        }
        if zero {
            both_zero += 1;
        } else {
            misses.push(name);
        }
    }
    let took = start.elapsed();
    (
        both_zero >= 18 && sizes_ok && took < Duration::from_secs(300),
        format!("{both_zero}/20 functions reach 0 for line and branch, minimized sizes in 1..=5: {sizes_ok}, misses {misses:?}, {took:.2?}"),
    )
}

// ---------------------------------------------------------------- study runs

fn run_cli_study(config: &Path, out: &Path) -> Duration {
    let start = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_mtw"))
        .args(["experiment", "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .env_remove("MTW_SEED")
        .stdout(std::process::Stdio::null())
        .status()
        .expect("mtw runs");
    assert!(status.success(), "mtw experiment failed: {status}");
    start.elapsed()
}

fn files_under(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

// ---------------------------------------------------------------- 5

fn identity_mutants(f: &FunctionDef) -> Vec<Mutant> {
    let mut out = Vec::new();
    f.walk_exprs(&mut |e| {
        let rep = match &e.kind {
            ExprKind::Arith(op, ..) => Some(Replacement::Arith(*op)),
            ExprKind::Compare(op, ..) => Some(Replacement::Rel(*op)),
            ExprKind::Logic(op, ..) => Some(Replacement::Logic(*op)),
            ExprKind::Num(c) => Some(Replacement::Constant(*c)),
            _ => None,
        };
        if let Some(replacement) = rep {
            out.push(Mutant {
                id: out.len(),
                operator: MutationOperator::Aor,
                location: e.id,
                line: 0,
                original: String::new(),
                replacement,
            });
        }
    });
    out
}

fn properties(
    corpus: &[CorpusEntry],
    plan: &ExperimentPlan,
    results: &ExperimentResults,
    dir_a: &Path,
    dir_b: &Path,
) -> (bool, String) {
    let mut notes = Vec::new();

    // (a) fitness never worsens when suites are merged.
    let mut a_ok = true;
    for kind in FitnessKind::ALL {
        for trial in 0..200u64 {
            let e = &corpus[(trial as usize * 7 + kind as usize) % corpus.len()];
            let ms = mutation::generate_mutants(&e.function, &MutationOperator::ALL);
            let s1 = testgen::random_suite(&e.name, &e.profile, 1 + trial as usize % 3, trial).unwrap();
            let s2 = testgen::random_suite(&e.name, &e.profile, 1 + trial as usize % 2, trial + 10_000).unwrap();
            let mut u = s1.clone();
            u.tests.extend(s2.tests.iter().cloned());
            let fit = |s| testgen::fitness(kind, s, &e.function, &ms.mutants).value;
            let (f1, f2, fu) = (fit(&s1), fit(&s2), fit(&u));
            if fu > f1.min(f2) + 1e-12 {
                a_ok = false;
                notes.push(format!("{} {}: union {fu} > {f1}/{f2}", kind.name(), e.name));
            }
        }
    }

    // (b) combined kill sets dominate their parts.
    let mut b_ok = true;
    let mut pairs = 0;
    for f in &results.kills.functions {
        let ss: Vec<_> = f.strategies.values().collect();
        for i in 0..ss.len() {
            for j in i + 1..ss.len() {
                let u = combine_suites(&[ss[i], ss[j]]).unwrap();
                pairs += 1;
                b_ok &= u.killed.len() >= ss[i].killed.len().max(ss[j].killed.len());
            }
        }
    }

    // (c) after filtering, no pair is violated on the original program.
    let mut c_ok = true;
    let mut checked = 0;
    for (m, rec) in plan.methods.iter().zip(&results.functions) {
        let e = corpus::find(corpus, &m.name).unwrap();
        let (mrs, _) = experiment::function_relations(plan, m, e);
        for (origin, sr) in &rec.suites {
            let planned = mrengine::plan_pairs(&sr.suite.tests, &mrs, &e.profile);
            let first = mrengine::execute_plan(&e.function, &sr.suite.tests, &planned, e.comparison_mode, plan.budget);
            let kept: Vec<_> = planned
                .into_iter()
                .zip(&first)
                .filter(|(_, v)| v.verdict == Verdict::Pass)
                .map(|(p, _)| p)
                .collect();
            let surviving: usize = sr.pairs.values().map(|c| c.surviving).sum();
            let again = mrengine::execute_plan(&e.function, &sr.suite.tests, &kept, e.comparison_mode, plan.budget);
            checked += again.len();
            if kept.len() != surviving || again.iter().any(|v| v.verdict == Verdict::Violated) {
                c_ok = false;
                notes.push(format!("{}/{origin}: filtered pairs still violate", m.name));
            }
        }
    }

    // (d) identity shadows are never infected.
    let mut d_ok = true;
    for trial in 0..500u64 {
        let e = &corpus[trial as usize % corpus.len()];
        let ids = identity_mutants(&e.function);
        let args = corpus::sample_input(&e.profile, trial).unwrap();
        let (_, res) = mutation::weak_run(&e.function, &ids, &args, DEFAULT_BUDGET).unwrap();
        d_ok &= res.iter().all(|r| !r.is_infected());
    }

    // (e) byte-identical reports from two runs.
    let (fa, fb) = (files_under(dir_a), files_under(dir_b));
    let e_ok = !fa.is_empty() && fa == fb;

    let ok = a_ok && b_ok && c_ok && d_ok && e_ok;
    (
        ok,
        format!(
            "(a) union fitness {a_ok}, (b) {pairs} strategy pairs {b_ok}, (c) {checked} filtered pairs {c_ok}, \
             (d) 500 identity trials {d_ok}, (e) {} files identical {e_ok}{}",
            fa.len(),
            if notes.is_empty() { String::new() } else { format!(" [{}]", notes.join("; ")) }
        ),
    )
}

// ---------------------------------------------------------------- 6

const MICRO_MANIFEST: &str = r#"
[[function]]
name = "add"
output = "scalar"
comparison = "scalar"
mrs = ["addition", "multiplication", "shuffle", "inclusive", "exclusive", "invertive"]
length = [1, 5]
values = [0, 10]
integers = true

[[function]]
name = "maxv"
output = "scalar"
comparison = "scalar"
mrs = ["addition", "multiplication", "shuffle", "inclusive", "exclusive", "invertive"]
length = [1, 5]
values = [0, 10]
integers = true

[[function]]
name = "sq"
output = "scalar"
comparison = "scalar"
mrs = ["addition", "multiplication", "shuffle", "inclusive", "exclusive", "invertive"]
length = [1, 5]
values = [0, 10]
integers = true
"#;

const ADD: &str = "fn add(a: array) { s = 0; for v in a { s = s + v; } return s; }";
const MAXV: &str = "fn maxv(a: array) { m = a[0]; for v in a { if (v > m) { m = v; } } return m; }";
const SQ: &str = "fn sq(a: array) { s = 0; for v in a { s = s + v * v; } return s; }";

/// Every AOR, ROR and UOI mutant of the micro functions, written out.
const MICRO_MUTANTS: [(&str, &str); 26] = [
    ("add", "fn add(a: array) { s = 0; for v in a { s = s - v; } return s; }"),
    ("add", "fn add(a: array) { s = 0; for v in a { s = s * v; } return s; }"),
    ("add", "fn add(a: array) { s = 0; for v in a { s = s / v; } return s; }"),
    ("add", "fn add(a: array) { s = 0; for v in a { s = -s + v; } return s; }"),
    ("add", "fn add(a: array) { s = 0; for v in a { s = s + -v; } return s; }"),
    ("add", "fn add(a: array) { s = 0; for v in a { s = s + v; } return -s; }"),
    ("maxv", "fn maxv(a: array) { m = -a[0]; for v in a { if (v > m) { m = v; } } return m; }"),
    ("maxv", "fn maxv(a: array) { m = a[0]; for v in a { if (-v > m) { m = v; } } return m; }"),
    ("maxv", "fn maxv(a: array) { m = a[0]; for v in a { if (v > -m) { m = v; } } return m; }"),
    ("maxv", "fn maxv(a: array) { m = a[0]; for v in a { if (v > m) { m = -v; } } return m; }"),
    ("maxv", "fn maxv(a: array) { m = a[0]; for v in a { if (v > m) { m = v; } } return -m; }"),
    ("maxv", "fn maxv(a: array) { m = a[0]; for v in a { if (v == m) { m = v; } } return m; }"),
    ("maxv", "fn maxv(a: array) { m = a[0]; for v in a { if (v != m) { m = v; } } return m; }"),
    ("maxv", "fn maxv(a: array) { m = a[0]; for v in a { if (v < m) { m = v; } } return m; }"),
    ("maxv", "fn maxv(a: array) { m = a[0]; for v in a { if (v <= m) { m = v; } } return m; }"),
    ("maxv", "fn maxv(a: array) { m = a[0]; for v in a { if (v >= m) { m = v; } } return m; }"),
    ("sq", "fn sq(a: array) { s = 0; for v in a { s = s - v * v; } return s; }"),
    ("sq", "fn sq(a: array) { s = 0; for v in a { s = s * (v * v); } return s; }"),
    ("sq", "fn sq(a: array) { s = 0; for v in a { s = s / (v * v); } return s; }"),
    ("sq", "fn sq(a: array) { s = 0; for v in a { s = s + (v + v); } return s; }"),
    ("sq", "fn sq(a: array) { s = 0; for v in a { s = s + (v - v); } return s; }"),
    ("sq", "fn sq(a: array) { s = 0; for v in a { s = s + v / v; } return s; }"),
    ("sq", "fn sq(a: array) { s = 0; for v in a { s = -s + v * v; } return s; }"),
    ("sq", "fn sq(a: array) { s = 0; for v in a { s = s + (-v) * v; } return s; }"),
    ("sq", "fn sq(a: array) { s = 0; for v in a { s = s + v * (-v); } return s; }"),
    ("sq", "fn sq(a: array) { s = 0; for v in a { s = s + v * v; } return -s; }"),
];

fn parse_one(src: &str) -> FunctionDef {
    dsl::parse(src).unwrap().functions.remove(0)
}

fn naive_run(f: &FunctionDef, args: &[f64]) -> Option<f64> {
    match dsl::evaluate(f, &[Value::Array(args.to_vec())], 100_000).ok()?.outcome {
        RunOutcome::Normal(Value::Scalar(x)) => Some(x),
        _ => None,
    }
}

fn naive_holds(kind: MrKind, a: f64, b: f64) -> bool {
    let slack = 1e-9 + 1e-9 * a.abs().max(b.abs());
    match kind {
        MrKind::Addition | MrKind::Multiplication | MrKind::Inclusive => b >= a - slack,
        MrKind::Exclusive | MrKind::Invertive => b <= a + slack,
        MrKind::Shuffle => (a - b).abs() <= slack,
    }
}

/// Follow-up input, or `None` when the relation does not apply. Shuffle
/// and Inclusive draw from the relation's seeded generator, so those two
/// come from the engine.
fn naive_followup(kind: MrKind, seed: u64, xs: &[f64], e: &CorpusEntry) -> Option<Vec<f64>> {
    match kind {
        MrKind::Addition => Some(xs.iter().map(|x| x + 2.0).collect()),
        MrKind::Multiplication => Some(xs.iter().map(|x| x * 2.0).collect()),
        MrKind::Invertive => Some(xs.iter().map(|x| -x).collect()),
        MrKind::Exclusive => (xs.len() > 1).then(|| xs[..xs.len() - 1].to_vec()),
        MrKind::Shuffle | MrKind::Inclusive => {
            let mr = MetamorphicRelation::new(kind).with_seed(seed);
            let t = TestCase::new(vec![Value::Array(xs.to_vec())]);
            match mrengine::derive_followup(&mr, &t, &e.profile).ok()?.args.remove(0) {
                Value::Array(v) => Some(v),
                _ => None,
            }
        }
    }
}

fn oracle_equivalence() -> (bool, String) {
    let start = Instant::now();
    let corpus = corpus_from_parts(MICRO_MANIFEST, &[("add", ADD), ("maxv", MAXV), ("sq", SQ)]).unwrap();
    let ops = vec![MutationOperator::Aor, MutationOperator::Ror, MutationOperator::Uoi];
    let plan = ExperimentPlan {
        seed: 11,
        budget: 100_000,
        operators: ops,
        search: SearchConfig::default(),
        methods: ["add", "maxv", "sq"]
            .iter()
            .map(|n| MethodPlan {
                name: n.to_string(),
                num_tests: 5,
                mrs: MrKind::ALL.iter().map(|k| MetamorphicRelation::new(*k)).collect(),
                sources: [Provenance::Random, Provenance::Branch, Provenance::WeakMutation]
                    .iter()
                    .map(|o| SourceSpec {
                        origin: *o,
                        seed: None,
                        path: None,
                    })
                    .collect(),
            })
            .collect(),
    };
    let results = experiment::run_experiment(&plan, &corpus).unwrap();

    // Engine mutant id -> hand-written mutant, matched on printed text.
    let mut handwritten: BTreeMap<(String, String), usize> = BTreeMap::new();
    for (i, (fname, src)) in MICRO_MUTANTS.iter().enumerate() {
        let text = dsl::function_to_string(&parse_one(src));
        assert!(handwritten.insert((fname.to_string(), text), i).is_none(), "duplicate hand-written mutant {i}");
    }
    let mut mapping: BTreeMap<(String, usize), usize> = BTreeMap::new();
    let mut unmatched = Vec::new();
    for (rec, e) in results.functions.iter().zip(&corpus) {
        for m in &rec.mutants.mutants {
            let text = dsl::function_to_string(&m.apply(&e.function));
            match handwritten.get(&(rec.function.clone(), text.clone())) {
                Some(i) => {
                    mapping.insert((rec.function.clone(), m.id), *i);
                }
                None => unmatched.push(text),
            }
        }
    }
    let total: usize = results.functions.iter().map(|r| r.mutants.len()).sum();
    let bijective = unmatched.is_empty()
        && total == MICRO_MUTANTS.len()
        && mapping.values().collect::<BTreeSet<_>>().len() == MICRO_MUTANTS.len();

    // Brute force: every (strategy, mutant, test, relation).
    let mut mismatches = 0;
    let mut oracle_kills = 0;
    for (rec, k) in results.functions.iter().zip(&results.kills.functions) {
        let e = corpus::find(&corpus, &rec.function).unwrap();
        let original = parse_one(match rec.function.as_str() {
            "add" => ADD,
            "maxv" => MAXV,
            _ => SQ,
        });
        for (origin, sr) in &rec.suites {
            let mut expect: BTreeMap<MrKind, BTreeSet<usize>> = MrKind::ALL.iter().map(|m| (*m, BTreeSet::new())).collect();
            for m in &rec.mutants.mutants {
                let mutant = parse_one(MICRO_MUTANTS[mapping[&(rec.function.clone(), m.id)]].1);
                for t in &sr.suite.tests {
                    let Value::Array(xs) = &t.args[0] else { panic!("array input") };
                    for kind in MrKind::ALL {
                        let seed = experiment::relation_seed(plan.seed, &rec.function, kind);
                        let Some(fu) = naive_followup(kind, seed, xs, e) else { continue };
                        let (Some(a), Some(b)) = (naive_run(&original, xs), naive_run(&original, &fu)) else {
                            continue;
                        };
                        if !naive_holds(kind, a, b) {
                            continue;
                        }
                        let killed = match (naive_run(&mutant, xs), naive_run(&mutant, &fu)) {
                            (Some(a), Some(b)) => !naive_holds(kind, a, b),
                            _ => true,
                        };
                        if killed {
                            expect.get_mut(&kind).unwrap().insert(m.id);
                        }
                    }
                }
            }
            let all: BTreeSet<usize> = expect.values().flatten().copied().collect();
            oracle_kills += all.len();
            let got = &k.strategies[origin];
            if got.killed != all || got.per_mr != expect {
                mismatches += 1;
            }
        }
    }
    let took = start.elapsed();
    let ok = bijective && mismatches == 0 && took < Duration::from_secs(10);
    (
        ok,
        format!(
            "{total} mutants matched to hand-written text: {bijective}, {oracle_kills} oracle kills over 9 cells, \
             {mismatches} mismatching cells, {took:.2?}"
        ),
    )
}

// ---------------------------------------------------------------- 7

fn study_check(plan: &ExperimentPlan, results: &ExperimentResults, dir: &Path, took: Duration) -> (bool, String) {
    let strategies = [Provenance::Random, Provenance::Line, Provenance::Branch, Provenance::WeakMutation];
    let shape_ok = plan.methods.len() >= 20
        && plan.methods.iter().all(|m| m.mrs.len() == 6 && m.sources.len() == 4)
        && results.strategies == strategies;
    let files = ["table2.csv", "table3.csv", "table4.csv", "fig4.csv", "fig6.csv", "best_sets.csv", "summary.md"];
    let files_ok = files.iter().all(|f| dir.join(f).is_file());
    let (wk, wn) = results.kills.totals(Provenance::WeakMutation);
    let (rk, rn) = results.kills.totals(Provenance::Random);
    let wr = 100.0 * wk as f64 / wn as f64;
    let rr = 100.0 * rk as f64 / rn as f64;
    let locked = plan.seed != STUDY_SEED_LOCK
        || (wk, rk, wn, rn) == (LOCKED_WM_KILLED, LOCKED_RANDOM_KILLED, LOCKED_MUTANTS, LOCKED_MUTANTS);
    let direction = if wr >= rr {
        "weak mutation >= random, matching the reference direction"
    } else {
        "weak mutation < random, reference direction not reproduced"
    };
    (
        shape_ok && files_ok && locked && took < Duration::from_secs(600),
        format!(
            "{} functions x 4 strategies x 6 relations in {took:.2?}, tables written {files_ok}, \
             kill rates weak_mutation {wr:.2}% vs random {rr:.2}% ({direction}), seed-{STUDY_SEED_LOCK} lock {locked}",
            plan.methods.len()
        ),
    )
}

#[test]
fn acceptance() {
    let mut all = true;
    let (ok, d) = worked_example();
    all &= report("1 (worked example)", ok, &d);
    let (ok, d) = branch_distance();
    all &= report("2 (branch distance)", ok, &d);
    let (ok, d) = statistics();
    all &= report("3 (size statistics)", ok, &d);
    let (ok, d) = coverage_search();
    all &= report("4 (coverage search)", ok, &d);

    let config = root().join("configs/study.xml");
    let corpus = corpus::load_corpus().unwrap();
    let plan = experiment::parse_config(&std::fs::read_to_string(&config).unwrap(), &corpus).unwrap();
    let tmp = tempfile::tempdir().unwrap();
    let (dir_a, dir_b) = (tmp.path().join("a"), tmp.path().join("b"));
    let took = run_cli_study(&config, &dir_a);
    run_cli_study(&config, &dir_b);
    let results = experiment::read_results(&dir_a).unwrap();

    let (ok, d) = properties(&corpus, &plan, &results, &dir_a, &dir_b);
    all &= report("5 (properties)", ok, &d);
    let (ok, d) = oracle_equivalence();
    all &= report("6 (oracle equivalence)", ok, &d);
    let (ok, d) = study_check(&plan, &results, &dir_a, took);
    all &= report("7 (end-to-end study)", ok, &d);
    assert!(all, "some acceptance criteria failed; see the lines above");
}
