//! The six metamorphic relations: follow-up derivation, output relation
//! checks and source/follow-up execution.

use std::fmt;
use std::io;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{ComparisonMode, InputProfile};
use crate::dsl::{self, FunctionDef, RunOutcome, Value};
use crate::seeds;
use crate::testgen::TestCase;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MrKind {
    Addition,
    Multiplication,
    Shuffle,
    Inclusive,
    Exclusive,
    Invertive,
}

impl MrKind {
    pub const ALL: [MrKind; 6] = [
        MrKind::Addition,
        MrKind::Multiplication,
        MrKind::Shuffle,
        MrKind::Inclusive,
        MrKind::Exclusive,
        MrKind::Invertive,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MrKind::Addition => "addition",
            MrKind::Multiplication => "multiplication",
            MrKind::Shuffle => "shuffle",
            MrKind::Inclusive => "inclusive",
            MrKind::Exclusive => "exclusive",
            MrKind::Invertive => "invertive",
        }
    }

    pub fn relation(self) -> Relation {
        match self {
            MrKind::Addition | MrKind::Multiplication | MrKind::Inclusive => Relation::NonDecreasing,
            MrKind::Exclusive | MrKind::Invertive => Relation::NonIncreasing,
            MrKind::Shuffle => Relation::Equal,
        }
    }
}

impl fmt::Display for MrKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MrKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MrKind::ALL
            .into_iter()
            .find(|k| k.name() == s.to_ascii_lowercase())
            .ok_or_else(|| format!("unknown metamorphic relation `{s}`"))
    }
}

/// Required relation between source output `a` and follow-up output `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    NonDecreasing,
    NonIncreasing,
    Equal,
}

impl Relation {
    /// Checks `a R b` with slack `tol + tol * max(|a|, |b|)`.
    pub fn holds(self, a: f64, b: f64, tol: f64) -> bool {
        let slack = tol + tol * a.abs().max(b.abs());
        match self {
            Relation::NonDecreasing => b >= a - slack,
            Relation::NonIncreasing => b <= a + slack,
            Relation::Equal => (a - b).abs() <= slack,
        }
    }
}

pub const DEFAULT_CONSTANT: f64 = 2.0;
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetamorphicRelation {
    pub kind: MrKind,
    /// Constant for Addition and Multiplication.
    pub constant: f64,
    /// Seeds the Shuffle permutation and the Inclusive element.
    pub seed: u64,
    pub tolerance: f64,
}

impl MetamorphicRelation {
    pub fn new(kind: MrKind) -> Self {
        MetamorphicRelation {
            kind,
            constant: DEFAULT_CONSTANT,
            seed: 0,
            tolerance: DEFAULT_TOLERANCE,
        }
    }

    pub fn with_constant(mut self, c: f64) -> Self {
        self.constant = c;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn relation(&self) -> Relation {
        self.kind.relation()
    }
}

fn map_arrays(test: &TestCase, f: impl Fn(f64) -> f64) -> TestCase {
    TestCase::new(
        test.args
            .iter()
            .map(|a| match a {
                Value::Array(xs) => Value::Array(xs.iter().map(|x| f(*x)).collect()),
                other => other.clone(),
            })
            .collect(),
    )
}

/// Derives the follow-up test, or the reason the relation does not apply.
///
/// Array parameters are transformed together; scalars pass through. The
/// Shuffle permutation and the Inclusive element depend only on the
/// relation's seed and the test content.
pub fn derive_followup(
    mr: &MetamorphicRelation,
    test: &TestCase,
    profile: &InputProfile,
) -> Result<TestCase, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seeds::child(mr.seed, seeds::hash_args(&test.args)));
    let out = match mr.kind {
        MrKind::Addition => map_arrays(test, |x| x + mr.constant),
        MrKind::Multiplication => map_arrays(test, |x| x * mr.constant),
        MrKind::Invertive => map_arrays(test, |x| -x),
        MrKind::Shuffle => {
            // One permutation per distinct length, shared by arrays of that length.
            let mut perms: Vec<Vec<usize>> = Vec::new();
            let args = test
                .args
                .iter()
                .map(|a| match a {
                    Value::Array(xs) => {
                        let p = match perms.iter().find(|p| p.len() == xs.len()) {
                            Some(p) => p.clone(),
                            None => {
                                let mut p: Vec<usize> = (0..xs.len()).collect();
                                p.shuffle(&mut rng);
                                perms.push(p.clone());
                                p
                            }
                        };
                        Value::Array(p.iter().map(|&i| xs[i]).collect())
                    }
                    other => other.clone(),
                })
                .collect();
            TestCase::new(args)
        }
        MrKind::Inclusive => {
            let mut args = Vec::with_capacity(test.args.len());
            for a in &test.args {
                args.push(match a {
                    Value::Array(xs) => {
                        let mut ys = xs.clone();
                        ys.push(profile.sample_value(&mut rng).map_err(|e| e.to_string())?);
                        Value::Array(ys)
                    }
                    other => other.clone(),
                });
            }
            TestCase::new(args)
        }
        MrKind::Exclusive => {
            let mut args = Vec::with_capacity(test.args.len());
            for a in &test.args {
                args.push(match a {
                    Value::Array(xs) => {
                        if xs.len() <= profile.length.0 || xs.is_empty() {
                            return Err(format!(
                                "removing an element would go below the minimum length {}",
                                profile.length.0
                            ));
                        }
                        Value::Array(xs[..xs.len() - 1].to_vec())
                    }
                    other => other.clone(),
                });
            }
            TestCase::new(args)
        }
    };
    profile
        .admits(&out.args)
        .map_err(|e| format!("follow-up outside the input domain: {e}"))?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "reason", rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Violated,
    Inapplicable(String),
    Error(String),
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Violated => "violated",
            Verdict::Inapplicable(_) => "inapplicable",
            Verdict::Error(_) => "error",
        }
    }

    /// Violated or error: the outcomes that count against a program.
    pub fn is_failure(&self) -> bool {
        matches!(self, Verdict::Violated | Verdict::Error(_))
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Inapplicable(r) | Verdict::Error(r) => write!(f, "{}({r})", self.label()),
            _ => f.write_str(self.label()),
        }
    }
}

/// Outcome of one (test, relation) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MtVerdict {
    pub test_index: usize,
    pub mr: MrKind,
    pub verdict: Verdict,
    pub source_output: Option<Value>,
    pub followup_output: Option<Value>,
}

fn as_number(v: &Value) -> Option<f64> {
    match v {
        Value::Scalar(x) => Some(*x),
        Value::Bool(b) => Some(*b as u8 as f64),
        Value::Array(_) => None,
    }
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Compares a source and a follow-up output under `mr`'s relation.
///
/// Scalars compare directly. Arrays compare position by position, after
/// sorting both sides in multiset mode.
pub fn check_relation(mr: &MetamorphicRelation, source: &Value, followup: &Value, mode: ComparisonMode) -> Verdict {
    let rel = mr.relation();
    let ok = match (source, followup) {
        (Value::Array(a), Value::Array(b)) => {
            if a.len() != b.len() {
                return Verdict::Inapplicable(format!("output lengths differ ({} vs {})", a.len(), b.len()));
            }
            let (a, b) = if mode == ComparisonMode::Multiset {
                (sorted(a), sorted(b))
            } else {
                (a.clone(), b.clone())
            };
            a.iter().zip(&b).all(|(x, y)| rel.holds(*x, *y, mr.tolerance))
        }
        (s, f) if std::mem::discriminant(s) == std::mem::discriminant(f) => {
            rel.holds(as_number(s).unwrap(), as_number(f).unwrap(), mr.tolerance)
        }
        (s, f) => {
            return Verdict::Error(format!("output kind mismatch: {} vs {}", s.kind_name(), f.kind_name()));
        }
    };
    if ok {
        Verdict::Pass
    } else {
        Verdict::Violated
    }
}

/// Comparison mode for a relation given an entry's configured mode: array
/// outputs use multiset comparison for Shuffle and elementwise otherwise.
pub fn effective_mode(kind: MrKind, mode: ComparisonMode) -> ComparisonMode {
    match (mode, kind) {
        (ComparisonMode::Scalar, _) => ComparisonMode::Scalar,
        (_, MrKind::Shuffle) => ComparisonMode::Multiset,
        _ => ComparisonMode::Elementwise,
    }
}

/// Everything `run_mt` needs besides the function, suite and relations.
#[derive(Debug, Clone)]
pub struct MtSetup<'a> {
    pub profile: &'a InputProfile,
    pub mode: ComparisonMode,
    pub budget: u64,
}

/// A derived follow-up for one (test, relation) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannedPair {
    pub test_index: usize,
    pub mr: MetamorphicRelation,
    pub followup: Result<TestCase, String>,
}

/// Derives follow-ups for every (test, relation) pair, test-major.
pub fn plan_pairs(tests: &[TestCase], mrs: &[MetamorphicRelation], profile: &InputProfile) -> Vec<PlannedPair> {
    let mut out = Vec::with_capacity(tests.len() * mrs.len());
    for (i, t) in tests.iter().enumerate() {
        for mr in mrs {
            out.push(PlannedPair {
                test_index: i,
                mr: *mr,
                followup: derive_followup(mr, t, profile),
            });
        }
    }
    out
}

fn run(f: &FunctionDef, test: &TestCase, budget: u64) -> Result<Value, String> {
    match dsl::evaluate(f, &test.args, budget) {
        Ok(t) => match t.outcome {
            RunOutcome::Normal(v) => Ok(v),
            other => Err(other.to_string()),
        },
        Err(e) => Err(e.to_string()),
    }
}

/// Executes planned pairs on `f` (original or mutant-applied).
pub fn execute_plan(
    f: &FunctionDef,
    tests: &[TestCase],
    plan: &[PlannedPair],
    mode: ComparisonMode,
    budget: u64,
) -> Vec<MtVerdict> {
    let sources: Vec<Result<Value, String>> = tests.iter().map(|t| run(f, t, budget)).collect();
    plan.iter()
        .map(|p| {
            let source = &sources[p.test_index];
            let mut v = MtVerdict {
                test_index: p.test_index,
                mr: p.mr.kind,
                verdict: Verdict::Pass,
                source_output: source.as_ref().ok().cloned(),
                followup_output: None,
            };
            v.verdict = match (source, &p.followup) {
                (Err(e), _) => Verdict::Error(format!("source: {e}")),
                (Ok(_), Err(reason)) => Verdict::Inapplicable(reason.clone()),
                (Ok(s), Ok(fu)) => match run(f, fu, budget) {
                    Err(e) => Verdict::Error(format!("follow-up: {e}")),
                    Ok(out) => {
                        let verdict = check_relation(&p.mr, s, &out, effective_mode(p.mr.kind, mode));
                        v.followup_output = Some(out);
                        verdict
                    }
                },
            };
            v
        })
        .collect()
}

/// Derives, executes and checks every (test, relation) pair.
pub fn run_mt(f: &FunctionDef, tests: &[TestCase], mrs: &[MetamorphicRelation], setup: &MtSetup<'_>) -> Vec<MtVerdict> {
    let plan = plan_pairs(tests, mrs, setup.profile);
    execute_plan(f, tests, &plan, setup.mode, setup.budget)
}

/// Writes a verdict log as CSV: fn, mutant, test, mr, verdict, source, follow-up.
pub fn write_verdict_log<W: io::Write>(
    w: W,
    rows: &[(String, String, MtVerdict)],
) -> Result<(), csv::Error> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["fn", "mutant", "test", "mr", "verdict", "source_output", "followup_output"])?;
    let show = |v: &Option<Value>| v.as_ref().map(|x| x.to_string()).unwrap_or_default();
    for (func, mutant, v) in rows {
        out.write_record([
            func.clone(),
            mutant.clone(),
            v.test_index.to_string(),
            v.mr.to_string(),
            v.verdict.to_string(),
            show(&v.source_output),
            show(&v.followup_output),
        ])?;
    }
    out.flush()?;
    Ok(())
}
