use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{TestCase, TestSuite};
use crate::dsl::{self, ExecutionTrace, FunctionDef, Outcome, PredicateId, StmtId, DEFAULT_BUDGET};
use crate::mutation::{self, Mutant, WeakResult};

/// Maps a distance in `[0, inf]` to `[0, 1]`: `x / (x + 1)`.
///
/// # Panics
/// On negative or NaN input.
pub fn normalize(x: f64) -> f64 {
    assert!(x >= 0.0, "normalize expects a non-negative distance, got {x}");
    if x.is_infinite() {
        1.0
    } else {
        x / (x + 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FitnessKind {
    #[serde(rename = "line")]
    Lc,
    #[serde(rename = "branch")]
    Bc,
    #[serde(rename = "weak_mutation")]
    Wm,
}

impl FitnessKind {
    pub const ALL: [FitnessKind; 3] = [FitnessKind::Lc, FitnessKind::Bc, FitnessKind::Wm];

    pub fn name(self) -> &'static str {
        match self {
            FitnessKind::Lc => "line",
            FitnessKind::Bc => "branch",
            FitnessKind::Wm => "weak_mutation",
        }
    }
}

impl fmt::Display for FitnessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Goal {
    Line(StmtId),
    Branch(PredicateId, Outcome),
    Mutant(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitnessReport {
    pub kind: FitnessKind,
    pub value: f64,
    pub covered: BTreeSet<Goal>,
    pub uncovered: BTreeSet<Goal>,
    /// Normalized remaining distance of every uncovered goal.
    pub residuals: BTreeMap<Goal, f64>,
}

impl FitnessReport {
    pub fn is_complete(&self) -> bool {
        self.uncovered.is_empty()
    }
}

/// Result of running one test, as seen by fitness computation.
///
/// Runs that do not terminate normally keep no trace: they contribute no
/// coverage.
#[derive(Debug, Clone)]
pub struct TestRecord {
    trace: Option<ExecutionTrace>,
    weak: Vec<WeakResult>,
}

/// Function, criterion and mutants against which suites are scored.
#[derive(Debug, Clone)]
pub struct FitnessContext<'a> {
    pub function: &'a FunctionDef,
    pub kind: FitnessKind,
    pub mutants: &'a [Mutant],
    pub budget: u64,
}

struct Aggregate {
    covered: Vec<bool>,
    dmin: Vec<f64>,
    execs: Vec<u64>,
    weak: Vec<WeakResult>,
}

impl<'a> FitnessContext<'a> {
    pub fn new(function: &'a FunctionDef, kind: FitnessKind, mutants: &'a [Mutant]) -> Self {
        FitnessContext {
            function,
            kind,
            mutants,
            budget: DEFAULT_BUDGET,
        }
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn run(&self, test: &TestCase) -> TestRecord {
        let res = if self.kind == FitnessKind::Wm {
            mutation::weak_run(self.function, self.mutants, &test.args, self.budget)
        } else {
            dsl::evaluate(self.function, &test.args, self.budget).map(|t| (t, Vec::new()))
        };
        match res {
            Ok((t, weak)) if t.outcome.is_normal() => TestRecord { trace: Some(t), weak },
            _ => TestRecord {
                trace: None,
                weak: Vec::new(),
            },
        }
    }

    fn aggregate(&self, records: &[&TestRecord]) -> Aggregate {
        let f = self.function;
        let mut agg = Aggregate {
            covered: vec![false; f.stmt_count as usize],
            dmin: vec![f64::INFINITY; 2 * f.predicate_count as usize],
            execs: vec![0; f.predicate_count as usize],
            weak: vec![WeakResult::Unreached; if self.kind == FitnessKind::Wm { self.mutants.len() } else { 0 }],
        };
        for r in records {
            let Some(t) = &r.trace else { continue };
            for s in 0..agg.covered.len() {
                agg.covered[s] |= t.is_covered(StmtId(s as u32));
            }
            for p in 0..agg.execs.len() {
                let pid = PredicateId(p as u32);
                agg.execs[p] += t.executions(pid);
                for o in [Outcome::True, Outcome::False] {
                    if let Some(d) = t.distance(pid, o) {
                        let slot = &mut agg.dmin[p * 2 + o.slot()];
                        *slot = slot.min(d);
                    }
                }
            }
            for (w, x) in agg.weak.iter_mut().zip(&r.weak) {
                *w = w.merge(*x);
            }
        }
        agg
    }

    /// Per-goal residuals; zero means covered. Summing gives the fitness,
    /// except for line coverage, which adds the uncovered-line term.
    fn residuals(&self, agg: &Aggregate) -> (Vec<(Goal, f64)>, f64) {
        let f = self.function;
        let d = |p: PredicateId, o: Outcome| agg.dmin[p.index() * 2 + o.slot()];
        match self.kind {
            FitnessKind::Lc => {
                let uncovered_lines = agg.covered.iter().filter(|c| !**c).count();
                let mut value = normalize(uncovered_lines as f64);
                for (p, o) in f.control_dependent_branches() {
                    value += normalize(d(p, o));
                }
                let goals = (0..agg.covered.len())
                    .map(|s| {
                        let id = StmtId(s as u32);
                        let r = if agg.covered[s] {
                            0.0
                        } else {
                            let deps = f.control_dependencies.get(&id);
                            match deps.map(|ds| ds.iter().map(|(p, o)| normalize(d(*p, *o))).sum::<f64>()) {
                                Some(x) if x > 0.0 => x,
                                _ => 1.0,
                            }
                        };
                        (Goal::Line(id), r)
                    })
                    .collect();
                (goals, value)
            }
            FitnessKind::Bc => {
                let mut goals = Vec::new();
                for p in f.predicates() {
                    for o in [Outcome::True, Outcome::False] {
                        let dm = d(p, o);
                        let r = if dm == 0.0 {
                            0.0
                        } else if agg.execs[p.index()] >= 2 {
                            normalize(dm)
                        } else {
                            1.0
                        };
                        goals.push((Goal::Branch(p, o), normalize(r)));
                    }
                }
                let value = goals.iter().map(|g| g.1).sum();
                (goals, value)
            }
            FitnessKind::Wm => {
                let goals: Vec<(Goal, f64)> = agg
                    .weak
                    .iter()
                    .zip(self.mutants)
                    .map(|(w, m)| {
                        let r = match w {
                            WeakResult::Infected => 0.0,
                            WeakResult::ReachedNotInfected(x) => normalize(*x),
                            WeakResult::Unreached => 1.0,
                        };
                        (Goal::Mutant(m.id), r)
                    })
                    .collect();
                let value = goals.iter().map(|g| g.1).sum();
                (goals, value)
            }
        }
    }

    pub fn value(&self, records: &[&TestRecord]) -> f64 {
        self.residuals(&self.aggregate(records)).1
    }

    pub fn covered_goals(&self, records: &[&TestRecord]) -> BTreeSet<Goal> {
        let (goals, _) = self.residuals(&self.aggregate(records));
        goals.into_iter().filter(|g| g.1 == 0.0).map(|g| g.0).collect()
    }

    pub fn report(&self, records: &[&TestRecord]) -> FitnessReport {
        let (goals, value) = self.residuals(&self.aggregate(records));
        let mut rep = FitnessReport {
            kind: self.kind,
            value,
            covered: BTreeSet::new(),
            uncovered: BTreeSet::new(),
            residuals: BTreeMap::new(),
        };
        for (g, r) in goals {
            if r == 0.0 {
                rep.covered.insert(g);
            } else {
                rep.uncovered.insert(g);
                rep.residuals.insert(g, r);
            }
        }
        rep
    }

    pub fn evaluate_suite(&self, tests: &[TestCase]) -> FitnessReport {
        let records: Vec<TestRecord> = tests.iter().map(|t| self.run(t)).collect();
        let refs: Vec<&TestRecord> = records.iter().collect();
        self.report(&refs)
    }
}

/// Scores `suite` on `f`. `mutants` is only consulted for weak mutation.
pub fn fitness(kind: FitnessKind, suite: &TestSuite, f: &FunctionDef, mutants: &[Mutant]) -> FitnessReport {
    FitnessContext::new(f, kind, mutants).evaluate_suite(&suite.tests)
}
