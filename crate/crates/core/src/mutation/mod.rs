//! First-order mutants of DSL functions, strong-kill comparison and
//! weak-infection monitoring.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dsl::{
    self, apply_arith, branch_distance, evaluate_observed, ArithOp, DslError, ExecutionTrace, Expr,
    ExprId, ExprKind, FunctionDef, LogicOp, Observation, Observer, RelOp, RunOutcome, Ty, UnaryOp,
    Value,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MutationOperator {
    /// Arithmetic operator replacement.
    #[serde(rename = "AOR")]
    Aor,
    /// Relational operator replacement.
    #[serde(rename = "ROR")]
    Ror,
    /// Unary negation inserted in front of a scalar operand.
    #[serde(rename = "UOI")]
    Uoi,
    /// Logical connector replacement.
    #[serde(rename = "LCR")]
    Lcr,
    /// Constant replacement.
    #[serde(rename = "CRP")]
    Crp,
}

impl MutationOperator {
    pub const ALL: [MutationOperator; 5] = [
        MutationOperator::Aor,
        MutationOperator::Ror,
        MutationOperator::Uoi,
        MutationOperator::Lcr,
        MutationOperator::Crp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MutationOperator::Aor => "AOR",
            MutationOperator::Ror => "ROR",
            MutationOperator::Uoi => "UOI",
            MutationOperator::Lcr => "LCR",
            MutationOperator::Crp => "CRP",
        }
    }
}

impl fmt::Display for MutationOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MutationOperator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MutationOperator::ALL
            .into_iter()
            .find(|o| o.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown mutation operator `{s}`"))
    }
}

/// The edit a mutant makes at its location.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Replacement {
    Arith(ArithOp),
    Rel(RelOp),
    Logic(LogicOp),
    Negate,
    Constant(f64),
}

impl Replacement {
    pub fn token(&self) -> String {
        match self {
            Replacement::Arith(op) => op.symbol().to_string(),
            Replacement::Rel(op) => op.symbol().to_string(),
            Replacement::Logic(op) => op.symbol().to_string(),
            Replacement::Negate => "-".to_string(),
            Replacement::Constant(c) => dsl::format_number(*c),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mutant {
    pub id: usize,
    pub operator: MutationOperator,
    pub location: ExprId,
    /// Source line of the statement holding the mutated node.
    pub line: usize,
    pub original: String,
    pub replacement: Replacement,
}

impl Mutant {
    /// Node path used in catalogs, e.g. `L4/e12`.
    pub fn path(&self) -> String {
        format!("L{}/{}", self.line, self.location)
    }

    /// Returns a copy of `f` with this mutant's edit applied.
    pub fn apply(&self, f: &FunctionDef) -> FunctionDef {
        let mut g = f.clone();
        let fresh = ExprId(g.expr_count);
        let mut applied = false;
        g.walk_exprs_mut(&mut |e| {
            if applied || e.id != self.location {
                return;
            }
            applied = true;
            match (&mut e.kind, self.replacement) {
                (ExprKind::Arith(op, ..), Replacement::Arith(r)) => *op = r,
                (ExprKind::Compare(op, ..), Replacement::Rel(r)) => *op = r,
                (ExprKind::Logic(op, ..), Replacement::Logic(r)) => *op = r,
                (ExprKind::Num(c), Replacement::Constant(r)) => *c = r,
                (_, Replacement::Negate) => {
                    let inner = e.clone();
                    *e = Expr {
                        id: fresh,
                        ty: Ty::Scalar,
                        kind: ExprKind::Unary(UnaryOp::Neg, Box::new(inner)),
                    };
                }
                _ => panic!("mutant {} does not fit node {}", self.id, self.location),
            }
        });
        assert!(applied, "mutant location {} not found", self.location);
        if self.replacement == Replacement::Negate {
            g.expr_count += 1;
        }
        g
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MutantSet {
    pub function: String,
    pub mutants: Vec<Mutant>,
}

impl MutantSet {
    pub fn len(&self) -> usize {
        self.mutants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mutants.is_empty()
    }

    /// Writes the catalog as CSV: id, operator, node path, original, replacement.
    pub fn write_catalog<W: io::Write>(&self, w: W) -> Result<(), csv::Error> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["id", "operator", "path", "original", "replacement"])?;
        for m in &self.mutants {
            out.write_record([
                m.id.to_string(),
                m.operator.to_string(),
                m.path(),
                m.original.clone(),
                m.replacement.token(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

fn candidates(e: &Expr, op: MutationOperator) -> (String, Vec<Replacement>) {
    match (op, &e.kind) {
        (MutationOperator::Aor, ExprKind::Arith(o, ..)) => (
            o.symbol().into(),
            ArithOp::ALL.iter().filter(|x| *x != o).map(|x| Replacement::Arith(*x)).collect(),
        ),
        (MutationOperator::Ror, ExprKind::Compare(o, ..)) => (
            o.symbol().into(),
            RelOp::ALL.iter().filter(|x| *x != o).map(|x| Replacement::Rel(*x)).collect(),
        ),
        (MutationOperator::Lcr, ExprKind::Logic(o, ..)) => {
            (o.symbol().into(), vec![Replacement::Logic(o.flipped())])
        }
        (MutationOperator::Uoi, ExprKind::Var(_) | ExprKind::Index { .. }) if e.ty == Ty::Scalar => {
            (String::new(), vec![Replacement::Negate])
        }
        (MutationOperator::Crp, ExprKind::Num(c)) => {
            let mut out: Vec<f64> = Vec::new();
            for r in [0.0, 1.0, -1.0, c + 1.0, c - 1.0] {
                if r != *c && !out.contains(&r) {
                    out.push(r);
                }
            }
            (dsl::format_number(*c), out.into_iter().map(Replacement::Constant).collect())
        }
        _ => (String::new(), Vec::new()),
    }
}

/// Enumerates every mutant of `f` for the enabled operators.
///
/// Nodes are visited in preorder; at each node operators follow
/// [`MutationOperator::ALL`]. Mutants whose edited function prints
/// identically to an earlier one are dropped.
pub fn generate_mutants(f: &FunctionDef, operators: &[MutationOperator]) -> MutantSet {
    let mut lines = BTreeMap::new();
    f.walk_stmts(&mut |s| {
        for e in s.exprs() {
            e.walk(&mut |x| {
                lines.insert(x.id, s.line);
            });
        }
    });
    let mut nodes: Vec<&Expr> = Vec::new();
    f.walk_exprs(&mut |e| nodes.push(e));
    let mut seen = HashSet::new();
    seen.insert(dsl::function_to_string(f));
    let mut mutants = Vec::new();
    for e in nodes {
        for op in MutationOperator::ALL {
            if !operators.contains(&op) {
                continue;
            }
            let (original, reps) = candidates(e, op);
            for replacement in reps {
                let mut m = Mutant {
                    id: mutants.len(),
                    operator: op,
                    location: e.id,
                    line: lines[&e.id],
                    original: if replacement == Replacement::Negate {
                        dsl::expr_to_string(f, e)
                    } else {
                        original.clone()
                    },
                    replacement,
                };
                if seen.insert(dsl::function_to_string(&m.apply(f))) {
                    m.id = mutants.len();
                    mutants.push(m);
                }
            }
        }
    }
    MutantSet {
        function: f.name.clone(),
        mutants,
    }
}

/// Evaluates the mutated function.
pub fn evaluate_mutant(
    f: &FunctionDef,
    mutant: &Mutant,
    args: &[Value],
    budget: u64,
) -> Result<ExecutionTrace, DslError> {
    dsl::evaluate(&mutant.apply(f), args, budget)
}

/// Relative/absolute tolerance for output comparison.
pub const OUTPUT_TOLERANCE: f64 = 1e-9;

fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= OUTPUT_TOLERANCE + OUTPUT_TOLERANCE * a.abs().max(b.abs())
}

/// Whether two outputs are observably different.
pub fn outputs_differ(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Scalar(x), Value::Scalar(y)) => !close(*x, *y),
        (Value::Bool(x), Value::Bool(y)) => x != y,
        (Value::Array(x), Value::Array(y)) => {
            x.len() != y.len() || x.iter().zip(y).any(|(p, q)| !close(*p, *q))
        }
        _ => true,
    }
}

/// Whether a mutant run is distinguishable from a normal original run.
///
/// A different output, a different output kind, a runtime error or budget
/// exhaustion all count. When the original itself did not terminate
/// normally nothing counts.
pub fn strongly_killed(original: &RunOutcome, mutant: &RunOutcome) -> bool {
    match (original, mutant) {
        (RunOutcome::Normal(a), RunOutcome::Normal(b)) => outputs_differ(a, b),
        (RunOutcome::Normal(_), _) => true,
        _ => false,
    }
}

/// Weak-mutation status of one mutant for one test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeakResult {
    Unreached,
    ReachedNotInfected(f64),
    Infected,
}

impl WeakResult {
    /// Keeps the stronger of two results: infected over reached over unreached.
    pub fn merge(self, other: WeakResult) -> WeakResult {
        use WeakResult::*;
        match (self, other) {
            (Infected, _) | (_, Infected) => Infected,
            (ReachedNotInfected(a), ReachedNotInfected(b)) => ReachedNotInfected(a.min(b)),
            (r @ ReachedNotInfected(_), Unreached) | (Unreached, r @ ReachedNotInfected(_)) => r,
            (Unreached, Unreached) => Unreached,
        }
    }

    pub fn is_infected(self) -> bool {
        self == WeakResult::Infected
    }
}

/// Observer that shadows many mutants over one run of the original.
///
/// At each evaluation of a mutated node it recomputes the node under the
/// mutant's edit from the original operand values and compares.
pub struct WeakMonitor<'m> {
    mutants: &'m [Mutant],
    by_node: Vec<Vec<usize>>,
    results: Vec<WeakResult>,
}

impl<'m> WeakMonitor<'m> {
    pub fn new(f: &FunctionDef, mutants: &'m [Mutant]) -> Self {
        let mut by_node = vec![Vec::new(); f.expr_count as usize];
        for (i, m) in mutants.iter().enumerate() {
            by_node[m.location.index()].push(i);
        }
        WeakMonitor {
            mutants,
            by_node,
            results: vec![WeakResult::Unreached; mutants.len()],
        }
    }

    pub fn into_results(self) -> Vec<WeakResult> {
        self.results
    }
}

fn shadow(rep: Replacement, obs: &Observation) -> WeakResult {
    let flat = WeakResult::ReachedNotInfected(1.0);
    match (rep, obs) {
        (Replacement::Arith(op), Observation::Arith { lhs, rhs, result, .. }) => {
            match (result, apply_arith(op, *lhs, *rhs)) {
                (Ok(a), Ok(b)) if *a == b => flat,
                (Err(a), Err(b)) if *a == b => flat,
                _ => WeakResult::Infected,
            }
        }
        (Replacement::Rel(op), Observation::Compare { lhs, rhs, result, .. }) => {
            let Ok((d_true, d_false)) = branch_distance(op, *lhs, *rhs) else {
                return WeakResult::Infected;
            };
            let mutated = d_true == 0.0;
            if mutated != result.value {
                WeakResult::Infected
            } else {
                let flip_mut = if mutated { d_false } else { d_true };
                WeakResult::ReachedNotInfected(result.flip_distance().min(flip_mut))
            }
        }
        (Replacement::Logic(op), Observation::Logic { lhs, rhs, result, .. }) => {
            let short = matches!((op, lhs.value), (LogicOp::And, false) | (LogicOp::Or, true));
            let mutated = if short {
                lhs.value
            } else {
                match rhs {
                    Ok(r) => r.value,
                    Err(_) => return WeakResult::Infected,
                }
            };
            if mutated != *result {
                return WeakResult::Infected;
            }
            // `a and b` and `a or b` differ exactly when the operands differ.
            let d = match rhs {
                Ok(r) => lhs.flip_distance().min(r.flip_distance()),
                Err(_) => lhs.flip_distance(),
            };
            WeakResult::ReachedNotInfected(d)
        }
        (Replacement::Negate, Observation::Scalar(v)) => {
            if -*v != *v {
                WeakResult::Infected
            } else {
                flat
            }
        }
        (Replacement::Constant(c), Observation::Scalar(v)) => {
            if c != *v {
                WeakResult::Infected
            } else {
                flat
            }
        }
        _ => flat,
    }
}

impl Observer for WeakMonitor<'_> {
    #[inline]
    fn observes(&self, id: ExprId) -> bool {
        self.by_node.get(id.index()).is_some_and(|v| !v.is_empty())
    }

    fn observe(&mut self, id: ExprId, obs: Observation) {
        for &i in &self.by_node[id.index()] {
            if self.results[i].is_infected() {
                continue;
            }
            let r = shadow(self.mutants[i].replacement, &obs);
            self.results[i] = self.results[i].merge(r);
        }
    }
}

/// Runs the original once and reports weak status for every mutant.
pub fn weak_run(
    f: &FunctionDef,
    mutants: &[Mutant],
    args: &[Value],
    budget: u64,
) -> Result<(ExecutionTrace, Vec<WeakResult>), DslError> {
    let (trace, monitor) = evaluate_observed(f, args, budget, WeakMonitor::new(f, mutants))?;
    Ok((trace, monitor.into_results()))
}

/// Weak status of a single mutant for one test.
pub fn weak_infection(
    f: &FunctionDef,
    mutant: &Mutant,
    args: &[Value],
    budget: u64,
) -> Result<WeakResult, DslError> {
    let (_, r) = weak_run(f, std::slice::from_ref(mutant), args, budget)?;
    Ok(r[0])
}
