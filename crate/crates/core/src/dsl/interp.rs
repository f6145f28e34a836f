//! Instrumented tree-walking evaluator.

use std::collections::{BTreeMap, BTreeSet};

use super::ast::*;
use super::distance::{compare, BoolEval, K};
use super::value::{RunOutcome, RuntimeErrorKind, Value};
use super::DslError;

/// Default step budget for one evaluation.
pub const DEFAULT_BUDGET: u64 = 1_000_000;

/// What the evaluator reports to an [`Observer`] at a watched expression node.
#[derive(Debug, Clone, Copy)]
pub enum Observation {
    Arith {
        op: ArithOp,
        lhs: f64,
        rhs: f64,
        result: Result<f64, RuntimeErrorKind>,
    },
    Compare {
        op: RelOp,
        lhs: f64,
        rhs: f64,
        result: BoolEval,
    },
    /// Both operands are reported even when the original evaluation
    /// short-circuits; `rhs` is then evaluated on the side.
    Logic {
        op: LogicOp,
        lhs: BoolEval,
        rhs: Result<BoolEval, RuntimeErrorKind>,
        result: bool,
    },
    Scalar(f64),
}

/// Hook invoked at watched expression nodes during evaluation.
pub trait Observer {
    fn observes(&self, id: ExprId) -> bool;
    fn observe(&mut self, id: ExprId, obs: Observation);
}

/// Observer that watches nothing.
pub struct NoObserver;

impl Observer for NoObserver {
    #[inline]
    fn observes(&self, _id: ExprId) -> bool {
        false
    }
    fn observe(&mut self, _id: ExprId, _obs: Observation) {}
}

/// Per-evaluation record of coverage and branch distances.
#[derive(Debug, Clone, PartialEq)]
pub struct ExecutionTrace {
    covered: Vec<bool>,
    // Indexed by `pred * 2 + outcome.slot()`; infinity means never evaluated.
    distances: Vec<f64>,
    executions: Vec<u64>,
    pub steps: u64,
    pub outcome: RunOutcome,
}

impl ExecutionTrace {
    fn new(func: &FunctionDef) -> Self {
        ExecutionTrace {
            covered: vec![false; func.stmt_count as usize],
            distances: vec![f64::INFINITY; 2 * func.predicate_count as usize],
            executions: vec![0; func.predicate_count as usize],
            steps: 0,
            outcome: RunOutcome::BudgetExceeded,
        }
    }

    pub fn is_covered(&self, s: StmtId) -> bool {
        self.covered.get(s.index()).copied().unwrap_or(false)
    }

    /// Minimum observed distance for a branch, if its predicate was evaluated.
    pub fn distance(&self, p: PredicateId, o: Outcome) -> Option<f64> {
        self.distances
            .get(p.index() * 2 + o.slot())
            .copied()
            .filter(|d| d.is_finite())
    }

    pub fn executions(&self, p: PredicateId) -> u64 {
        self.executions.get(p.index()).copied().unwrap_or(0)
    }

    pub fn covered_statements(&self) -> BTreeSet<StmtId> {
        self.covered
            .iter()
            .enumerate()
            .filter(|(_, c)| **c)
            .map(|(i, _)| StmtId(i as u32))
            .collect()
    }

    pub fn branch_distances(&self) -> BTreeMap<(PredicateId, Outcome), f64> {
        let mut m = BTreeMap::new();
        for p in 0..self.executions.len() {
            for o in [Outcome::True, Outcome::False] {
                let pid = PredicateId(p as u32);
                if let Some(d) = self.distance(pid, o) {
                    m.insert((pid, o), d);
                }
            }
        }
        m
    }

    pub fn executions_per_predicate(&self) -> BTreeMap<PredicateId, u64> {
        self.executions
            .iter()
            .enumerate()
            .filter(|(_, n)| **n > 0)
            .map(|(p, n)| (PredicateId(p as u32), *n))
            .collect()
    }

    pub fn statement_count(&self) -> usize {
        self.covered.len()
    }

    pub fn predicate_count(&self) -> usize {
        self.executions.len()
    }
}

enum Halt {
    Error(RuntimeErrorKind),
    Budget,
}

impl From<RuntimeErrorKind> for Halt {
    fn from(k: RuntimeErrorKind) -> Self {
        Halt::Error(k)
    }
}

enum Flow {
    Next,
    Return(Value),
}

struct Machine<O: Observer> {
    slots: Vec<Option<Value>>,
    budget: u64,
    trace: ExecutionTrace,
    observer: O,
    observing: bool,
}

fn check_index(i: f64, len: usize) -> Result<usize, RuntimeErrorKind> {
    if i.fract() != 0.0 || !i.is_finite() {
        return Err(RuntimeErrorKind::NonIntegerIndex);
    }
    if i < 0.0 || i >= len as f64 {
        return Err(RuntimeErrorKind::IndexOutOfRange);
    }
    Ok(i as usize)
}

pub(crate) fn apply_arith(op: ArithOp, a: f64, b: f64) -> Result<f64, RuntimeErrorKind> {
    let r = match op {
        ArithOp::Add => a + b,
        ArithOp::Sub => a - b,
        ArithOp::Mul => a * b,
        ArithOp::Div => {
            if b == 0.0 {
                return Err(RuntimeErrorKind::DivisionByZero);
            }
            a / b
        }
    };
    if r.is_nan() {
        Err(RuntimeErrorKind::NotANumber)
    } else {
        Ok(r)
    }
}

/// Combines operand evaluations of a short-circuit connective.
/// `rhs` is `None` when the connective short-circuits.
pub(crate) fn combine_logic(op: LogicOp, lhs: BoolEval, rhs: Option<BoolEval>) -> BoolEval {
    match (op, rhs) {
        (LogicOp::And, None) => BoolEval {
            value: false,
            d_true: lhs.d_true + K,
            d_false: 0.0,
        },
        (LogicOp::And, Some(r)) => BoolEval {
            value: lhs.value && r.value,
            d_true: lhs.d_true + r.d_true,
            d_false: lhs.d_false.min(r.d_false),
        },
        (LogicOp::Or, None) => BoolEval {
            value: true,
            d_true: 0.0,
            d_false: lhs.d_false + K,
        },
        (LogicOp::Or, Some(r)) => BoolEval {
            value: lhs.value || r.value,
            d_true: lhs.d_true.min(r.d_true),
            d_false: lhs.d_false + r.d_false,
        },
    }
}

fn short_circuits(op: LogicOp, lhs: bool) -> bool {
    matches!((op, lhs), (LogicOp::And, false) | (LogicOp::Or, true))
}

impl<O: Observer> Machine<O> {
    #[inline]
    fn tick(&mut self) -> Result<(), Halt> {
        self.trace.steps += 1;
        if self.trace.steps > self.budget {
            Err(Halt::Budget)
        } else {
            Ok(())
        }
    }

    #[inline]
    fn watching(&self, id: ExprId) -> bool {
        self.observing && self.observer.observes(id)
    }

    fn record(&mut self, p: PredicateId, e: BoolEval) {
        let base = p.index() * 2;
        let d = &mut self.trace.distances;
        d[base] = d[base].min(e.d_true);
        d[base + 1] = d[base + 1].min(e.d_false);
        self.trace.executions[p.index()] += 1;
    }

    fn read(&self, slot: usize) -> Result<&Value, Halt> {
        self.slots[slot]
            .as_ref()
            .ok_or(Halt::Error(RuntimeErrorKind::Uninitialized))
    }

    fn read_array(&self, slot: usize) -> Result<&[f64], Halt> {
        match self.read(slot)? {
            Value::Array(a) => Ok(a),
            _ => unreachable!("type checked"),
        }
    }

    fn exec_block(&mut self, stmts: &[Stmt]) -> Result<Flow, Halt> {
        for s in stmts {
            if let Flow::Return(v) = self.exec(s)? {
                return Ok(Flow::Return(v));
            }
        }
        Ok(Flow::Next)
    }

    fn exec(&mut self, s: &Stmt) -> Result<Flow, Halt> {
        self.tick()?;
        self.trace.covered[s.id.index()] = true;
        match &s.kind {
            StmtKind::Assign { slot, value } => {
                let v = self.eval(value)?;
                self.slots[*slot] = Some(v);
                Ok(Flow::Next)
            }
            StmtKind::AssignIndex { slot, index, value } => {
                let i = self.scalar(index)?;
                let v = self.scalar(value)?;
                let len = self.read_array(*slot)?.len();
                let i = check_index(i, len)?;
                if let Some(Value::Array(a)) = self.slots[*slot].as_mut() {
                    a[i] = v;
                }
                Ok(Flow::Next)
            }
            StmtKind::If {
                pred,
                cond,
                then_body,
                else_body,
            } => {
                let c = self.boolean(cond)?;
                self.record(*pred, c);
                if c.value {
                    self.exec_block(then_body)
                } else if let Some(e) = else_body {
                    self.exec_block(e)
                } else {
                    Ok(Flow::Next)
                }
            }
            StmtKind::While { pred, cond, body } => loop {
                let c = self.boolean(cond)?;
                self.record(*pred, c);
                if !c.value {
                    return Ok(Flow::Next);
                }
                if let Flow::Return(v) = self.exec_block(body)? {
                    return Ok(Flow::Return(v));
                }
                self.tick()?;
            },
            StmtKind::For {
                pred,
                var,
                iterable,
                body,
            } => {
                let items = self.array(iterable)?;
                let n = items.len() as f64;
                let mut i = 0usize;
                loop {
                    let c = compare(RelOp::Lt, i as f64, n)?;
                    self.record(*pred, c);
                    if !c.value {
                        return Ok(Flow::Next);
                    }
                    self.slots[*var] = Some(Value::Scalar(items[i]));
                    if let Flow::Return(v) = self.exec_block(body)? {
                        return Ok(Flow::Return(v));
                    }
                    i += 1;
                    self.tick()?;
                }
            }
            StmtKind::Return(e) => {
                let v = self.eval(e)?;
                if !v.is_finite() {
                    return Err(Halt::Error(RuntimeErrorKind::NonFiniteResult));
                }
                Ok(Flow::Return(v))
            }
        }
    }

    fn eval(&mut self, e: &Expr) -> Result<Value, Halt> {
        match e.ty {
            Ty::Scalar => self.scalar(e).map(Value::Scalar),
            Ty::Bool => self.boolean(e).map(|b| Value::Bool(b.value)),
            Ty::Array => self.array(e).map(Value::Array),
        }
    }

    fn array(&mut self, e: &Expr) -> Result<Vec<f64>, Halt> {
        match &e.kind {
            ExprKind::Var(slot) => Ok(self.read_array(*slot)?.to_vec()),
            ExprKind::Call(Builtin::Zeros, args) => {
                let n = self.scalar(&args[0])?;
                if n < 0.0 || n.fract() != 0.0 || n > 1e6 {
                    return Err(Halt::Error(RuntimeErrorKind::Domain));
                }
                Ok(vec![0.0; n as usize])
            }
            _ => unreachable!("type checked array expression"),
        }
    }

    fn scalar(&mut self, e: &Expr) -> Result<f64, Halt> {
        let v = match &e.kind {
            ExprKind::Num(n) => *n,
            ExprKind::Var(slot) => match self.read(*slot)? {
                Value::Scalar(x) => *x,
                _ => unreachable!("type checked"),
            },
            ExprKind::Index { slot, index } => {
                let i = self.scalar(index)?;
                let a = self.read_array(*slot)?;
                a[check_index(i, a.len())?]
            }
            ExprKind::Unary(UnaryOp::Neg, inner) => -self.scalar(inner)?,
            ExprKind::Arith(op, l, r) => {
                let a = self.scalar(l)?;
                let b = self.scalar(r)?;
                let result = apply_arith(*op, a, b);
                if self.watching(e.id) {
                    self.observer.observe(
                        e.id,
                        Observation::Arith {
                            op: *op,
                            lhs: a,
                            rhs: b,
                            result,
                        },
                    );
                }
                return Ok(result?);
            }
            ExprKind::Call(b, args) => self.call(*b, args)?,
            _ => unreachable!("type checked scalar expression"),
        };
        if matches!(e.kind, ExprKind::Num(_) | ExprKind::Var(_) | ExprKind::Index { .. }) && self.watching(e.id) {
            self.observer.observe(e.id, Observation::Scalar(v));
        }
        Ok(v)
    }

    fn call(&mut self, b: Builtin, args: &[Expr]) -> Result<f64, Halt> {
        if b == Builtin::Len {
            return Ok(match &args[0].kind {
                ExprKind::Var(slot) => self.read_array(*slot)?.len() as f64,
                _ => self.array(&args[0])?.len() as f64,
            });
        }
        let x = self.scalar(&args[0])?;
        let domain = |ok: bool, v: f64| {
            if ok && !v.is_nan() {
                Ok(v)
            } else {
                Err(Halt::Error(RuntimeErrorKind::Domain))
            }
        };
        match b {
            Builtin::Abs => Ok(x.abs()),
            Builtin::Sqrt => domain(x >= 0.0, x.sqrt()),
            Builtin::Ln => domain(x > 0.0, x.ln()),
            Builtin::Exp => Ok(x.exp()),
            Builtin::Floor => Ok(x.floor()),
            Builtin::Pow => {
                let y = self.scalar(&args[1])?;
                domain(true, x.powf(y))
            }
            Builtin::Len | Builtin::Zeros => unreachable!("handled above"),
        }
    }

    fn boolean(&mut self, e: &Expr) -> Result<BoolEval, Halt> {
        match &e.kind {
            ExprKind::Bool(b) => Ok(BoolEval::constant(*b)),
            ExprKind::Var(slot) => match self.read(*slot)? {
                Value::Bool(b) => Ok(BoolEval::constant(*b)),
                _ => unreachable!("type checked"),
            },
            ExprKind::Unary(UnaryOp::Not, inner) => Ok(self.boolean(inner)?.negate()),
            ExprKind::Compare(op, l, r) => {
                let a = self.scalar(l)?;
                let b = self.scalar(r)?;
                let result = compare(*op, a, b)?;
                if self.watching(e.id) {
                    self.observer.observe(
                        e.id,
                        Observation::Compare {
                            op: *op,
                            lhs: a,
                            rhs: b,
                            result,
                        },
                    );
                }
                Ok(result)
            }
            ExprKind::Logic(op, l, r) => {
                let lhs = self.boolean(l)?;
                let skip = short_circuits(*op, lhs.value);
                let rhs = if skip { None } else { Some(self.boolean(r)?) };
                let result = combine_logic(*op, lhs, rhs);
                if self.watching(e.id) {
                    let side = match rhs {
                        Some(r) => Ok(r),
                        None => self.side_boolean(r),
                    };
                    self.observer.observe(
                        e.id,
                        Observation::Logic {
                            op: *op,
                            lhs,
                            rhs: side,
                            result: result.value,
                        },
                    );
                }
                Ok(result)
            }
            _ => unreachable!("type checked bool expression"),
        }
    }

    /// Evaluates an operand the original program does not evaluate, without
    /// notifying the observer of nested nodes.
    fn side_boolean(&mut self, e: &Expr) -> Result<BoolEval, RuntimeErrorKind> {
        let saved = self.observing;
        self.observing = false;
        let r = self.boolean(e);
        self.observing = saved;
        r.map_err(|h| match h {
            Halt::Error(k) => k,
            Halt::Budget => unreachable!("expressions do not consume steps"),
        })
    }
}

fn check_args(func: &FunctionDef, args: &[Value]) -> Result<(), DslError> {
    if args.len() != func.params.len() {
        return Err(DslError::Arguments {
            function: func.name.clone(),
            message: format!("expected {} arguments, got {}", func.params.len(), args.len()),
        });
    }
    for (p, a) in func.params.iter().zip(args) {
        if !a.matches(p.kind) {
            return Err(DslError::Arguments {
                function: func.name.clone(),
                message: format!("parameter `{}` expects {}, got {}", p.name, p.kind, a.kind_name()),
            });
        }
        if !a.is_finite() {
            return Err(DslError::Arguments {
                function: func.name.clone(),
                message: format!("parameter `{}` received a non-finite value", p.name),
            });
        }
    }
    Ok(())
}

/// Evaluates `func` on `args`, reporting watched nodes to `observer`.
pub fn evaluate_observed<O: Observer>(
    func: &FunctionDef,
    args: &[Value],
    budget: u64,
    observer: O,
) -> Result<(ExecutionTrace, O), DslError> {
    check_args(func, args)?;
    let mut slots: Vec<Option<Value>> = vec![None; func.locals.len()];
    for (i, a) in args.iter().enumerate() {
        slots[i] = Some(a.clone());
    }
    let mut m = Machine {
        slots,
        budget,
        trace: ExecutionTrace::new(func),
        observer,
        observing: true,
    };
    let outcome = match m.exec_block(&func.body) {
        Ok(Flow::Return(v)) => RunOutcome::Normal(v),
        Ok(Flow::Next) => unreachable!("parser guarantees a return on every path"),
        Err(Halt::Error(k)) => RunOutcome::RuntimeError(k),
        Err(Halt::Budget) => {
            m.trace.steps = budget;
            RunOutcome::BudgetExceeded
        }
    };
    m.trace.outcome = outcome;
    Ok((m.trace, m.observer))
}

/// Evaluates `func` on `args` within `budget` steps.
///
/// Every statement execution and every loop-condition re-check costs one step.
pub fn evaluate(func: &FunctionDef, args: &[Value], budget: u64) -> Result<ExecutionTrace, DslError> {
    evaluate_observed(func, args, budget, NoObserver).map(|(t, _)| t)
}
