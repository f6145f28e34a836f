//! A small numeric language for functions under test.
//!
//! Functions take scalar and array parameters and are built from
//! assignments, `if`/`else`, `while`, `for x in arr` and `return`. The
//! grammar is documented in `docs/grammar.ebnf`.
//!
//! ```
//! use mtw::dsl::{self, Value};
//!
//! let unit = dsl::parse("fn id(x: scalar) { return x; }").unwrap();
//! let f = &unit.functions[0];
//! let trace = dsl::evaluate(f, &[Value::Scalar(4.0)], dsl::DEFAULT_BUDGET).unwrap();
//! assert_eq!(trace.outcome.value(), Some(&Value::Scalar(4.0)));
//! ```

mod ast;
mod distance;
mod interp;
mod parser;
mod printer;
mod value;

use std::collections::BTreeSet;

pub use ast::*;
pub use distance::{branch_distance, BoolEval, K};
pub use interp::{
    evaluate, evaluate_observed, ExecutionTrace, NoObserver, Observation, Observer, DEFAULT_BUDGET,
};
pub(crate) use interp::apply_arith;
pub use printer::{expr_to_string, format_number, function_to_string, unit_to_string};
pub use value::{RunOutcome, RuntimeErrorKind, Value};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DslError {
    #[error("syntax error at line {line}, column {col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("type error at line {line}, column {col}: {message}")]
    Type {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("use of undeclared variable `{name}` at line {line}, column {col}")]
    UndeclaredVariable { name: String, line: usize, col: usize },
    #[error("duplicate function `{0}`")]
    DuplicateFunction(String),
    #[error("function `{function}` (line {line}) does not return on every path")]
    MissingReturn { function: String, line: usize },
    #[error("bad arguments for `{function}`: {message}")]
    Arguments { function: String, message: String },
}

/// Parses source text into a [`SourceUnit`].
pub fn parse(text: &str) -> Result<SourceUnit, DslError> {
    parser::parse_unit("<input>", text)
}

pub fn parse_named(source_name: &str, text: &str) -> Result<SourceUnit, DslError> {
    parser::parse_unit(source_name, text)
}

/// Coverage goals of a function: every statement, and both outcomes of
/// every decision point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageGoals {
    pub lines: BTreeSet<StmtId>,
    pub branches: BTreeSet<(PredicateId, Outcome)>,
}

pub fn coverage_goals(f: &FunctionDef) -> CoverageGoals {
    CoverageGoals {
        lines: f.statements().into_iter().collect(),
        branches: f
            .predicates()
            .into_iter()
            .flat_map(|p| [(p, Outcome::True), (p, Outcome::False)])
            .collect(),
    }
}

/// Clears source positions so structurally equal trees compare equal.
pub fn strip_positions(f: &mut FunctionDef) {
    fn go(stmts: &mut [Stmt]) {
        for s in stmts {
            s.line = 0;
            for c in s.children_mut() {
                go(c);
            }
        }
    }
    go(&mut f.body);
}
