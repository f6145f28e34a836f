use std::fmt;

use serde::{Deserialize, Serialize};

use super::ast::ParamKind;

/// A runtime value: real scalar, array of reals, or boolean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Scalar(f64),
    Array(Vec<f64>),
    Bool(bool),
}

impl Value {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Value::Scalar(_) => "scalar",
            Value::Array(_) => "array",
            Value::Bool(_) => "bool",
        }
    }

    pub fn matches(&self, kind: ParamKind) -> bool {
        matches!(
            (self, kind),
            (Value::Scalar(_), ParamKind::Scalar) | (Value::Array(_), ParamKind::Array)
        )
    }

    pub fn as_scalar(&self) -> Option<f64> {
        match self {
            Value::Scalar(x) => Some(*x),
            _ => None,
        }
    }

    pub fn as_array(&self) -> Option<&[f64]> {
        match self {
            Value::Array(a) => Some(a),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            Value::Scalar(x) => x.is_finite(),
            Value::Array(a) => a.iter().all(|x| x.is_finite()),
            Value::Bool(_) => true,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Scalar(x) => write!(f, "{x}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Array(a) => {
                f.write_str("[")?;
                for (i, x) in a.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str("]")
            }
        }
    }
}

/// Runtime failures. These are results of an evaluation, never host panics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuntimeErrorKind {
    DivisionByZero,
    IndexOutOfRange,
    NonIntegerIndex,
    NanInPredicate,
    NonFiniteOperand,
    NotANumber,
    Domain,
    Uninitialized,
    NonFiniteResult,
}

impl fmt::Display for RuntimeErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RuntimeErrorKind::DivisionByZero => "division_by_zero",
            RuntimeErrorKind::IndexOutOfRange => "index_out_of_range",
            RuntimeErrorKind::NonIntegerIndex => "non_integer_index",
            RuntimeErrorKind::NanInPredicate => "nan_in_predicate",
            RuntimeErrorKind::NonFiniteOperand => "non_finite_operand",
            RuntimeErrorKind::NotANumber => "not_a_number",
            RuntimeErrorKind::Domain => "domain",
            RuntimeErrorKind::Uninitialized => "uninitialized",
            RuntimeErrorKind::NonFiniteResult => "non_finite_result",
        })
    }
}

/// How an evaluation ended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunOutcome {
    Normal(Value),
    RuntimeError(RuntimeErrorKind),
    BudgetExceeded,
}

impl RunOutcome {
    pub fn is_normal(&self) -> bool {
        matches!(self, RunOutcome::Normal(_))
    }

    pub fn value(&self) -> Option<&Value> {
        match self {
            RunOutcome::Normal(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for RunOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunOutcome::Normal(v) => write!(f, "{v}"),
            RunOutcome::RuntimeError(k) => write!(f, "error:{k}"),
            RunOutcome::BudgetExceeded => f.write_str("budget_exceeded"),
        }
    }
}
