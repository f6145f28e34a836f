//! Syntax tree of the numeric language.
//!
//! Every statement, decision point and expression node carries a dense
//! numeric identity assigned in source (preorder) order. Coverage goals,
//! traces and mutants all refer to nodes through these identities.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

macro_rules! node_id {
    ($(#[$m:meta])* $name:ident, $prefix:literal) => {
        $(#[$m])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        pub struct $name(pub u32);

        impl $name {
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($prefix, "{}"), self.0)
            }
        }
    };
}

node_id!(
    /// Identity of a statement ("line" goal).
    StmtId,
    "s"
);
node_id!(
    /// Identity of a decision point: `if`, `while` or `for`.
    PredicateId,
    "p"
);
node_id!(
    /// Identity of an expression node; mutation sites are expression nodes.
    ExprId,
    "e"
);

/// Outcome label of a decision point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Outcome {
    True,
    False,
}

impl Outcome {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Outcome::True
        } else {
            Outcome::False
        }
    }

    pub fn slot(self) -> usize {
        match self {
            Outcome::True => 0,
            Outcome::False => 1,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::True => "T",
            Outcome::False => "F",
        })
    }
}

/// Declared kind of a function parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamKind {
    Scalar,
    Array,
}

impl fmt::Display for ParamKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParamKind::Scalar => "scalar",
            ParamKind::Array => "array",
        })
    }
}

/// Static type of an expression or variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ty {
    Scalar,
    Array,
    Bool,
}

impl From<ParamKind> for Ty {
    fn from(k: ParamKind) -> Self {
        match k {
            ParamKind::Scalar => Ty::Scalar,
            ParamKind::Array => Ty::Array,
        }
    }
}

impl fmt::Display for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ty::Scalar => "scalar",
            Ty::Array => "array",
            Ty::Bool => "bool",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl ArithOp {
    pub const ALL: [ArithOp; 4] = [ArithOp::Add, ArithOp::Sub, ArithOp::Mul, ArithOp::Div];

    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
        }
    }

    pub fn precedence(self) -> u8 {
        match self {
            ArithOp::Add | ArithOp::Sub => 4,
            ArithOp::Mul | ArithOp::Div => 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RelOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl RelOp {
    pub const ALL: [RelOp; 6] = [RelOp::Eq, RelOp::Ne, RelOp::Lt, RelOp::Le, RelOp::Gt, RelOp::Ge];

    pub fn symbol(self) -> &'static str {
        match self {
            RelOp::Eq => "==",
            RelOp::Ne => "!=",
            RelOp::Lt => "<",
            RelOp::Le => "<=",
            RelOp::Gt => ">",
            RelOp::Ge => ">=",
        }
    }

    pub fn holds(self, a: f64, b: f64) -> bool {
        match self {
            RelOp::Eq => a == b,
            RelOp::Ne => a != b,
            RelOp::Lt => a < b,
            RelOp::Le => a <= b,
            RelOp::Gt => a > b,
            RelOp::Ge => a >= b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LogicOp {
    And,
    Or,
}

impl LogicOp {
    pub fn symbol(self) -> &'static str {
        match self {
            LogicOp::And => "and",
            LogicOp::Or => "or",
        }
    }

    pub fn flipped(self) -> LogicOp {
        match self {
            LogicOp::And => LogicOp::Or,
            LogicOp::Or => LogicOp::And,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Not,
}

/// Built-in functions. All are pure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Builtin {
    Len,
    Abs,
    Sqrt,
    Ln,
    Exp,
    Pow,
    Floor,
    Zeros,
}

impl Builtin {
    pub fn from_name(name: &str) -> Option<Builtin> {
        Some(match name {
            "len" => Builtin::Len,
            "abs" => Builtin::Abs,
            "sqrt" => Builtin::Sqrt,
            "ln" => Builtin::Ln,
            "exp" => Builtin::Exp,
            "pow" => Builtin::Pow,
            "floor" => Builtin::Floor,
            "zeros" => Builtin::Zeros,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Len => "len",
            Builtin::Abs => "abs",
            Builtin::Sqrt => "sqrt",
            Builtin::Ln => "ln",
            Builtin::Exp => "exp",
            Builtin::Pow => "pow",
            Builtin::Floor => "floor",
            Builtin::Zeros => "zeros",
        }
    }

    /// Argument types and result type.
    pub fn signature(self) -> (&'static [Ty], Ty) {
        match self {
            Builtin::Len => (&[Ty::Array], Ty::Scalar),
            Builtin::Abs | Builtin::Sqrt | Builtin::Ln | Builtin::Exp | Builtin::Floor => {
                (&[Ty::Scalar], Ty::Scalar)
            }
            Builtin::Pow => (&[Ty::Scalar, Ty::Scalar], Ty::Scalar),
            Builtin::Zeros => (&[Ty::Scalar], Ty::Array),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub id: ExprId,
    pub ty: Ty,
    pub kind: ExprKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Num(f64),
    Bool(bool),
    Var(usize),
    Index { slot: usize, index: Box<Expr> },
    Unary(UnaryOp, Box<Expr>),
    Arith(ArithOp, Box<Expr>, Box<Expr>),
    Compare(RelOp, Box<Expr>, Box<Expr>),
    Logic(LogicOp, Box<Expr>, Box<Expr>),
    Call(Builtin, Vec<Expr>),
}

impl Expr {
    /// Preorder walk over this expression tree.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match &self.kind {
            ExprKind::Num(_) | ExprKind::Bool(_) | ExprKind::Var(_) => {}
            ExprKind::Index { index, .. } => index.walk(f),
            ExprKind::Unary(_, e) => e.walk(f),
            ExprKind::Arith(_, l, r) | ExprKind::Compare(_, l, r) | ExprKind::Logic(_, l, r) => {
                l.walk(f);
                r.walk(f);
            }
            ExprKind::Call(_, args) => args.iter().for_each(|a| a.walk(f)),
        }
    }

    pub fn walk_mut(&mut self, f: &mut impl FnMut(&mut Expr)) {
        f(self);
        match &mut self.kind {
            ExprKind::Num(_) | ExprKind::Bool(_) | ExprKind::Var(_) => {}
            ExprKind::Index { index, .. } => index.walk_mut(f),
            ExprKind::Unary(_, e) => e.walk_mut(f),
            ExprKind::Arith(_, l, r) | ExprKind::Compare(_, l, r) | ExprKind::Logic(_, l, r) => {
                l.walk_mut(f);
                r.walk_mut(f);
            }
            ExprKind::Call(_, args) => args.iter_mut().for_each(|a| a.walk_mut(f)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub id: StmtId,
    pub line: usize,
    pub kind: StmtKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    Assign {
        slot: usize,
        value: Expr,
    },
    AssignIndex {
        slot: usize,
        index: Expr,
        value: Expr,
    },
    If {
        pred: PredicateId,
        cond: Expr,
        then_body: Vec<Stmt>,
        else_body: Option<Vec<Stmt>>,
    },
    While {
        pred: PredicateId,
        cond: Expr,
        body: Vec<Stmt>,
    },
    For {
        pred: PredicateId,
        var: usize,
        iterable: Expr,
        body: Vec<Stmt>,
    },
    Return(Expr),
}

impl Stmt {
    /// Expressions owned directly by this statement (not nested statements).
    pub fn exprs(&self) -> Vec<&Expr> {
        match &self.kind {
            StmtKind::Assign { value, .. } => vec![value],
            StmtKind::AssignIndex { index, value, .. } => vec![index, value],
            StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => vec![cond],
            StmtKind::For { iterable, .. } => vec![iterable],
            StmtKind::Return(e) => vec![e],
        }
    }

    pub fn exprs_mut(&mut self) -> Vec<&mut Expr> {
        match &mut self.kind {
            StmtKind::Assign { value, .. } => vec![value],
            StmtKind::AssignIndex { index, value, .. } => vec![index, value],
            StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => vec![cond],
            StmtKind::For { iterable, .. } => vec![iterable],
            StmtKind::Return(e) => vec![e],
        }
    }

    pub fn children(&self) -> Vec<&[Stmt]> {
        match &self.kind {
            StmtKind::If {
                then_body,
                else_body,
                ..
            } => {
                let mut v = vec![then_body.as_slice()];
                if let Some(e) = else_body {
                    v.push(e.as_slice());
                }
                v
            }
            StmtKind::While { body, .. } | StmtKind::For { body, .. } => vec![body.as_slice()],
            _ => Vec::new(),
        }
    }

    pub fn children_mut(&mut self) -> Vec<&mut Vec<Stmt>> {
        match &mut self.kind {
            StmtKind::If {
                then_body,
                else_body,
                ..
            } => {
                let mut v = vec![then_body];
                if let Some(e) = else_body {
                    v.push(e);
                }
                v
            }
            StmtKind::While { body, .. } | StmtKind::For { body, .. } => vec![body],
            _ => Vec::new(),
        }
    }

    pub fn predicate(&self) -> Option<PredicateId> {
        match &self.kind {
            StmtKind::If { pred, .. } | StmtKind::While { pred, .. } | StmtKind::For { pred, .. } => {
                Some(*pred)
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub kind: ParamKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Local {
    pub name: String,
    pub ty: Ty,
}

/// A function under test.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionDef {
    pub name: String,
    pub params: Vec<Param>,
    pub body: Vec<Stmt>,
    /// Variable slots; parameters occupy the first `params.len()` slots.
    pub locals: Vec<Local>,
    /// For every statement, the decision outcomes it is nested under.
    pub control_dependencies: BTreeMap<StmtId, BTreeSet<(PredicateId, Outcome)>>,
    pub stmt_count: u32,
    pub predicate_count: u32,
    pub expr_count: u32,
}

impl FunctionDef {
    /// Preorder walk over all statements.
    pub fn walk_stmts<'a>(&'a self, f: &mut impl FnMut(&'a Stmt)) {
        fn go<'a>(stmts: &'a [Stmt], f: &mut impl FnMut(&'a Stmt)) {
            for s in stmts {
                f(s);
                for c in s.children() {
                    go(c, f);
                }
            }
        }
        go(&self.body, f);
    }

    /// Preorder walk over all expressions, statement by statement.
    pub fn walk_exprs<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        self.walk_stmts(&mut |s| {
            for e in s.exprs() {
                e.walk(f);
            }
        });
    }

    pub fn walk_exprs_mut(&mut self, f: &mut impl FnMut(&mut Expr)) {
        fn go(stmts: &mut [Stmt], f: &mut impl FnMut(&mut Expr)) {
            for s in stmts {
                for e in s.exprs_mut() {
                    e.walk_mut(f);
                }
                for c in s.children_mut() {
                    go(c, f);
                }
            }
        }
        go(&mut self.body, f);
    }

    pub fn statements(&self) -> Vec<StmtId> {
        (0..self.stmt_count).map(StmtId).collect()
    }

    pub fn predicates(&self) -> Vec<PredicateId> {
        (0..self.predicate_count).map(PredicateId).collect()
    }

    /// Branches some statement depends on.
    pub fn control_dependent_branches(&self) -> BTreeSet<(PredicateId, Outcome)> {
        self.control_dependencies
            .values()
            .flat_map(|s| s.iter().copied())
            .collect()
    }

    pub fn param_kinds(&self) -> Vec<ParamKind> {
        self.params.iter().map(|p| p.kind).collect()
    }

    pub fn slot_name(&self, slot: usize) -> &str {
        &self.locals[slot].name
    }
}

/// A parsed source file.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceUnit {
    pub source_name: String,
    pub functions: Vec<FunctionDef>,
}

impl SourceUnit {
    pub fn function(&self, name: &str) -> Option<&FunctionDef> {
        self.functions.iter().find(|f| f.name == name)
    }
}
