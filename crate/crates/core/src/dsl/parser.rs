use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::ast::*;
use super::DslError;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    Sym(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

const SYMBOLS: [&str; 20] = [
    "==", "!=", "<=", ">=", "<", ">", "=", "+", "-", "*", "/", "(", ")", "{", "}", "[", "]", ",",
    ";", ":",
];

fn lex(src: &str) -> Result<Vec<Token>, DslError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start_col = col;
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                line,
                col: start_col,
            });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let value: f64 = text.parse().map_err(|_| DslError::Syntax {
                line,
                col: start_col,
                message: format!("malformed number `{text}`"),
            })?;
            col += i - start;
            out.push(Token {
                tok: Tok::Num(value),
                line,
                col: start_col,
            });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(sym) => {
                i += sym.len();
                col += sym.len();
                out.push(Token {
                    tok: Tok::Sym(sym),
                    line,
                    col: start_col,
                });
            }
            None => {
                return Err(DslError::Syntax {
                    line,
                    col,
                    message: format!("unexpected character `{c}`"),
                })
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

const KEYWORDS: [&str; 14] = [
    "fn", "if", "else", "while", "for", "in", "return", "and", "or", "not", "true", "false",
    "scalar", "array",
];

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    // Per-function state.
    locals: Vec<Local>,
    scope: HashMap<String, usize>,
}

fn placeholder_expr(ty: Ty, kind: ExprKind) -> Expr {
    Expr {
        id: ExprId(0),
        ty,
        kind,
    }
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn advance(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, tok: &Token, message: impl Into<String>) -> Result<T, DslError> {
        Err(DslError::Syntax {
            line: tok.line,
            col: tok.col,
            message: message.into(),
        })
    }

    fn describe(tok: &Tok) -> String {
        match tok {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num(n) => format!("number {n}"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(&self.peek().tok, Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(x) if x == kw)
    }

    fn expect_sym(&mut self, s: &str) -> Result<Token, DslError> {
        if self.is_sym(s) {
            Ok(self.advance())
        } else {
            let t = self.peek().clone();
            self.err(&t, format!("expected `{s}`, found {}", Self::describe(&t.tok)))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<Token, DslError> {
        if self.is_kw(kw) {
            Ok(self.advance())
        } else {
            let t = self.peek().clone();
            self.err(&t, format!("expected `{kw}`, found {}", Self::describe(&t.tok)))
        }
    }

    fn ident(&mut self) -> Result<(String, Token), DslError> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.advance();
                Ok((s, t))
            }
            other => self.err(&t, format!("expected identifier, found {}", Self::describe(other))),
        }
    }

    fn unit(&mut self) -> Result<Vec<FunctionDef>, DslError> {
        let mut functions: Vec<FunctionDef> = Vec::new();
        while self.peek().tok != Tok::Eof {
            let f = self.function()?;
            if functions.iter().any(|g| g.name == f.name) {
                return Err(DslError::DuplicateFunction(f.name));
            }
            functions.push(f);
        }
        Ok(functions)
    }

    fn function(&mut self) -> Result<FunctionDef, DslError> {
        self.expect_kw("fn")?;
        let (name, _) = self.ident()?;
        self.locals.clear();
        self.scope.clear();
        self.expect_sym("(")?;
        let mut params = Vec::new();
        if !self.is_sym(")") {
            loop {
                let (pname, ptok) = self.ident()?;
                self.expect_sym(":")
                    .or_else(|_| self.err(&ptok, format!("expected `: scalar|array` after `{pname}`")))?;
                let kind = if self.is_kw("scalar") {
                    self.advance();
                    ParamKind::Scalar
                } else if self.is_kw("array") {
                    self.advance();
                    ParamKind::Array
                } else {
                    let t = self.peek().clone();
                    return self.err(&t, "expected parameter kind `scalar` or `array`");
                };
                if self.scope.contains_key(&pname) {
                    return self.err(&ptok, format!("duplicate parameter `{pname}`"));
                }
                self.scope.insert(pname.clone(), self.locals.len());
                self.locals.push(Local {
                    name: pname.clone(),
                    ty: kind.into(),
                });
                params.push(Param { name: pname, kind });
                if self.is_sym(",") {
                    self.advance();
                } else {
                    break;
                }
            }
        }
        self.expect_sym(")")?;
        let open = self.peek().clone();
        let body = self.block()?;
        if !block_returns(&body) {
            return Err(DslError::MissingReturn {
                function: name,
                line: open.line,
            });
        }
        let mut f = FunctionDef {
            name,
            params,
            body,
            locals: std::mem::take(&mut self.locals),
            control_dependencies: BTreeMap::new(),
            stmt_count: 0,
            predicate_count: 0,
            expr_count: 0,
        };
        number_nodes(&mut f);
        Ok(f)
    }

    fn block(&mut self) -> Result<Vec<Stmt>, DslError> {
        self.expect_sym("{")?;
        let mut stmts: Vec<Stmt> = Vec::new();
        while !self.is_sym("}") {
            if self.peek().tok == Tok::Eof {
                let t = self.peek().clone();
                return self.err(&t, "unterminated block, expected `}`");
            }
            let t = self.peek().clone();
            if stmts.last().is_some_and(stmt_returns) {
                return self.err(&t, "unreachable statement after return");
            }
            stmts.push(self.stmt()?);
        }
        self.advance();
        Ok(stmts)
    }

    fn stmt(&mut self) -> Result<Stmt, DslError> {
        let t = self.peek().clone();
        let line = t.line;
        let mk = |kind| Stmt {
            id: StmtId(0),
            line,
            kind,
        };
        if self.is_kw("if") {
            return self.if_stmt();
        }
        if self.is_kw("while") {
            self.advance();
            self.expect_sym("(")?;
            let cond = self.bool_expr()?;
            self.expect_sym(")")?;
            let body = self.block()?;
            return Ok(mk(StmtKind::While {
                pred: PredicateId(0),
                cond,
                body,
            }));
        }
        if self.is_kw("for") {
            self.advance();
            let (var, vtok) = self.ident()?;
            self.expect_kw("in")?;
            let iterable = self.expr()?;
            if iterable.ty != Ty::Array {
                return self.err(&vtok, format!("`for` expects an array, found {}", iterable.ty));
            }
            let slot = self.bind(&var, Ty::Scalar, &vtok)?;
            let body = self.block()?;
            return Ok(mk(StmtKind::For {
                pred: PredicateId(0),
                var: slot,
                iterable,
                body,
            }));
        }
        if self.is_kw("return") {
            self.advance();
            let e = self.expr()?;
            self.expect_sym(";")?;
            return Ok(mk(StmtKind::Return(e)));
        }
        let (name, ntok) = self.ident()?;
        if self.is_sym("[") {
            self.advance();
            let slot = self.lookup(&name, &ntok)?;
            if self.locals[slot].ty != Ty::Array {
                return self.err(&ntok, format!("`{name}` is not an array"));
            }
            let index = self.scalar_expr()?;
            self.expect_sym("]")?;
            self.expect_sym("=")?;
            let value = self.scalar_expr()?;
            self.expect_sym(";")?;
            return Ok(mk(StmtKind::AssignIndex { slot, index, value }));
        }
        self.expect_sym("=")?;
        let value = self.expr()?;
        self.expect_sym(";")?;
        let slot = self.bind(&name, value.ty, &ntok)?;
        Ok(mk(StmtKind::Assign { slot, value }))
    }

    fn if_stmt(&mut self) -> Result<Stmt, DslError> {
        let t = self.expect_kw("if")?;
        self.expect_sym("(")?;
        let cond = self.bool_expr()?;
        self.expect_sym(")")?;
        let then_body = self.block()?;
        let else_body = if self.is_kw("else") {
            self.advance();
            if self.is_kw("if") {
                Some(vec![self.if_stmt()?])
            } else {
                Some(self.block()?)
            }
        } else {
            None
        };
        Ok(Stmt {
            id: StmtId(0),
            line: t.line,
            kind: StmtKind::If {
                pred: PredicateId(0),
                cond,
                then_body,
                else_body,
            },
        })
    }

    fn bind(&mut self, name: &str, ty: Ty, tok: &Token) -> Result<usize, DslError> {
        match self.scope.get(name) {
            Some(&slot) => {
                if self.locals[slot].ty != ty {
                    return Err(DslError::Type {
                        line: tok.line,
                        col: tok.col,
                        message: format!(
                            "`{name}` has type {}, cannot assign {ty}",
                            self.locals[slot].ty
                        ),
                    });
                }
                Ok(slot)
            }
            None => {
                let slot = self.locals.len();
                self.locals.push(Local {
                    name: name.to_string(),
                    ty,
                });
                self.scope.insert(name.to_string(), slot);
                Ok(slot)
            }
        }
    }

    fn lookup(&self, name: &str, tok: &Token) -> Result<usize, DslError> {
        self.scope
            .get(name)
            .copied()
            .ok_or_else(|| DslError::UndeclaredVariable {
                name: name.to_string(),
                line: tok.line,
                col: tok.col,
            })
    }

    fn typed(&mut self, want: Ty) -> Result<Expr, DslError> {
        let t = self.peek().clone();
        let e = self.expr()?;
        if e.ty != want {
            return Err(DslError::Type {
                line: t.line,
                col: t.col,
                message: format!("expected {want} expression, found {}", e.ty),
            });
        }
        Ok(e)
    }

    fn scalar_expr(&mut self) -> Result<Expr, DslError> {
        self.typed(Ty::Scalar)
    }

    fn bool_expr(&mut self) -> Result<Expr, DslError> {
        self.typed(Ty::Bool)
    }

    fn expr(&mut self) -> Result<Expr, DslError> {
        self.or_expr()
    }

    fn logic_operand(&mut self, e: Expr, tok: &Token, op: LogicOp) -> Result<Expr, DslError> {
        if e.ty != Ty::Bool {
            return Err(DslError::Type {
                line: tok.line,
                col: tok.col,
                message: format!("operand of `{}` must be bool, found {}", op.symbol(), e.ty),
            });
        }
        Ok(e)
    }

    fn or_expr(&mut self) -> Result<Expr, DslError> {
        let t = self.peek().clone();
        let mut lhs = self.and_expr()?;
        while self.is_kw("or") {
            let ot = self.advance();
            lhs = self.logic_operand(lhs, &t, LogicOp::Or)?;
            let r = self.and_expr()?;
            let rhs = self.logic_operand(r, &ot, LogicOp::Or)?;
            lhs = placeholder_expr(Ty::Bool, ExprKind::Logic(LogicOp::Or, Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<Expr, DslError> {
        let t = self.peek().clone();
        let mut lhs = self.not_expr()?;
        while self.is_kw("and") {
            let ot = self.advance();
            lhs = self.logic_operand(lhs, &t, LogicOp::And)?;
            let r = self.not_expr()?;
            let rhs = self.logic_operand(r, &ot, LogicOp::And)?;
            lhs = placeholder_expr(Ty::Bool, ExprKind::Logic(LogicOp::And, Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn not_expr(&mut self) -> Result<Expr, DslError> {
        if self.is_kw("not") {
            let t = self.advance();
            let e = self.not_expr()?;
            if e.ty != Ty::Bool {
                return Err(DslError::Type {
                    line: t.line,
                    col: t.col,
                    message: format!("operand of `not` must be bool, found {}", e.ty),
                });
            }
            return Ok(placeholder_expr(Ty::Bool, ExprKind::Unary(UnaryOp::Not, Box::new(e))));
        }
        self.cmp_expr()
    }

    fn cmp_expr(&mut self) -> Result<Expr, DslError> {
        let t = self.peek().clone();
        let lhs = self.add_expr()?;
        let op = match &self.peek().tok {
            Tok::Sym("==") => RelOp::Eq,
            Tok::Sym("!=") => RelOp::Ne,
            Tok::Sym("<") => RelOp::Lt,
            Tok::Sym("<=") => RelOp::Le,
            Tok::Sym(">") => RelOp::Gt,
            Tok::Sym(">=") => RelOp::Ge,
            _ => return Ok(lhs),
        };
        let ot = self.advance();
        let rhs = self.add_expr()?;
        if lhs.ty != Ty::Scalar || rhs.ty != Ty::Scalar {
            return Err(DslError::Type {
                line: t.line,
                col: ot.col,
                message: format!("`{}` compares scalars only", op.symbol()),
            });
        }
        Ok(placeholder_expr(Ty::Bool, ExprKind::Compare(op, Box::new(lhs), Box::new(rhs))))
    }

    fn arith(&self, op: ArithOp, lhs: Expr, rhs: Expr, tok: &Token) -> Result<Expr, DslError> {
        if lhs.ty != Ty::Scalar || rhs.ty != Ty::Scalar {
            return Err(DslError::Type {
                line: tok.line,
                col: tok.col,
                message: format!("`{}` applies to scalars only", op.symbol()),
            });
        }
        Ok(placeholder_expr(Ty::Scalar, ExprKind::Arith(op, Box::new(lhs), Box::new(rhs))))
    }

    fn add_expr(&mut self) -> Result<Expr, DslError> {
        let mut lhs = self.mul_expr()?;
        loop {
            let op = match &self.peek().tok {
                Tok::Sym("+") => ArithOp::Add,
                Tok::Sym("-") => ArithOp::Sub,
                _ => return Ok(lhs),
            };
            let t = self.advance();
            let rhs = self.mul_expr()?;
            lhs = self.arith(op, lhs, rhs, &t)?;
        }
    }

    fn mul_expr(&mut self) -> Result<Expr, DslError> {
        let mut lhs = self.unary_expr()?;
        loop {
            let op = match &self.peek().tok {
                Tok::Sym("*") => ArithOp::Mul,
                Tok::Sym("/") => ArithOp::Div,
                _ => return Ok(lhs),
            };
            let t = self.advance();
            let rhs = self.unary_expr()?;
            lhs = self.arith(op, lhs, rhs, &t)?;
        }
    }

    fn unary_expr(&mut self) -> Result<Expr, DslError> {
        if self.is_sym("-") {
            let t = self.advance();
            // `-` directly applied to a literal folds into a negative literal.
            if let Tok::Num(n) = self.peek().tok {
                self.advance();
                return Ok(placeholder_expr(Ty::Scalar, ExprKind::Num(-n)));
            }
            let e = self.unary_expr()?;
            if e.ty != Ty::Scalar {
                return self.err(&t, format!("unary `-` applies to scalars only, found {}", e.ty));
            }
            return Ok(placeholder_expr(Ty::Scalar, ExprKind::Unary(UnaryOp::Neg, Box::new(e))));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, DslError> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::Num(n) => {
                let n = *n;
                self.advance();
                Ok(placeholder_expr(Ty::Scalar, ExprKind::Num(n)))
            }
            Tok::Sym("(") => {
                self.advance();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Ident(s) if s == "true" || s == "false" => {
                let b = s == "true";
                self.advance();
                Ok(placeholder_expr(Ty::Bool, ExprKind::Bool(b)))
            }
            Tok::Ident(_) => {
                let (name, ntok) = self.ident()?;
                if self.is_sym("(") {
                    let Some(builtin) = Builtin::from_name(&name) else {
                        return self.err(&ntok, format!("unknown function `{name}`"));
                    };
                    self.advance();
                    let mut args = Vec::new();
                    if !self.is_sym(")") {
                        loop {
                            args.push(self.expr()?);
                            if self.is_sym(",") {
                                self.advance();
                            } else {
                                break;
                            }
                        }
                    }
                    self.expect_sym(")")?;
                    let (want, ret) = builtin.signature();
                    let got: Vec<Ty> = args.iter().map(|a| a.ty).collect();
                    if got != want {
                        return Err(DslError::Type {
                            line: ntok.line,
                            col: ntok.col,
                            message: format!(
                                "`{name}` expects ({}), found ({})",
                                join_tys(want),
                                join_tys(&got)
                            ),
                        });
                    }
                    return Ok(placeholder_expr(ret, ExprKind::Call(builtin, args)));
                }
                let slot = self.lookup(&name, &ntok)?;
                if self.is_sym("[") {
                    self.advance();
                    if self.locals[slot].ty != Ty::Array {
                        return self.err(&ntok, format!("`{name}` is not an array"));
                    }
                    let index = self.scalar_expr()?;
                    self.expect_sym("]")?;
                    return Ok(placeholder_expr(
                        Ty::Scalar,
                        ExprKind::Index {
                            slot,
                            index: Box::new(index),
                        },
                    ));
                }
                Ok(placeholder_expr(self.locals[slot].ty, ExprKind::Var(slot)))
            }
            other => self.err(&t, format!("expected expression, found {}", Self::describe(other))),
        }
    }
}

fn join_tys(t: &[Ty]) -> String {
    t.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(", ")
}

fn stmt_returns(s: &Stmt) -> bool {
    match &s.kind {
        StmtKind::Return(_) => true,
        StmtKind::If {
            then_body,
            else_body: Some(e),
            ..
        } => block_returns(then_body) && block_returns(e),
        _ => false,
    }
}

fn block_returns(b: &[Stmt]) -> bool {
    b.last().is_some_and(stmt_returns)
}

/// Assigns preorder identities to statements, predicates and expressions and
/// derives control dependencies from the nesting structure.
pub(crate) fn number_nodes(f: &mut FunctionDef) {
    struct Counters {
        stmt: u32,
        pred: u32,
        expr: u32,
    }
    fn go(
        stmts: &mut [Stmt],
        enclosing: &BTreeSet<(PredicateId, Outcome)>,
        c: &mut Counters,
        deps: &mut BTreeMap<StmtId, BTreeSet<(PredicateId, Outcome)>>,
    ) {
        for s in stmts {
            s.id = StmtId(c.stmt);
            c.stmt += 1;
            deps.insert(s.id, enclosing.clone());
            for e in s.exprs_mut() {
                e.walk_mut(&mut |x| {
                    x.id = ExprId(c.expr);
                    c.expr += 1;
                });
            }
            let pred = match &mut s.kind {
                StmtKind::If { pred, .. } | StmtKind::While { pred, .. } | StmtKind::For { pred, .. } => {
                    *pred = PredicateId(c.pred);
                    c.pred += 1;
                    Some(*pred)
                }
                _ => None,
            };
            if let Some(p) = pred {
                let is_if = matches!(s.kind, StmtKind::If { .. });
                for (i, child) in s.children_mut().into_iter().enumerate() {
                    let outcome = if is_if && i == 1 { Outcome::False } else { Outcome::True };
                    let mut inner = enclosing.clone();
                    inner.insert((p, outcome));
                    go(child, &inner, c, deps);
                }
            }
        }
    }
    let mut c = Counters {
        stmt: 0,
        pred: 0,
        expr: 0,
    };
    let mut deps = BTreeMap::new();
    go(&mut f.body, &BTreeSet::new(), &mut c, &mut deps);
    f.stmt_count = c.stmt;
    f.predicate_count = c.pred;
    f.expr_count = c.expr;
    f.control_dependencies = deps;
}

pub fn parse_unit(source_name: &str, text: &str) -> Result<SourceUnit, DslError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        locals: Vec::new(),
        scope: HashMap::new(),
    };
    let functions = p.unit()?;
    Ok(SourceUnit {
        source_name: source_name.to_string(),
        functions,
    })
}
